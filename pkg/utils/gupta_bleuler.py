"""
Gupta-Bleuler representation of ψ-free words

V(a, g) -> e^{iaA(g)} and W(m) -> e^{iA(m)}; products fold with
e^{iA(u)} e^{iaA(v)} = e^{ia<u, Δv>} e^{iA(u + av)} and the vacuum functional
is ϖ(e^{iA(u)}) = exp(W(u, u) / 2).
"""
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh
from tqdm import tqdm

from utils.algebra import (CentralMark, LabelSum, OperatorWord, PhaseExpr, PsiGenerator, VGenerator, W,
                           WGenerator, adjoint, alpha_p, beta_m, delta_terms, is_gauge_invariant)
from utils.config import ENV_DEFAULTS, GaugeInvarianceError, RepresentationError, TestFunctionError
from utils.kernels import default_config, mass_shell_restriction, wightman
from utils.testfun import PairDensity, TAG_DIVERGENCE_FREE, VectorField, gradient

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class GBExponent:
    """e^{iθ} e^{iA(u)} with u = Σ a g + Σ m kept as label sums."""

    phase: PhaseExpr
    fields: VectorField
    densities: LabelSum

    @property
    def parts(self):
        return ([(c, VectorField.leaf(leaf)) for c, leaf in self.fields.terms]
                + list(self.densities.terms))

    @property
    def text(self):
        return f"exp({self.phase.text}) * expA({self.fields.text} + {self.densities.text})"

    def equivalent_exponent(self, other, tol=1e-12):
        return (self.densities.equivalent(other.densities, tol)
                and LabelSum(self.fields.terms).equivalent(LabelSum(other.fields.terms), tol))


def represent(w):
    """
    Fold a ψ-free word into a single Gupta-Bleuler exponential

    Args:
        w: OperatorWord without ψ factors

    Returns:
        GBExponent whose phase holds the accumulated <u, Δv> terms

    Raises:
        RepresentationError: if w contains a ψ factor
    """
    phase = w.phase
    fields, densities = VectorField(), LabelSum()
    for f in w.factors:
        if isinstance(f, PsiGenerator):
            raise RepresentationError("matter factors ψ have no Gupta-Bleuler image")
        if isinstance(f, VGenerator):
            phase = phase.add_terms(delta_terms(fields, f.g, f.a) + delta_terms(densities, f.g, f.a))
            fields = fields + f.g.scaled(f.a)
        elif isinstance(f, WGenerator):
            if any(not isinstance(unit, PairDensity) for _, unit in f.m.terms):
                raise RepresentationError("bridge labels must be regular pair densities")
            phase = phase.add_terms(delta_terms(fields, f.m) + delta_terms(densities, f.m))
            densities = densities + f.m
        elif isinstance(f, CentralMark):
            a1, a2 = f.first.a, f.second.a
            phase = phase.add_terms(delta_terms(f.first.g, f.second.g, 2.0 * a1 * a2))
    return GBExponent(phase, fields, densities)


def _cross(parts_a, parts_b, cfg):
    value, err = 0j, 0.0
    for ca, la in parts_a:
        for cb, lb in parts_b:
            res = wightman(la, lb, cfg)
            value += ca * cb * res.value
            err += abs(ca * cb) * res.abs_error
    return value, err


def exponent_norm(rep, cfg=None):
    """W(u, u) for the exponent of a representation, with its error."""
    return _cross(rep.parts, rep.parts, cfg or default_config())


def vacuum_functional(u, cfg=None):
    """
    ϖ(e^{iA(u)}) = exp(W(u, u) / 2) for any vector field or pair density u

    Exceeds 1 for suitable u with δu ≠ 0, since W is indefinite there.
    """
    cfg = cfg or default_config()
    res = wightman(u, u, cfg)
    return complex(np.exp(0.5 * res.value))


def expectation(w, cfg=None):
    """Tuple (ϖ(w), abs_error) for a ψ-free word."""
    cfg = cfg or default_config()
    rep = represent(w)
    pv = rep.phase.evaluate(cfg)
    norm, err = exponent_norm(rep, cfg)
    value = pv.value * np.exp(0.5 * norm)
    return complex(value), float(abs(value) * (pv.abs_error + 0.5 * err))


def vacuum_expectation(w, cfg=None):
    """
    Vacuum functional on a word

    Args:
        w: OperatorWord without ψ factors
        cfg: QuadratureConfig

    Returns:
        complex value e^{iθ} exp(W(u, u) / 2)
    """
    return expectation(w, cfg)[0]


def strip_matter(w):
    """Word with its ψ factors removed."""
    return OperatorWord(w.phase, tuple(f for f in w.factors if not isinstance(f, PsiGenerator)))


@dataclass(frozen=True)
class GramResult:
    matrix: np.ndarray
    min_eigenvalue: float
    tolerance: float
    abs_error: float

    @property
    def is_psd(self):
        return self.min_eigenvalue >= -self.tolerance


def _workers(workers):
    return max(1, int(workers if workers is not None else ENV_DEFAULTS["workers"]))


def gram_psd(words, cfg=None, tolerance=1e-8, workers=None):
    """
    Gram matrix M_jk = ϖ(w_j* w_k) of gauge-invariant words

    Args:
        words: OperatorWords; ψ factors are stripped before the gauge check
        cfg: QuadratureConfig
        tolerance: Accepted negative eigenvalue magnitude
        workers: Threads used for the pairings

    Returns:
        GramResult

    Raises:
        GaugeInvarianceError: carrying the witness of the first failing word
    """
    cfg = cfg or default_config()
    stripped = [strip_matter(w) for w in words]
    for k, w in enumerate(stripped):
        audit = is_gauge_invariant(w)
        if not audit:
            raise GaugeInvarianceError(f"word {k} is not gauge invariant: {w.text}", witness=audit.witness)
    reps = [represent(w) for w in stripped]
    n = len(reps)
    index = [(j, k) for j in range(n) for k in range(j, n)]

    def cross(jk):
        j, k = jk
        return _cross(reps[j].parts, reps[k].parts, cfg)

    with ThreadPoolExecutor(max_workers=_workers(workers)) as pool:
        results = list(tqdm(pool.map(cross, index), total=len(index), desc="gram",
                            disable=not sys.stderr.isatty()))
    wmat = np.zeros((n, n), dtype=complex)
    err = 0.0
    for (j, k), (value, e) in zip(index, results):
        wmat[j, k] = value
        wmat[k, j] = np.conj(value)
        err += e
    thetas = [rep.phase.evaluate(cfg) for rep in reps]
    # log ϖ(w_j* w_k) = -iθ_j + iθ_k + (W_jj + W_kk)/2 - W_jk; real part stays ≤ 0
    log_d = np.array([1j * pv.theta + 0.5 * wmat[k, k].real for k, pv in enumerate(thetas)])
    matrix = np.exp(np.conj(log_d)[:, None] + log_d[None, :] - wmat) if n else np.zeros((0, 0))
    asym = float(np.max(np.abs(matrix - matrix.conj().T))) if n else 0.0
    if asym > HERMITIAN_TOL:
        logger.warning("gram matrix asymmetric by %.3g", asym)
    matrix = 0.5 * (matrix + matrix.conj().T)
    lam = float(eigvalsh(matrix)[0]) if n else 0.0
    logger.info("gram %dx%d minimum eigenvalue %.3e", n, n, lam)
    return GramResult(matrix, lam, tolerance, err + sum(pv.abs_error for pv in thetas))


def gb_condition_check(u, v, s, cfg=None, check_tags=True):
    """
    Smeared Gupta-Bleuler residual

        |<∂s, Δ₊ u>| + |<∂s, Δ₊ v>| + |<u, Δ₊ ∂s>| + |<v, Δ₊ ∂s>|

    Args:
        u: Divergence-free VectorField
        v: Divergence-free VectorField
        s: Scalar gauge function
        cfg: QuadratureConfig
        check_tags: Require the divergence-free tag on u and v

    Returns:
        float residual

    Raises:
        TestFunctionError: if a tag is missing and check_tags is set
    """
    cfg = cfg or default_config()
    if check_tags and not (TAG_DIVERGENCE_FREE in u.tags and TAG_DIVERGENCE_FREE in v.tags):
        raise TestFunctionError("the Gupta-Bleuler condition is stated for divergence-free fields")
    if s.is_zero:
        return 0.0
    ds = gradient(s)
    total = 0.0
    for x in (u, v):
        total += abs(wightman(ds, x, cfg).value) + abs(wightman(x, ds, cfg).value)
    return float(total)


@dataclass(frozen=True)
class Consistency:
    lhs: complex
    rhs: complex

    @property
    def discrepancy(self):
        return abs(self.lhs - self.rhs)


def implementation_consistency(m, w, cfg=None):
    """
    Compare e^{iA(m)} w e^{-iA(m)} computed in the representation with the
    symbolic β_m(w)

    Returns:
        Consistency(lhs, rhs)
    """
    cfg = cfg or default_config()
    bridge = W(m)
    conjugated = bridge.concat(w).concat(OperatorWord.of(*(f.inverse() for f in reversed(bridge.factors))))
    lhs = vacuum_expectation(conjugated, cfg)
    rhs = vacuum_expectation(beta_m(m, w), cfg)
    return Consistency(lhs, rhs)


def correlation(u, v, P, cfg=None):
    """ϖ(e^{iA(u)} e^{iA(v_P)}) for divergence-free u, v."""
    word = OperatorWord.of(VGenerator(1.0, u), VGenerator(1.0, v.transformed(P)))
    return vacuum_expectation(word, cfg)


def clustering_gap(w, P, cfg=None):
    """|ϖ(w* α_P(w)) - ϖ(w*) ϖ(α_P(w))|."""
    moved = alpha_p(P, w)
    joint = vacuum_expectation(adjoint(w).concat(moved), cfg)
    return abs(joint - vacuum_expectation(adjoint(w), cfg) * vacuum_expectation(moved, cfg))


def cocycle_word(m, P):
    """W(m) W(m_P)*, gauge invariant only when m_P carries the same charges."""
    moved = m.transformed(P)
    return W(m).concat(OperatorWord.of(WGenerator(-LabelSum.of(moved))))


def field_shift(m, x, route="momentum", cfg=None):
    """Classical shift ∂_μ m̲_ν - ∂_ν m̲_μ of F under β_m at x."""
    _, shift, _ = mass_shell_restriction(m, x, route, cfg)
    return shift
