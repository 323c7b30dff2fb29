"""
Operator words over the generators of the field algebra with static charges

Generators are V(a, g) for divergence-free g, bridges W(m) labelled by
pair densities and matter factors ψ(ρ) labelled by charge densities.
Words carry a symbolic phase; numbers only appear when a phase is
evaluated through utils.kernels.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from utils.config import GeometryError, TestFunctionError
from utils.geometry import regions_spacelike, union
from utils.kernels import pairing, phi_m
from utils.testfun import (ChargeDensity, PairDensity, ScalarField, TAG_DIVERGENCE_FREE, VectorField,
                           convolve_at, pair_density, scalar_bump)

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-13
EQUIV_TOL = 1e-12


def _fmt(value):
    return repr(float(value))


def _coeffs_close(pairs1, pairs2, tol):
    d1 = {item: c for c, item in pairs1}
    d2 = {item: c for c, item in pairs2}
    return all(abs(d1.get(k, 0.0) - d2.get(k, 0.0)) <= tol for k in set(d1) | set(d2))


@dataclass(frozen=True)
class LabelSum:
    """Real combination of unit-charge densities (pairs or point charges) in canonical order."""

    terms: tuple = ()

    @classmethod
    def combine(cls, pairs):
        merged = {}
        for coeff, unit in pairs:
            merged[unit] = merged.get(unit, 0.0) + float(coeff)
        return cls(tuple(sorted(((c, u) for u, c in merged.items() if abs(c) > ZERO_TOL),
                                key=lambda cu: cu[1].text)))

    @classmethod
    def of(cls, density):
        if isinstance(density, LabelSum):
            return density
        if not isinstance(density, (PairDensity, ChargeDensity)):
            raise TestFunctionError(f"expected a pair or charge density, got {type(density).__name__}")
        coeff, unit = density.canonical()
        return cls() if unit is None else cls.combine([(coeff, unit)])

    @property
    def is_zero(self):
        return not self.terms

    @property
    def text(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{_fmt(c)}*{u.text}" for c, u in self.terms)

    @property
    def support(self):
        return union(*(u.support for _, u in self.terms)) if self.terms else None

    def __add__(self, other):
        return LabelSum.combine(self.terms + other.terms)

    def __neg__(self):
        return self.scaled(-1.0)

    def scaled(self, factor):
        return LabelSum.combine([(factor * c, u) for c, u in self.terms])

    def ratio_to(self, other):
        """λ with self = λ other, or None."""
        if self.is_zero or other.is_zero or len(self.terms) != len(other.terms):
            return None
        mine = {u: c for c, u in self.terms}
        theirs = {u: c for c, u in other.terms}
        if set(mine) != set(theirs):
            return None
        ratios = [mine[u] / theirs[u] for u in mine]
        lam = ratios[0]
        if all(abs(r - lam) <= EQUIV_TOL * max(1.0, abs(lam)) for r in ratios):
            return lam
        return None

    def equivalent(self, other, tol=EQUIV_TOL):
        return _coeffs_close(self.terms, other.terms, tol)

    def transformed(self, P):
        return LabelSum.combine([(c, u.transformed(P)) for c, u in self.terms])


class Generator:
    """Base of the word letters."""

    def inverse(self):
        raise NotImplementedError

    @property
    def is_trivial(self):
        return False


def _has_provenance(g):
    return bool(g.terms) and all(leaf.provenance is not None for _, leaf in g.terms)


@dataclass(frozen=True)
class VGenerator(Generator):
    """Weyl operator V(a, g) = e^{iaA(g)} for divergence-free g."""

    a: float
    g: VectorField

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        if not isinstance(self.g, VectorField):
            raise TestFunctionError("V needs a vector field label")
        if TAG_DIVERGENCE_FREE not in self.g.tags:
            raise TestFunctionError(f"V needs a divergence-free label, got {self.g.text}")

    @property
    def text(self):
        return f"V({_fmt(self.a)}, {self.g.text})"

    @property
    def has_provenance(self):
        return _has_provenance(self.g)

    @property
    def is_trivial(self):
        return abs(self.a) <= ZERO_TOL or self.g.is_zero

    def inverse(self):
        return VGenerator(-self.a, self.g)

    def normalized(self):
        """V(a, δf) = V(aλ, δf / λ) with λ the leading coefficient."""
        if not self.has_provenance:
            return self
        lam = self.g.leading_coefficient
        if lam == 1.0:
            return self
        return VGenerator(self.a * lam, self.g.scaled(1.0 / lam))

    def equivalent(self, other, tol=EQUIV_TOL):
        return (isinstance(other, VGenerator) and abs(self.a - other.a) <= tol
                and _coeffs_close(self.g.terms, other.g.terms, tol))


@dataclass(frozen=True)
class WGenerator(Generator):
    """Gauge bridge W(m) for a (combination of) pair densities."""

    m: LabelSum

    @property
    def text(self):
        return f"W({self.m.text})"

    @property
    def is_trivial(self):
        return self.m.is_zero

    def inverse(self):
        return WGenerator(-self.m)

    def equivalent(self, other, tol=EQUIV_TOL):
        return isinstance(other, WGenerator) and self.m.equivalent(other.m, tol)


@dataclass(frozen=True)
class PsiGenerator(Generator):
    """Static matter factor ψ(ρ)."""

    rho: LabelSum

    @property
    def text(self):
        return f"psi({self.rho.text})"

    @property
    def is_trivial(self):
        return self.rho.is_zero

    def inverse(self):
        return PsiGenerator(-self.rho)

    def equivalent(self, other, tol=EQUIV_TOL):
        return isinstance(other, PsiGenerator) and self.rho.equivalent(other.rho, tol)


@dataclass(frozen=True)
class CentralMark(Generator):
    """Unevaluated group commutator of two Weyl operators with spacelike supports; central."""

    first: VGenerator
    second: VGenerator

    @property
    def text(self):
        return f"mark({self.first.text}, {self.second.text})"

    @property
    def is_trivial(self):
        return self.first.is_trivial or self.second.is_trivial

    def inverse(self):
        return CentralMark(self.second, self.first)

    def equivalent(self, other, tol=EQUIV_TOL):
        return (isinstance(other, CentralMark) and self.first.equivalent(other.first, tol)
                and self.second.equivalent(other.second, tol))


def _leaves(label):
    """Expand a vector field or density sum into (coefficient, unit label)."""
    if isinstance(label, VectorField):
        return [(c, VectorField.leaf(leaf)) for c, leaf in label.terms]
    if isinstance(label, LabelSum):
        return list(label.terms)
    if isinstance(label, (PairDensity, ChargeDensity)):
        return list(LabelSum.of(label).terms)
    raise TestFunctionError(f"cannot expand {type(label).__name__}")


@dataclass(frozen=True)
class PhiTerm:
    """φ_m(g) for a unit pair density and a single-leaf field."""

    m: PairDensity
    g: VectorField

    @property
    def text(self):
        return f"phi({self.m.text}; {self.g.text})"

    def evaluate(self, cfg=None):
        res = phi_m(self.m, self.g, "momentum", cfg)
        return float(np.real(res.value)), res.abs_error


@dataclass(frozen=True)
class DeltaTerm:
    """<u, Δv>, antisymmetric, stored with u.text < v.text."""

    u: object
    v: object

    @property
    def text(self):
        return f"pj({self.u.text}; {self.v.text})"

    def evaluate(self, cfg=None):
        res = pairing(self.u, self.v, "pauli_jordan", cfg)
        return float(np.real(res.value)), res.abs_error


@dataclass(frozen=True)
class ConvolutionTerm:
    """(s∗ϑ)(c) for a single scalar atom s."""

    atom: object
    mollifier: object
    c: object

    @property
    def text(self):
        return f"conv({self.atom.text}; {self.mollifier.text}; {self.c.text})"

    def evaluate(self, cfg=None):
        s = ScalarField.atom(self.atom)
        method = "quadrature" if any(self.atom.deriv) or self.atom.lap else "radial"
        return float(convolve_at(s, self.mollifier, self.c, method)), 1e-12


def phi_terms(m, g, coeff=1.0):
    """Expand coeff·φ_m(g) bilinearly into PhiTerm pairs."""
    return [(coeff * cm * cg, PhiTerm(mu, gl)) for cm, mu in _leaves(m) for cg, gl in _leaves(g)]


def delta_terms(u, v, coeff=1.0):
    """Expand coeff·<u, Δv> into canonical DeltaTerm pairs."""
    out = []
    for cu, lu in _leaves(u):
        for cv, lv in _leaves(v):
            if lu.text == lv.text:
                continue
            if lu.text < lv.text:
                out.append((coeff * cu * cv, DeltaTerm(lu, lv)))
            else:
                out.append((-coeff * cu * cv, DeltaTerm(lv, lu)))
    return out


def convolution_terms(s, mollifier, c, coeff=1.0):
    return [(coeff * k, ConvolutionTerm(atom, mollifier, c)) for k, atom in s.terms]


@dataclass(frozen=True)
class PhaseValue:
    theta: float
    abs_error: float

    @property
    def value(self):
        return complex(np.exp(1j * self.theta))


@dataclass(frozen=True)
class PhaseExpr:
    """
    Symbolic phase θ of e^{iθ}: rational turns of 2π, plain radians and a
    real combination of pairing and convolution terms.
    """

    turns: Fraction = Fraction(0)
    radians: float = 0.0
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "turns", Fraction(self.turns) % 1)
        object.__setattr__(self, "radians", float(self.radians))

    @classmethod
    def of_terms(cls, pairs, turns=Fraction(0), radians=0.0):
        merged = {}
        for coeff, term in pairs:
            merged[term] = merged.get(term, 0.0) + float(coeff)
        terms = tuple(sorted(((t, c) for t, c in merged.items() if abs(c) > ZERO_TOL),
                             key=lambda tc: tc[0].text))
        return cls(turns, radians, terms)

    @property
    def is_zero(self):
        return self.turns == 0 and abs(self.radians) <= ZERO_TOL and not self.terms

    @property
    def is_numeric(self):
        return not self.terms

    def __add__(self, other):
        return PhaseExpr.of_terms([(c, t) for t, c in self.terms + other.terms],
                                  self.turns + other.turns, self.radians + other.radians)

    def __neg__(self):
        return PhaseExpr.of_terms([(-c, t) for t, c in self.terms], -self.turns, -self.radians)

    def __sub__(self, other):
        return self + (-other)

    def add_terms(self, pairs):
        return self + PhaseExpr.of_terms(pairs)

    def equivalent(self, other, tol=EQUIV_TOL):
        diff = self - other
        return (diff.turns == 0 and abs(diff.radians) <= tol
                and all(abs(c) <= tol for _, c in diff.terms))

    @property
    def text(self):
        parts = []
        if self.turns:
            parts.append(f"{self.turns}*turn")
        if self.radians:
            parts.append(f"{_fmt(self.radians)}*rad")
        parts += [f"{_fmt(c)}*{t.text}" for t, c in self.terms]
        return " + ".join(parts) if parts else "0"

    def evaluate(self, cfg=None):
        """Numeric θ with the summed error estimates of its terms."""
        theta = 2.0 * np.pi * float(self.turns) + self.radians
        err = 0.0
        for term, coeff in self.terms:
            value, e = term.evaluate(cfg)
            theta += coeff * value
            err += abs(coeff) * e
        return PhaseValue(theta, err)


ZERO_PHASE = PhaseExpr()


@dataclass(frozen=True)
class OperatorWord:
    """e^{iθ} times an ordered product of generators."""

    phase: PhaseExpr = ZERO_PHASE
    factors: tuple = ()

    @classmethod
    def of(cls, *factors, phase=ZERO_PHASE):
        return cls(phase, tuple(factors))

    @property
    def is_identity(self):
        return not self.factors and self.phase.is_zero

    @property
    def text(self):
        parts = [] if self.phase.is_zero else [f"exp({self.phase.text})"]
        parts += [f.text for f in self.factors]
        return " * ".join(parts) if parts else "identity"

    def __str__(self):
        return self.text

    def __mul__(self, other):
        return multiply_and_normalize(self, other)

    def concat(self, other):
        return OperatorWord(self.phase + other.phase, self.factors + other.factors)

    def equivalent(self, other, tol=EQUIV_TOL):
        return (len(self.factors) == len(other.factors) and self.phase.equivalent(other.phase, tol)
                and all(type(a) is type(b) and a.equivalent(b, tol)
                        for a, b in zip(self.factors, other.factors)))

    @property
    def v_factors(self):
        return [f for f in self.factors if isinstance(f, VGenerator)]

    @property
    def w_factors(self):
        return [f for f in self.factors if isinstance(f, WGenerator)]

    @property
    def psi_factors(self):
        return [f for f in self.factors if isinstance(f, PsiGenerator)]


IDENTITY_WORD = OperatorWord()


def V(a, g):
    return OperatorWord.of(VGenerator(a, g))


def W(m):
    return OperatorWord.of(WGenerator(LabelSum.of(m)))


def psi(rho):
    return OperatorWord.of(PsiGenerator(LabelSum.of(rho)))


def phase_word(turns=Fraction(0), radians=0.0):
    return OperatorWord(PhaseExpr(turns, radians))


@lru_cache(maxsize=65536)
def _supports_spacelike(label1, label2):
    return regions_spacelike(label1.support, label2.support)


@lru_cache(maxsize=65536)
def _provenance_spacelike(g1, g2):
    return regions_spacelike(g1.provenance.support, g2.provenance.support)


def _same_field(g1, g2):
    return g1 == g2 or (len(g1.terms) == len(g2.terms) and _coeffs_close(g1.terms, g2.terms, EQUIV_TOL))


class _VRules:
    @staticmethod
    def same(x, y):
        return _same_field(x.g, y.g)

    @staticmethod
    def merge(x, y):
        return VGenerator(x.a + y.a, x.g)

    @staticmethod
    def spacelike(x, y):
        return x.has_provenance and y.has_provenance and _provenance_spacelike(x.g, y.g)

    @staticmethod
    def merge_spacelike(x, y):
        return VGenerator(1.0, x.g.scaled(x.a) + y.g.scaled(y.a)).normalized()


class _WRules:
    @staticmethod
    def same(x, y):
        return x.m.ratio_to(y.m) is not None

    @staticmethod
    def merge(x, y):
        return WGenerator(x.m + y.m)

    @staticmethod
    def spacelike(x, y):
        return _supports_spacelike(x.m, y.m)

    @staticmethod
    def merge_spacelike(x, y):
        return WGenerator(x.m + y.m)


def _commute(rules, x, y):
    return rules.same(x, y) or rules.spacelike(x, y)


def _reduce_block(items, rules):
    """
    Merge letters of one block to a fixed point: equal labels first (through
    letters they commute with), then adjacent spacelike pairs.
    """
    items = [x for x in items if not x.is_trivial]
    changed = True
    while changed:
        changed = False
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                if not rules.same(items[i], items[j]):
                    continue
                between = items[i + 1:j]
                if all(_commute(rules, k, items[j]) for k in between):
                    merged = rules.merge(items[i], items[j])
                    items = items[:i] + [merged] + between + items[j + 1:]
                elif all(_commute(rules, items[i], k) for k in between):
                    merged = rules.merge(items[i], items[j])
                    items = items[:i] + between + [merged] + items[j + 1:]
                else:
                    continue
                items = [x for x in items if not x.is_trivial]
                changed = True
                break
            if changed:
                break
        if changed:
            continue
        for i in range(len(items) - 1):
            if rules.spacelike(items[i], items[i + 1]):
                merged = rules.merge_spacelike(items[i], items[i + 1])
                items = items[:i] + [merged] + items[i + 2:]
                items = [x for x in items if not x.is_trivial]
                changed = True
                break
    return items


def _reduce_marks(marks):
    marks = [mk for mk in marks if not mk.is_trivial]
    out = []
    for mk in marks:
        partner = next((k for k, other in enumerate(out) if other.equivalent(mk.inverse())), None)
        if partner is None:
            out.append(mk)
        else:
            out.pop(partner)
    return sorted(out, key=lambda mk: mk.text)


def normal_form(w):
    """
    Rewrite a word by the defining relations

    W's move right of every V picking up a φ_m(g) phase, ψ's merge at the far
    right, central marks collect before them, and equal or spacelike letters
    merge within each block.

    Args:
        w: OperatorWord

    Returns:
        OperatorWord in normal form
    """
    phase = w.phase
    vs, ws, marks = [], [], []
    rho = LabelSum()
    for f in w.factors:
        if isinstance(f, VGenerator):
            if f.is_trivial:
                continue
            for bridge in ws:
                phase = phase.add_terms(phi_terms(bridge.m, f.g, f.a))
            vs.append(f.normalized())
        elif isinstance(f, WGenerator):
            ws.append(f)
        elif isinstance(f, PsiGenerator):
            rho = rho + f.rho
        elif isinstance(f, CentralMark):
            marks.append(CentralMark(f.first.normalized(), f.second.normalized()))
        else:
            raise TestFunctionError(f"unknown generator {f!r}")
    factors = _reduce_block(vs, _VRules) + _reduce_block(ws, _WRules) + _reduce_marks(marks)
    if not rho.is_zero:
        factors.append(PsiGenerator(rho))
    return OperatorWord(phase, tuple(factors))


def multiply_and_normalize(w1, w2):
    """Product of two words brought to normal form."""
    return normal_form(w1.concat(w2))


def adjoint(w):
    """w* : reversed factors with inverted labels and negated phase."""
    return normal_form(OperatorWord(-w.phase, tuple(f.inverse() for f in reversed(w.factors))))


def group_commutator(w1, w2):
    """
    ⌊X1, X2⌋ = X1 X2 X1* X2*

    Returns the resolved word when the relations settle it, a word holding a
    single CentralMark for Weyl operators with spacelike supports, and the
    unreduced normal form otherwise.
    """
    resolved = normal_form(w1.concat(w2).concat(adjoint(w1)).concat(adjoint(w2)))
    if not resolved.factors:
        return resolved
    n1, n2 = normal_form(w1), normal_form(w2)
    if (len(n1.factors) == 1 and len(n2.factors) == 1
            and isinstance(n1.factors[0], VGenerator) and isinstance(n2.factors[0], VGenerator)
            and _supports_spacelike(n1.factors[0].g, n2.factors[0].g)):
        return OperatorWord.of(CentralMark(n1.factors[0], n2.factors[0]))
    return resolved


class Functional:
    """Real linear functional φ on divergence-free fields, as phase terms."""

    def phase(self, g, coeff=1.0):
        raise NotImplementedError


@dataclass(frozen=True)
class PairFunctional(Functional):
    """φ_m(g) = 2 <m, Δg>."""

    m: LabelSum

    def phase(self, g, coeff=1.0):
        return PhaseExpr.of_terms(phi_terms(self.m, g, coeff))


def beta_phi(phi, w):
    """β_φ: V(a, g) picks up e^{iaφ(g)}; bridges, matter and marks are unchanged."""
    phase = w.phase
    for f in w.factors:
        if isinstance(f, VGenerator):
            phase = phase + phi.phase(f.g, f.a)
    return normal_form(OperatorWord(phase, w.factors))


def beta_m(m, w):
    """
    Charge-pair automorphism β_m

    Args:
        m: PairDensity (or LabelSum of them)
        w: OperatorWord

    Returns:
        OperatorWord with phase increased by Σ a φ_m(g) over its V factors
    """
    return beta_phi(PairFunctional(LabelSum.of(m)), w)


def gauge_phase(s, w):
    """Phase picked up by w under the gauge function s."""
    pairs = []
    for f in w.factors:
        if isinstance(f, WGenerator):
            for c, unit in f.m.terms:
                moll = unit.mollifier
                pairs += convolution_terms(s, moll, unit.c2, c * unit.q)
                pairs += convolution_terms(s, moll, unit.c1, -c * unit.q)
        elif isinstance(f, PsiGenerator):
            for c, unit in f.rho.terms:
                pairs += convolution_terms(s, unit.mollifier, unit.c, c * unit.q)
    return PhaseExpr.of_terms(pairs)


def gauge_gamma(s, w):
    """
    Gauge automorphism γ_s

    W(m) gains q((s∗ϑ)(c2) - (s∗ϑ)(c1)), ψ(ρ) gains ∫ s ρ, V's are untouched.
    """
    if not isinstance(s, ScalarField):
        raise TestFunctionError("gauge functions are scalar fields")
    return normal_form(OperatorWord(w.phase + gauge_phase(s, w), w.factors))


def charge_balance(w):
    """Σ ψ-charges minus Σ divergences of the bridges, as point-charge labels."""
    pairs = []
    for f in w.factors:
        if isinstance(f, WGenerator):
            for c, unit in f.m.terms:
                pairs.append((-c * unit.q, ChargeDensity(1.0, unit.c1, unit.mollifier)))
                pairs.append((c * unit.q, ChargeDensity(1.0, unit.c2, unit.mollifier)))
        elif isinstance(f, PsiGenerator):
            pairs += [(c * unit.q, unit) for c, unit in f.rho.terms]
    return LabelSum.combine(pairs)


@dataclass(frozen=True)
class GaugeAudit:
    """Outcome of is_gauge_invariant; truthy when the word is invariant."""

    invariant: bool
    balance: LabelSum
    witness: ScalarField = None
    witness_phase: float = 0.0

    def __bool__(self):
        return self.invariant


def _separation(c, others):
    gaps = [max(abs(o.x0 - c.x0), float(np.linalg.norm(o.spatial - c.spatial))) for o in others]
    return min(gaps) if gaps else np.inf


def _witness_for(w, unit, others):
    a = unit.mollifier.a
    width = min(3.0 * a, 0.9 * (_separation(unit.c, others) - a))
    if width < 0.5 * a:
        return None, 0.0
    s = scalar_bump(unit.c, width, width, unit.mollifier.order)
    peak = float(s.evaluate(unit.c.as_array())[0])
    s = s.scaled(1.0 / peak)
    theta = gauge_phase(s, w).evaluate().theta
    return s, theta


def is_gauge_invariant(w, min_phase=1e-3):
    """
    Decide gauge invariance by the charge balance of the word

    Args:
        w: OperatorWord
        min_phase: Smallest witness phase accepted as separating

    Returns:
        GaugeAudit; on failure it carries a bump gauge function centred on an
        uncancelled charge and the phase it produces
    """
    balance = charge_balance(w)
    if balance.is_zero:
        return GaugeAudit(True, balance)
    centres = [unit.c for _, unit in balance.terms]
    best = (None, 0.0)
    for _, unit in balance.terms:
        others = [c for c in centres if c != unit.c]
        s, theta = _witness_for(w, unit, others)
        if s is not None and abs(theta) >= min_phase:
            return GaugeAudit(False, balance, s, theta)
        if s is not None and abs(theta) > abs(best[1]):
            best = (s, theta)
    logger.warning("no witness reaches phase %.3g for unbalanced charges %s", min_phase, balance.text)
    return GaugeAudit(False, balance, best[0], best[1])


def _transform_generator(f, P):
    if isinstance(f, VGenerator):
        return VGenerator(f.a, f.g.transformed(P))
    if isinstance(f, WGenerator):
        return WGenerator(f.m.transformed(P))
    if isinstance(f, PsiGenerator):
        return PsiGenerator(f.rho.transformed(P))
    return CentralMark(_transform_generator(f.first, P), _transform_generator(f.second, P))


def alpha_p(P, w):
    """
    Poincaré automorphism α_P acting on labels; the phase is a number and stays

    Raises:
        GeometryError: boosts applied to bridges or matter factors
    """
    if not P.is_family_preserving and (w.w_factors or w.psi_factors):
        raise GeometryError("bridges and charges follow only rotations and translations")
    return normal_form(OperatorWord(w.phase, tuple(_transform_generator(f, P) for f in w.factors)))


def omega_state(w, cfg=None):
    """Faithful state ω: the phase of the identity component, zero for any other word."""
    nf = normal_form(w)
    if nf.factors:
        return 0j
    return nf.phase.evaluate(cfg).value


def dressed_pair_operator(q, c1, c2, mollifier):
    """
    Gauge-invariant dressed bridge ψ(qϑ(c1 - ·)) W(m) ψ(qϑ(c2 - ·))*

    Raises:
        GeometryError: unless c1 and c2 are spacelike separated
    """
    m = pair_density(q, c1, c2, mollifier)
    if q == 0.0:
        return IDENTITY_WORD
    word = psi(ChargeDensity(q, c1, mollifier)).concat(W(m)).concat(psi(ChargeDensity(-q, c2, mollifier)))
    return normal_form(word)


@dataclass(frozen=True)
class Abelianized:
    """Formal label sums of a word: Σ a g, Σ m, Σ ρ."""

    vectors: VectorField
    pairs: LabelSum
    charges: LabelSum

    def equivalent(self, other, tol=EQUIV_TOL):
        return (_coeffs_close(self.vectors.terms, other.vectors.terms, tol)
                and self.pairs.equivalent(other.pairs, tol) and self.charges.equivalent(other.charges, tol))


def abelianize(w):
    """Image of w in the abelian quotient; marks are commutators and vanish there."""
    g = VectorField()
    m, rho = LabelSum(), LabelSum()
    for f in w.factors:
        if isinstance(f, VGenerator):
            g = g + f.g.scaled(f.a)
        elif isinstance(f, WGenerator):
            m = m + f.m
        elif isinstance(f, PsiGenerator):
            rho = rho + f.rho
    return Abelianized(g, m, rho)
