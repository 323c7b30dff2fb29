"""
Distributional pairings of the free massless field.

Conventions:
    W(u, v) = ∫ d³p / ((2π)³ 2|p|) conj(û^μ(p)) η_μν v̂^ν(p) on the shell p0 = |p|
    <u, Δ v> = Im W(u, v)       (Weyl form of the commutator)
    φ_m(g)  = 2 <m, Δ g>       (pair creating functional)

The angular integral over the shell is done in closed form for the
radial families of utils.testfun, so each pairing is a sum of
one-dimensional integrals in |p| over pairs of atoms.
"""
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import spherical_jn

from utils.config import ENV_DEFAULTS, GeometryError, QuadratureError, TestFunctionError
from utils.geometry import FourVector
from utils.profiles import BumpProfile, DeltaProfile, PlateauProfile, PointProfile, gauss_panels, spherical_mean
from utils.testfun import (METRIC, PairDensity, ScalarAtom, ScalarField, TAG_FLUX_PROBE, VectorField,
                           divergence, ft_eval)

logger = logging.getLogger(__name__)

MEASURE = 1.0 / (2.0 * (2.0 * np.pi) ** 3)
PAIR_BLOCK = 2_000_000
SERIES_TERMS = 24
CUBIC_LATTICE_SUM = -2.8372974794806


@dataclass(frozen=True)
class PairingValue:
    """Result of a pairing with its error estimate and the route that produced it."""

    value: complex
    abs_error: float
    method: str

    def __post_init__(self):
        if not math.isfinite(self.abs_error):
            raise QuadratureError("pairing error estimate is not finite")

    def scaled(self, factor):
        return PairingValue(self.value * factor, abs(factor) * self.abs_error, self.method)

    def __add__(self, other):
        return PairingValue(self.value + other.value, self.abs_error + other.abs_error, self.method)


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Quadrature settings for the momentum routes.

    Attributes:
        radial_points: Gauss nodes per |p| panel
        angular_order: Starting Gauss order in cos(theta) for the direct angular route
        cutoff: Momentum cutoff; None picks cutoff_factor / smallest feature width
        cutoff_factor: Cutoff in units of inverse feature width
        rtol: Target error relative to the integrand's absolute mass
        line_points: Gauss nodes per panel along pair-density segments
        max_refinements: Cutoff doublings before giving up
        use_on_shell_reduction: Reduce probes to scalar pairings on the shell
    """

    radial_points: int = 12
    angular_order: int = 26
    cutoff: float = None
    cutoff_factor: float = 40.0
    rtol: float = 1e-6
    line_points: int = 8
    max_refinements: int = 3
    use_on_shell_reduction: bool = True

    def __post_init__(self):
        if self.cutoff is not None and not self.cutoff > 0:
            raise QuadratureError(f"momentum cutoff must be positive, got {self.cutoff}")
        if not 0.0 < self.rtol < 1.0:
            raise QuadratureError(f"tolerance must lie in (0, 1), got {self.rtol}")

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def default_config():
    return QuadratureConfig(cutoff=ENV_DEFAULTS["quad_cutoff"])


@dataclass(frozen=True)
class _Atom:
    weight: float          # coefficient times the metric sign of its component
    mu: int                # component index, -1 for scalars
    center: tuple
    time: object
    space: object
    deriv: tuple
    lap: int


def _scalar_atoms(s, mu=-1, sign=1.0):
    return [_Atom(sign * c, mu, tuple(a.center.as_array()), a.time, a.space, a.deriv, a.lap)
            for c, a in s.terms]


def _line_edges(m, panel=None):
    """Panel edges in u; panels default to half the mollifier radius."""
    length = float(np.linalg.norm(m.d))
    panels = int(math.ceil(length / (panel or 0.5 * m.mollifier.a))) + 1
    return np.linspace(0.0, 1.0, panels + 1)


def _line_nodes(m, cfg, panel=None):
    return gauss_panels(_line_edges(m, panel), cfg.line_points)


def _atoms(obj, cfg, lower=False, panel=None):
    """
    Momentum atoms. With ``lower`` vector atoms carry η_μμ, so a contraction
    is a plain product when exactly one side is lowered.
    """
    if isinstance(obj, ScalarField):
        return _scalar_atoms(obj)
    if isinstance(obj, VectorField):
        atoms = []
        for mu in range(4):
            atoms += _scalar_atoms(obj.component(mu), mu, METRIC[mu] if lower else 1.0)
        return atoms
    if isinstance(obj, PairDensity):
        u, w = _line_nodes(obj, cfg, panel)
        pts = obj.point(u)
        moll = obj.mollifier
        atoms = []
        for mu in range(4):
            if obj.d[mu] == 0.0:
                continue
            sign = METRIC[mu] if lower else 1.0
            for pt, wt in zip(pts, w):
                atoms.append(_Atom(sign * obj.current[mu] * wt, mu, tuple(pt),
                                   moll.time, moll.space, (0, 0, 0, 0), 0))
        return atoms
    raise TestFunctionError(f"no momentum atoms for {type(obj).__name__}")


def _point_atoms(x, mu, deriv=(0, 0, 0, 0), coeff=1.0):
    return [_Atom(coeff, mu, tuple(FourVector.of(x).as_array()), DeltaProfile(), PointProfile(),
                  deriv, 0)]


def _feature_width(atom):
    return min(atom.time.half_width or np.inf, atom.space.feature_width)


@lru_cache(maxsize=None)
def _radial_derivative_terms(idx):
    """
    ∂^β f(|x|) as Σ coeff x^α F_n with F_n = ((1/ρ) d/dρ)^n f,
    using ∂_i (x^α F_n) = α_i x^(α - e_i) F_n + x^(α + e_i) F_(n+1).
    """
    terms = {((0, 0, 0), 0): 1.0}
    for axis in idx:
        nxt = {}
        for (alpha, n), coeff in terms.items():
            if alpha[axis]:
                lower = list(alpha)
                lower[axis] -= 1
                key = (tuple(lower), n)
                nxt[key] = nxt.get(key, 0.0) + coeff * alpha[axis]
            upper = list(alpha)
            upper[axis] += 1
            key = (tuple(upper), n + 1)
            nxt[key] = nxt.get(key, 0.0) + coeff
        terms = nxt
    return tuple((coeff, alpha, n) for (alpha, n), coeff in sorted(terms.items()))


def _reduced_bessel(n, z):
    """j_n(z) / z^n, regular at z = 0; power series below z = 1."""
    small = z < 1.0
    safe = np.where(small, 1.0, z)
    term = np.full(np.shape(z), 1.0 / float(np.prod(np.arange(2 * n + 1, 0, -2))))
    series = term.copy()
    for m in range(1, 12):
        term = term * (-0.5 * z ** 2) / (m * (2 * n + 2 * m + 1))
        series = series + term
    return np.where(small, series, spherical_jn(n, safe) / safe ** n)


def _angular(idx, omega, dvec):
    """
    ∫dΩ k^β e^{-i k·D} over |k| = omega, equal to i^|β| ∂_D^β [4π j0(omega |D|)]

    ((1/ρ) d/dρ)^n j0(ωρ) = (-ω²)^n j_n(z) / z^n with z = ωρ.
    """
    dist = np.linalg.norm(dvec, axis=-1)
    z = omega * dist
    out = np.zeros(np.broadcast(omega, dist).shape, dtype=complex)
    for coeff, alpha, n in _radial_derivative_terms(idx):
        mono = np.prod([dvec[..., i] ** alpha[i] for i in range(3)], axis=0)
        out = out + coeff * mono * (-omega ** 2) ** n * _reduced_bessel(n, z)
    return (1j ** len(idx)) * 4.0 * np.pi * out


def _profile_table(atoms, omega, conj):
    cache = {}
    for a in atoms:
        key = (a.time, a.space)
        if key not in cache:
            t = a.time.fourier(omega)
            cache[key] = (np.conj(t) if conj else t) * a.space.fourier(omega)
    return cache


def _side(atoms, omega, left):
    """Per-atom momentum factors; the left side is conjugated."""
    table = _profile_table(atoms, omega, left)
    rows = []
    for a in atoms:
        n0, nb = a.deriv[0], sum(a.deriv[1:])
        phase = np.exp((-1j if left else 1j) * omega * a.center[0])
        time_d = (1j * omega if left else -1j * omega) ** n0
        space_d = (-1j if left else 1j) ** nb
        rows.append(a.weight * table[(a.time, a.space)] * phase * time_d * space_d
                    * (-omega ** 2) ** a.lap)
    return np.array(rows) if rows else np.zeros((0, len(omega)), dtype=complex)


def _integrate(left, right, omega, weights):
    """Σ over atom pairs of ∫ dω ω MEASURE A_a B_b ang_ab, plus the absolute mass."""
    a_rows, b_rows = _side(left, omega, True), _side(right, omega, False)
    groups = {}
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            if a.mu != b.mu:
                continue
            idx = tuple(sorted(ax for ax in range(3) for _ in range(a.deriv[ax + 1] + b.deriv[ax + 1])))
            groups.setdefault(idx, []).append((i, j))
    total = np.zeros(len(omega), dtype=complex)
    mass = np.zeros(len(omega))
    centers_l = np.array([a.center for a in left]) if left else np.zeros((0, 4))
    centers_r = np.array([b.center for b in right]) if right else np.zeros((0, 4))
    block = max(1, PAIR_BLOCK // max(len(omega), 1))
    for idx, pairs in groups.items():
        pairs = np.array(pairs)
        for start in range(0, len(pairs), block):
            ii, jj = pairs[start:start + block, 0], pairs[start:start + block, 1]
            dvec = centers_r[jj, 1:] - centers_l[ii, 1:]
            ang = _angular(idx, omega[None, :], dvec[:, None, :])
            terms = a_rows[ii] * b_rows[jj] * ang
            total += terms.sum(axis=0)
            mass += np.abs(terms).sum(axis=0)
    integrand = MEASURE * omega * total
    return complex(np.sum(weights * integrand)), float(np.sum(weights * MEASURE * omega * mass))


def _grid(left, right, cutoff, cfg, refine=1.0):
    spread = 1.0
    for side in (left, right):
        if side:
            t = np.array([a.center[0] for a in side])
            xs = np.array([a.center[1:] for a in side])
            reach = max(a.space.outer_radius for a in side)
            spread += (t.max() - t.min()) + float(np.linalg.norm(xs.max(axis=0) - xs.min(axis=0))) + reach
    if left and right:
        cl = np.mean([a.center for a in left], axis=0)
        cr = np.mean([a.center for a in right], axis=0)
        spread += abs(cl[0] - cr[0]) + float(np.linalg.norm(cl[1:] - cr[1:]))
    width = min(np.pi / spread, cutoff / 16.0) / refine
    panels = int(math.ceil(cutoff / width))
    return gauss_panels(np.linspace(0.0, cutoff, panels + 1), cfg.radial_points)


def _side_width(atoms):
    return min([_feature_width(a) for a in atoms] or [np.inf])


def _auto_cutoff(left, right, cfg):
    if cfg.cutoff is not None:
        return cfg.cutoff
    widths = [w for w in (_side_width(left), _side_width(right)) if np.isfinite(w)]
    if not widths:
        raise QuadratureError("no profile bounds the momentum integrand; set a cutoff")
    # the integrand is a product: the smoother side bounds it
    return cfg.cutoff_factor / max(widths)


def _momentum_integral(left, right, cfg):
    if not left or not right:
        return PairingValue(0j, 0.0, "momentum")
    cutoff = _auto_cutoff(left, right, cfg)
    nodes, weights = _grid(left, right, cutoff, cfg)
    previous, _ = _integrate(left, right, nodes, weights)
    for attempt in range(cfg.max_refinements + 1):
        cutoff *= 1.5
        nodes, weights = _grid(left, right, cutoff, cfg, refine=1.5)
        value, mass = _integrate(left, right, nodes, weights)
        err = abs(value - previous)
        if err <= cfg.rtol * max(mass, 1e-300):
            return PairingValue(value, err, "momentum")
        logger.debug("pairing not converged at cutoff %.4g (err %.3g, mass %.3g)", cutoff, err, mass)
        previous = value
    raise QuadratureError(f"momentum pairing missed tolerance {cfg.rtol:g} at cutoff {cutoff:.4g}",
                          estimate=value, abs_error=err)


def _parts(obj):
    if isinstance(obj, VectorField):
        return [(c, VectorField.leaf(leaf)) for c, leaf in obj.terms]
    return [(1.0, obj)]


def _reduction(obj):
    if isinstance(obj, VectorField) and len(obj.terms) == 1:
        return obj.terms[0][1].reduction
    return None


def _mollifier_width(moll):
    return min(moll.time.half_width, moll.space.feature_width)


def _mollifier_reach(moll):
    return moll.time.half_width + moll.space.outer_radius


@lru_cache(maxsize=256)
def _moment_series(left, right, terms=SERIES_TERMS):
    """
    Even moments μ_2n of the line density whose transform is
    conj(τ̂_l) b̂_l τ̂_r b̂_r, and the radius of its support.

    Each factor contributes E[t^2j] / (2j)! (time) or E[|x|^2k] / (2k+1)!
    (radial); the coefficients of a sum of independent offsets convolve.
    """
    series = np.zeros(terms + 1)
    series[0] = 1.0
    for moll in (left, right):
        t, tw = gauss_panels(moll.time.knots, moll.order + terms + 2)
        r, rw = gauss_panels(moll.space._edges(), moll.order + terms + 4)
        tv, rv = moll.time(t) * tw, 4.0 * np.pi * moll.space(r) * rw * r ** 2
        time = [float(np.sum(tv * t ** (2 * j))) / math.factorial(2 * j) for j in range(terms + 1)]
        space = [float(np.sum(rv * r ** (2 * k))) / math.factorial(2 * k + 1) for k in range(terms + 1)]
        series = np.convolve(np.convolve(series, time)[:terms + 1], space)[:terms + 1]
    moments = series * np.array([float(math.factorial(2 * n)) for n in range(terms + 1)])
    return moments, _mollifier_reach(left) + _mollifier_reach(right)


def _profile_product(left, right, omega):
    return (np.conj(left.time.fourier(omega)) * left.space.fourier(omega)
            * right.time.fourier(omega) * right.space.fourier(omega))


def _settle(evaluate, spread, cutoff, cfg):
    """Run evaluate(nodes, weights) -> (values, mass) on growing cutoffs until it settles."""
    def grid(lam, refine):
        width = min(np.pi / spread, lam / 16.0) / refine
        return gauss_panels(np.linspace(0.0, lam, int(math.ceil(lam / width)) + 1), cfg.radial_points)

    previous, _ = evaluate(*grid(cutoff, 1.0))
    for _ in range(cfg.max_refinements + 1):
        cutoff *= 1.5
        values, mass = evaluate(*grid(cutoff, 1.5))
        err = np.abs(values - previous)
        if np.all(err <= cfg.rtol * max(mass, 1e-300)):
            return values, err
        previous = values
    raise QuadratureError(f"smeared kernel missed tolerance {cfg.rtol:g} at cutoff {cutoff:.4g}",
                          estimate=complex(np.sum(values)), abs_error=float(np.max(err)))


def _blocked(rows, omega, weights, factor):
    out = np.empty(len(rows), dtype=complex)
    block = max(1, PAIR_BLOCK // max(len(omega), 1))
    for start in range(0, len(rows), block):
        out[start:start + block] = factor(rows[start:start + block], omega) @ weights
    return out


def _half_line_transform(left, right, sigma, cutoff, cfg):
    """G(σ) = ∫_0^Λ F(ω) e^{iωσ} dω with F the product of the four profile transforms."""
    moments, reach = _moment_series(left, right)

    def evaluate(omega, weights):
        f = weights * _profile_product(left, right, omega)
        vals = _blocked(sigma, omega, f, lambda s, w: np.exp(1j * np.outer(s, w)))
        return vals, float(np.sum(np.abs(f)))

    return _settle(evaluate, float(np.max(np.abs(sigma))) + reach, cutoff, cfg)


def _series_transform(moments, sigma):
    """G(σ) = i Σ μ_2n / σ^(2n+1), valid outside the support of the line density."""
    powers = (1.0 / sigma)[:, None] ** (2 * np.arange(len(moments)) + 1)[None, :]
    terms = powers * moments[None, :]
    return 1j * terms.sum(axis=1), np.abs(terms[:, -1])


def _far_kernel(moments, t, rho):
    """(1/8π²ρ) Σ μ_2n [(ρ + t)^-(2n+1) + (ρ - t)^-(2n+1)], away from the light cone."""
    t = np.abs(t)
    plain = rho >= 0.5 * t
    safe = np.where(plain, rho, 1.0)
    total = np.zeros_like(rho)
    last = np.zeros_like(rho)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n, mu in enumerate(moments):
            k = 2 * n + 1
            direct = ((rho + t) ** -k + (rho - t) ** -k) / safe
            # expanded numerator, free of the cancellation at small ρ
            numer = sum(math.comb(k, j) * rho ** (k - 1 - j) * t ** j for j in range(0, k, 2))
            expanded = 2.0 * numer / (rho ** 2 - t ** 2) ** k
            last = mu * np.where(plain, direct, expanded)
            total = total + last
    scale = 1.0 / (8.0 * np.pi ** 2)
    return scale * total, scale * np.abs(last)


def _direct_kernel(left, right, t, rho, cutoff, cfg):
    """K = (1/4π²) ∫ dω ω F(ω) j0(ωρ) e^{iωt} near the origin."""
    rows = np.stack([t, rho], axis=1)

    def evaluate(omega, weights):
        f = weights * MEASURE * 4.0 * np.pi * omega * _profile_product(left, right, omega)
        vals = _blocked(rows, omega, f, lambda r, w: np.exp(1j * np.outer(r[:, 0], w))
                        * _reduced_bessel(0, np.outer(r[:, 1], w)))
        return vals, float(np.sum(np.abs(f)))

    return _settle(evaluate, float(np.max(np.abs(t) + rho)) + _mollifier_reach(left)
                   + _mollifier_reach(right), cutoff, cfg)


def smeared_kernel(left, right, xi, cfg=None):
    """
    Scalar two-point function of two mollifier atoms at offset ξ = c_right - c_left

    Away from the smeared light cone the moment series of the mollifiers is
    summed in closed form; near it the kernel is
        (G(t + ρ) - G(t - ρ)) / (8iπ²ρ)
    with G the half-line transform of the profile product, and close to the
    origin the shell integral is taken directly.

    Returns:
        (values, abs_errors) for the rows of ``xi``
    """
    cfg = cfg or default_config()
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    t, rho = xi[:, 0], np.linalg.norm(xi[:, 1:], axis=1)
    moments, reach = _moment_series(left, right)
    cutoff = cfg.cutoff or cfg.cutoff_factor / max(_mollifier_width(left), _mollifier_width(right))
    values = np.zeros(len(xi), dtype=complex)
    errors = np.zeros(len(xi))

    far = np.abs(rho - np.abs(t)) >= 2.0 * reach
    if far.any():
        values[far], errors[far] = _far_kernel(moments, t[far], rho[far])

    origin = ~far & (rho < 0.5 * reach)
    if origin.any():
        values[origin], errors[origin] = _direct_kernel(left, right, t[origin], rho[origin], cutoff, cfg)

    cone = ~far & ~origin
    if cone.any():
        sigma = np.concatenate([t[cone] + rho[cone], t[cone] - rho[cone]])
        g = np.zeros(len(sigma), dtype=complex)
        g_err = np.zeros(len(sigma))
        outside = np.abs(sigma) >= 2.0 * reach
        if outside.any():
            g[outside], g_err[outside] = _series_transform(moments, sigma[outside])
        if (~outside).any():
            g[~outside], g_err[~outside] = _half_line_transform(left, right, sigma[~outside], cutoff, cfg)
        half = cone.sum()
        denom = 8j * np.pi ** 2 * rho[cone]
        values[cone] = (g[:half] - g[half:]) / denom
        errors[cone] = (g_err[:half] + g_err[half:]) / np.abs(denom)
    return values, errors


def _cells(base, axes, lo, hi, reach, points):
    """
    Gauss nodes x on the box [lo, hi] for offsets ξ = base + axes @ x, split
    until every cell is small against its distance to the light cone.
    """
    t, w = np.polynomial.legendre.leggauss(points)
    scale = np.abs(axes[0]) + np.linalg.norm(axes[1:], axis=0)
    stack = [(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))]
    nodes, weights = [], []
    while stack:
        a, b = stack.pop()
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        centre = base + axes @ mid
        extent = float(np.sum(half * scale))
        gap = abs(float(np.linalg.norm(centre[1:])) - abs(centre[0]))
        if extent <= 0.5 * max(reach, gap - extent):
            grid = np.meshgrid(*[mid[i] + half[i] * t for i in range(len(mid))], indexing="ij")
            wgrid = np.meshgrid(*[half[i] * w for i in range(len(mid))], indexing="ij")
            nodes.append(np.stack([g.ravel() for g in grid], axis=1))
            weights.append(np.prod([g.ravel() for g in wgrid], axis=0))
            continue
        i = int(np.argmax(half * scale))
        upper, lower = b.copy(), a.copy()
        upper[i] = lower[i] = mid[i]
        stack += [(a, upper), (lower, b)]
    return np.concatenate(nodes), np.concatenate(weights)


def _line_offsets(m, n, reach, points):
    """Nodes ξ = c_n(u') - c_m(u) with weights for ∫∫ du du' over both segments."""
    base = n.c1.as_array() - m.c1.as_array()
    dm, dn = -m.d, -n.d
    ratio = float(dn @ dm) / float(dm @ dm)
    if np.linalg.norm(dn - ratio * dm) <= 1e-12 * np.linalg.norm(dn):
        # parallel: ξ depends on s = ratio u' - u only, with a trapezoid density
        lo, hi = min(0.0, ratio), max(0.0, ratio)
        cuts = np.unique([lo - 1.0, lo, hi - 1.0, hi])
        xs, ws = [], []
        for a, b in zip(cuts[:-1], cuts[1:]):
            s, w = _cells(base, dm[:, None], [a], [b], reach, points)
            s = s[:, 0]
            density = np.clip(np.minimum(s + 1.0, hi) - np.maximum(s, lo), 0.0, None) / abs(ratio)
            xs.append(base + np.outer(s, dm))
            ws.append(w * density)
        return np.concatenate(xs), np.concatenate(ws)
    axes = np.stack([-dm, dn], axis=1)
    x, w = _cells(base, axes, [0.0, 0.0], [1.0, 1.0], reach, points)
    return base + x @ axes.T, w


def _line_pairing(m, n, cfg):
    """W(m, n) = (J_m η J_n) ∫∫ du du' K(c_n(u') - c_m(u)) for two pair densities."""
    factor = float(np.sum(m.current * np.array(METRIC) * n.current))
    if factor == 0.0:
        return PairingValue(0j, 0.0, "position")
    _, reach = _moment_series(m.mollifier, n.mollifier)
    xi, w = _line_offsets(m, n, reach, cfg.line_points)
    values, errors = smeared_kernel(m.mollifier, n.mollifier, xi, cfg)
    return PairingValue(complex(factor * np.sum(w * values)),
                        float(abs(factor) * np.sum(np.abs(w) * errors)), "position")


def _line_panel(line, other):
    """Panel length along a pair density paired against ``other``'s atoms."""
    width = _side_width(other)
    return 0.5 * (line.mollifier.a + (width if np.isfinite(width) else 0.0))


@lru_cache(maxsize=4096)
def _wightman_part(u, v, cfg):
    red_v, red_u = _reduction(v), _reduction(u)
    if cfg.use_on_shell_reduction and red_v is not None:
        div = divergence(u)
        if div.is_zero:
            return PairingValue(0j, 0.0, "momentum")
        res = _momentum_integral(_atoms(div, cfg), _atoms(red_v.potential, cfg), cfg)
        return res.scaled(red_v.weight)
    if cfg.use_on_shell_reduction and red_u is not None:
        res = _wightman_part(v, u, cfg)
        return PairingValue(np.conj(res.value), res.abs_error, res.method)
    if isinstance(u, PairDensity) and isinstance(v, PairDensity):
        return _line_pairing(u, v, cfg)
    left = None if isinstance(u, PairDensity) else _atoms(u, cfg)
    right = None if isinstance(v, PairDensity) else _atoms(v, cfg, lower=True)
    if left is None:
        left = _atoms(u, cfg, panel=_line_panel(u, right))
    if right is None:
        right = _atoms(v, cfg, lower=True, panel=_line_panel(v, left))
    return _momentum_integral(left, right, cfg)


def wightman(u, v, cfg=None):
    """Two-point pairing W(u, v), bilinear over the leaves of both arguments."""
    cfg = cfg or default_config()
    total = None
    for cu, pu in _parts(u):
        for cv, pv in _parts(v):
            part = _wightman_part(pu, pv, cfg).scaled(cu * cv)
            total = part if total is None else total + part
    return total if total is not None else PairingValue(0j, 0.0, "momentum")


def wightman_scalar(s, t, cfg=None):
    """Scalar two-point pairing ∫ dμ conj(ŝ) t̂."""
    cfg = cfg or default_config()
    return _momentum_integral(_atoms(s, cfg), _atoms(t, cfg), cfg)


def pairing(u, v, kernel="wightman", cfg=None, route="radial"):
    """
    Pair two vector test functions through the massless two-point function

    Args:
        u: VectorField or PairDensity
        v: VectorField or PairDensity
        kernel: 'wightman' for W(u, v), 'pauli_jordan' for <u, Δv> = Im W(u, v)
        cfg: QuadratureConfig
        route: 'radial' (closed-form angular integral) or 'angular' (direct shell quadrature)

    Returns:
        PairingValue

    Raises:
        QuadratureError: if the requested tolerance is not reached
    """
    cfg = cfg or default_config()
    if route == "angular":
        w = angular_pairing(u, v, cfg)
    elif route == "radial":
        w = wightman(u, v, cfg)
    else:
        raise TestFunctionError(f"unknown pairing route {route!r}")
    if kernel == "wightman":
        return w
    if kernel == "pauli_jordan":
        return PairingValue(w.value.imag, w.abs_error, w.method)
    raise TestFunctionError(f"unknown kernel {kernel!r}")


def _sphere(order):
    ct, wt = np.polynomial.legendre.leggauss(order)
    n_phi = 2 * order
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    st = np.sqrt(1.0 - ct ** 2)
    dirs = np.stack([np.outer(st, np.cos(phi)).ravel(), np.outer(st, np.sin(phi)).ravel(),
                     np.repeat(ct, n_phi)], axis=1)
    return dirs, np.repeat(wt, n_phi) * (2.0 * np.pi / n_phi)


def angular_pairing(u, v, cfg=None, max_doublings=4):
    """
    W(u, v) by direct quadrature over the shell: Gauss-Legendre in |p| times a
    product rule on the sphere whose order doubles until the value settles.
    """
    cfg = cfg or default_config()
    left, right = _atoms(u, cfg), _atoms(v, cfg)
    cutoff = _auto_cutoff(left, right, cfg)
    radii, rw = _grid(left, right, cutoff, cfg)
    eta = np.array(METRIC)
    order = max(2, cfg.angular_order // 2)
    previous = None
    for _ in range(max_doublings + 1):
        dirs, dw = _sphere(order)
        total = 0j
        for r, w in zip(radii, rw):
            p = np.concatenate([np.full((len(dirs), 1), r), r * dirs], axis=1)
            uu, vv = ft_eval(u, p), ft_eval(v, p)
            total += w * MEASURE * r * np.sum(dw * np.sum(np.conj(uu) * eta * vv, axis=1))
        if previous is not None and abs(total - previous) <= cfg.rtol * max(abs(total), 1.0):
            return PairingValue(total, abs(total - previous), "momentum")
        previous = total
        order *= 2
    raise QuadratureError("angular pairing did not settle", estimate=total,
                          abs_error=abs(total - previous))


def lattice_pairing(u, v, box=20.0, cutoff=40.0, chunk=200_000):
    """
    Finite-volume mode sum (1/L³) Σ_{k≠0} conj(û) η v̂ / (2|k|) over the
    periodic lattice k = 2πn/L with |k| <= cutoff.

    Dropping k = 0 from the singular 1/|k| sum shifts it by ζ f(0) / (4π L²),
    with ζ the regularised cubic lattice sum Σ' 1/|n| and f(0) the
    integrand numerator at p = 0; the shift is removed.
    """
    step = 2.0 * np.pi / box
    n_max = int(cutoff / step)
    axis = np.arange(-n_max, n_max + 1) * step
    eta = np.array(METRIC)
    total, inner = 0j, 0j
    ky, kz = np.meshgrid(axis, axis, indexing="ij")
    plane = np.stack([ky.ravel(), kz.ravel()], axis=1)
    for kx in axis:
        ks = np.concatenate([np.full((len(plane), 1), kx), plane], axis=1)
        norms = np.linalg.norm(ks, axis=1)
        keep = (norms > 0.0) & (norms <= cutoff)
        ks, norms = ks[keep], norms[keep]
        for start in range(0, len(ks), chunk):
            k, w = ks[start:start + chunk], norms[start:start + chunk]
            p = np.concatenate([w[:, None], k], axis=1)
            terms = np.sum(np.conj(ft_eval(u, p)) * eta * ft_eval(v, p), axis=1) / (2.0 * w)
            total += terms.sum()
            inner += terms[w <= 0.8 * cutoff].sum()
    vol = box ** 3
    zero = np.zeros((1, 4))
    origin = complex(np.sum(np.conj(ft_eval(u, zero)) * eta * ft_eval(v, zero)))
    correction = -CUBIC_LATTICE_SUM * origin / (4.0 * np.pi * box ** 2)
    return PairingValue(total / vol + correction, abs(total - inner) / vol, "lattice")


class KirchhoffWave:
    """
    Solution of the wave equation with data S = χ(|x - c|), ∂_t S = 0 at t = c0.

    For radial data the spherical mean gives
        S(t, ρ) = [(ρ + t) χ(ρ + t) + (ρ - t) χ(|ρ - t|)] / (2ρ)
    with the limit χ(|t|) + |t| χ'(|t|) at ρ = 0.
    """

    def __init__(self, profile, c):
        self.profile = profile
        self.c = FourVector.of(c)

    def radial(self, t, rho):
        t, rho = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(rho, dtype=float))
        chi = self.profile
        tiny = rho < 1e-7 * max(chi.outer_radius, 1.0)
        safe = np.where(tiny, 1.0, rho)
        plus, minus = rho + t, rho - t
        full = (plus * chi(np.abs(plus)) + minus * chi(np.abs(minus))) / (2.0 * safe)
        at = np.abs(t)
        centre = chi(at) + at * chi.derivatives(at, 2)[1]
        return np.where(tiny, centre, full)

    def __call__(self, t, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        rho = np.linalg.norm(x - self.c.spatial, axis=1)
        return self.radial(np.asarray(t, dtype=float) - self.c.x0, rho)

    def mean_form(self, t, rho, h=1e-5):
        """∂_t [t M(ρ, |t|)] by central differences of the spherical mean."""
        def tm(tt):
            return tt * spherical_mean(self.profile, rho, np.abs(tt))
        return (tm(np.asarray(t) + h) - tm(np.asarray(t) - h)) / (2.0 * h)


def kirchhoff_wave(chi, c):
    """Evaluator (t, x) -> S for the plateau Cauchy data about c."""
    if not isinstance(chi, PlateauProfile):
        raise TestFunctionError("Kirchhoff solution needs a radial plateau profile")
    return KirchhoffWave(chi, c)


def _lemma_margin(center, c, r, eps):
    dt = abs(center.x0 - c.x0)
    dx = float(np.linalg.norm(center.spatial - c.spatial))
    return (r - eps) - dt - dx, dx - (r + 2.0 * eps) - dt


def check_mollifier_hypothesis(m, probe_params):
    """
    Each endpoint must sit in O(c) or be spacelike to the closed cone, with a
    margin of at least twice the mollifier support radius 2a.
    """
    c, r, eps = probe_params["c"], probe_params["r"], probe_params["eps"]
    reach = 2.0 * m.mollifier.a
    for end in (m.c1, m.c2):
        inner, outer = _lemma_margin(end, c, r, eps)
        if not (inner > 2.0 * reach or outer > 2.0 * reach):
            raise GeometryError(f"mollifier of radius {m.mollifier.a} is not small enough around "
                                f"{end.text} for the probe at {c.text}")


def _smeared_solution(m, wave, center, tau=None):
    moll = m.mollifier
    t, tw = gauss_panels(moll.time.knots, moll.order + 2)
    r, rw = gauss_panels(moll.space._edges(), moll.order + 4)
    ct, cw = np.polynomial.legendre.leggauss(24)
    axis = center.spatial - wave.c.spatial
    dist = float(np.linalg.norm(axis))
    rho = np.sqrt(np.maximum(dist ** 2 + r[:, None] ** 2 + 2.0 * dist * r[:, None] * ct[None, :], 0.0))
    times = center.x0 + t - wave.c.x0
    if tau is None:
        vals = wave.radial(times[:, None, None], rho[None, :, :])
    else:
        s, sw = gauss_panels(tau.knots, tau.order + 2)
        shifted = times[:, None, None, None] - s[None, None, None, :]
        vals = np.sum(wave.radial(shifted, rho[None, :, :, None]) * (tau(s) * sw), axis=-1)
    weight = (moll.time(t) * tw)[:, None, None] * (moll.space(r) * r ** 2 * rw)[None, :, None] \
        * (2.0 * np.pi * cw)[None, None, :]
    return float(np.sum(vals * weight))


def _phi_lemma(m, leaf, tau_explicit):
    p = leaf.param_dict
    check_mollifier_hypothesis(m, p)
    chi = PlateauProfile(p["r"], p["eps"], p["k"])
    wave = kirchhoff_wave(chi, p["c"])
    tau = None
    if tau_explicit:
        tau = BumpProfile(p["k"], 0.0, p["eps"])
    value = m.q * (_smeared_solution(m, wave, m.c1, tau) - _smeared_solution(m, wave, m.c2, tau))
    return value


def phi_m(m, g, route="momentum", cfg=None, tau_explicit=False):
    """
    Pair-creating functional φ_m(g) = 2 <m, Δg>

    Args:
        m: PairDensity
        g: Divergence-free VectorField
        route: 'momentum' (shell integral) or 'lemma' (Kirchhoff solution
            smeared against q(ϑ(c1 - x) - ϑ(c2 - x)), flux probes only)
        cfg: QuadratureConfig
        tau_explicit: In the lemma route, also integrate over the time profile

    Returns:
        PairingValue with a real value

    Raises:
        TestFunctionError: lemma route on something other than flux probes
        GeometryError: lemma route with a mollifier that is too wide
    """
    cfg = cfg or default_config()
    if route == "momentum":
        res = pairing(m, g, "pauli_jordan", cfg)
        return PairingValue(2.0 * res.value, 2.0 * res.abs_error, "momentum")
    if route != "lemma":
        raise TestFunctionError(f"unknown route {route!r}")
    if not isinstance(g, VectorField) or not g.terms or \
            any(TAG_FLUX_PROBE not in leaf.tags for _, leaf in g.terms):
        raise TestFunctionError("the lemma route needs a flux probe")
    value = sum(c * _phi_lemma(m, leaf, tau_explicit) for c, leaf in g.terms)
    return PairingValue(value, 1e-12 * max(1.0, abs(m.q)), "kirchhoff")


def _kirchhoff_kernel(m, w):
    """-∫ dr r [τ(w0 - r) - τ(w0 + r)] M_b(|w|, r) for offsets w = c(u) - x."""
    moll = m.mollifier
    a = moll.a
    w0 = w[:, 0]
    rho = np.linalg.norm(w[:, 1:], axis=1)
    lo = np.maximum(np.maximum(np.abs(w0), rho) - a, 0.0)
    hi = np.minimum(np.abs(w0), rho) + a
    hi = np.maximum(hi, lo)
    t, tw = gauss_panels(np.linspace(-1.0, 1.0, 2 * moll.order + 1), 8)
    half = 0.5 * (hi - lo)
    r = lo[:, None] + half[:, None] * (t[None, :] + 1.0)
    means = spherical_mean(moll.space, rho[:, None], r)
    diff = moll.time(w0[:, None] - r) - moll.time(w0[:, None] + r)
    return -np.sum(r * diff * means * tw[None, :], axis=1) * half


def _mass_shell_kirchhoff(m, x):
    u, w = _line_nodes(m, QuadratureConfig(line_points=16))
    offsets = m.point(u) - x.as_array()
    kern = _kirchhoff_kernel(m, offsets)
    line = float(np.sum(kern * w))
    return np.array(METRIC) * m.current * line


def _cone_nodes(m, x, cfg):
    """Line nodes on the panels whose smeared ϑ can meet the light cone of x."""
    edges = _line_edges(m)
    lo, hi = edges[:-1], edges[1:]
    centre = m.point(0.5 * (lo + hi)) - x.as_array()
    half = 0.5 * np.outer(hi - lo, -m.d)
    extent = np.abs(half[:, 0]) + np.linalg.norm(half[:, 1:], axis=1)
    gap = np.abs(np.linalg.norm(centre[:, 1:], axis=1) - np.abs(centre[:, 0])) - extent
    keep = gap <= _mollifier_reach(m.mollifier)
    if not keep.any():
        return np.zeros(0), np.zeros(0)
    t, w = np.polynomial.legendre.leggauss(cfg.line_points)
    mid, width = 0.5 * (lo[keep] + hi[keep]), 0.5 * (hi[keep] - lo[keep])
    return (mid[:, None] + width[:, None] * t[None, :]).ravel(), (width[:, None] * w[None, :]).ravel()


def _shell_line(m, x, cfg, deriv=(0, 0, 0, 0)):
    """-2 Im ∫ du W(∂^deriv δ_x, ϑ_{c(u)}), the line factor shared by every component."""
    u, w = _cone_nodes(m, x, cfg)
    if not len(u):
        return 0.0, 0.0
    moll = m.mollifier
    right = [_Atom(wt, -1, tuple(pt), moll.time, moll.space, (0, 0, 0, 0), 0)
             for pt, wt in zip(m.point(u), w)]
    coeff = -1.0 if any(deriv) else 1.0
    res = _momentum_integral(_point_atoms(x, -1, deriv, coeff), right, cfg)
    return -2.0 * res.value.imag, 2.0 * res.abs_error


def mass_shell_restriction(m, x, route="momentum", cfg=None, h=None):
    """
    Classical field of a pair density: m̲_μ(x) = ∫ dy m_μ(y) Δ(y - x)

    Args:
        m: PairDensity
        x: Evaluation point
        route: 'momentum' (derivatives analytic under the integral) or
            'kirchhoff' (retarded minus advanced shell integral, derivatives
            by central differences of step h)
        cfg: QuadratureConfig

    Returns:
        Tuple (m̲ with lower index as a length-4 array, F antisymmetric 4x4,
        abs_error)
    """
    cfg = cfg or default_config()
    x = FourVector.of(x)
    if route == "kirchhoff":
        base = _mass_shell_kirchhoff(m, x)
        step = h or 0.25 * m.mollifier.a
        grad = np.zeros((4, 4))
        for nu in range(4):
            e = np.zeros(4)
            e[nu] = step
            grad[nu] = (_mass_shell_kirchhoff(m, x + e) - _mass_shell_kirchhoff(m, x - e)) / (2 * step)
        return base, grad - grad.T, 0.0
    if route != "momentum":
        raise TestFunctionError(f"unknown route {route!r}")
    lowered = np.array(METRIC) * m.current
    line, err = _shell_line(m, x, cfg)
    grad = np.zeros((4, 4))
    for nu in range(4):
        deriv = [0, 0, 0, 0]
        deriv[nu] = 1
        d_line, d_err = _shell_line(m, x, cfg, tuple(deriv))
        grad[nu] = lowered * d_line
        err += d_err
    return lowered * line, grad - grad.T, err * float(np.max(np.abs(lowered)))
