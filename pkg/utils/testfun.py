"""Parametric test functions: scalar atoms, vector fields, two-forms, densities.

Every scalar function is a finite linear combination of atoms

    ∂_t^n0 T(x0 - c0) * Δ^lap ∂^β R(|x - c|)

with T a time profile and R a radial profile. Vector fields carry
contravariant components, two-forms carry their upper-index components
with antisymmetry built in. Labels compare by their canonical text, so
two constructions that print alike are the same label.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from utils.config import GeometryError, PHASE_SERIES_THRESHOLD, TestFunctionError
from utils.geometry import (BallProduct, FourVector, SegmentTube, minkowski_interval,
                            poincare_apply, transform_region, union)
from utils.profiles import (BumpProfile, DeltaProfile, Mollifier, PlateauProfile, PointProfile,
                            RadialBump, gauss_panels, spherical_mean)

logger = logging.getLogger(__name__)

RHO_FLOOR = 1e-9
METRIC = (1.0, -1.0, -1.0, -1.0)
TAG_DIVERGENCE_FREE = "divergence_free"
TAG_FLUX_PROBE = "flux_probe"
TAG_CURRENT_PROBE = "current_probe"
TAG_GRADIENT = "gradient"


def _fmt(value):
    return repr(float(value))


def _points(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(1, 4) if x.ndim == 1 else x


def radial_partials(derivs, rho, unit, idx):
    """
    Cartesian partial derivatives of a radial function

    Args:
        derivs: Radial derivatives [f, f', f'', f'''] broadcastable with rho
        rho: Distances from the centre
        unit: Unit vectors (..., 3)
        idx: Tuple of spatial axes (length 0 to 3)

    Returns:
        Array of ∂_idx f(|x|)
    """
    order = len(idx)
    if order == 0:
        return derivs[0]
    tiny = rho < RHO_FLOOR
    safe = np.where(tiny, 1.0, rho)
    n = np.where(tiny[..., None], 0.0, unit)
    if order == 1:
        return derivs[1] * n[..., idx[0]]
    if order == 2:
        i, j = idx
        a = derivs[2] - derivs[1] / safe
        b = np.where(tiny, derivs[2], derivs[1] / safe)
        return a * n[..., i] * n[..., j] + b * (i == j)
    if order == 3:
        i, j, k = idx
        e = (derivs[2] - derivs[1] / safe) / safe
        c = derivs[3] - 3.0 * derivs[2] / safe + 3.0 * derivs[1] / safe ** 2
        sym = (i == j) * n[..., k] + (i == k) * n[..., j] + (j == k) * n[..., i]
        return c * n[..., i] * n[..., j] * n[..., k] + e * sym
    raise TestFunctionError(f"spatial derivatives of order {order} are not supported")


def _laplacian_radial(derivs, rho):
    tiny = rho < RHO_FLOOR
    safe = np.where(tiny, 1.0, rho)
    g0 = np.where(tiny, 3.0 * derivs[2], derivs[2] + 2.0 * derivs[1] / safe)
    g1 = np.where(tiny, 0.0, derivs[3] + 2.0 * derivs[2] / safe - 2.0 * derivs[1] / safe ** 2)
    return [g0, g1]


def _spatial_index(deriv):
    return tuple(axis for axis in range(3) for _ in range(deriv[axis + 1]))


@dataclass(frozen=True)
class ScalarAtom:
    """Differentiated product of a time profile and a radial profile about ``center``."""

    center: FourVector
    time: object
    space: object
    deriv: tuple = (0, 0, 0, 0)
    lap: int = 0

    def __post_init__(self):
        object.__setattr__(self, "center", FourVector.of(self.center))
        deriv = tuple(int(v) for v in self.deriv)
        if len(deriv) != 4 or min(deriv) < 0:
            raise TestFunctionError(f"bad derivative multi-index {self.deriv}")
        object.__setattr__(self, "deriv", deriv)
        spatial = sum(deriv[1:])
        if self.lap not in (0, 1) or spatial > (1 if self.lap else 3):
            raise TestFunctionError("derivative beyond the closed-form family "
                                    f"(lap={self.lap}, spatial order {spatial})")

    @property
    def text(self):
        d = " ".join(str(v) for v in self.deriv)
        return (f"atom(c={self.center.text}, t={self.time.text}, s={self.space.text}, "
                f"d={d}, lap={self.lap})")

    def differentiated(self, mu):
        deriv = list(self.deriv)
        deriv[mu] += 1
        return ScalarAtom(self.center, self.time, self.space, tuple(deriv), self.lap)

    def evaluate(self, x):
        x = _points(x)
        tv = self.time(x[:, 0] - self.center.x0, self.deriv[0])
        rel = x[:, 1:] - self.center.spatial
        rho = np.linalg.norm(rel, axis=1)
        unit = rel / np.where(rho < RHO_FLOOR, 1.0, rho)[:, None]
        idx = _spatial_index(self.deriv)
        derivs = self.space.derivatives(rho, 4)
        if self.lap:
            derivs = _laplacian_radial(derivs, rho)
        return tv * radial_partials(derivs, rho, unit, idx)

    def fourier(self, p):
        p = _points(p)
        omega, kvec = p[:, 0], p[:, 1:]
        k = np.linalg.norm(kvec, axis=1)
        c = self.center
        out = (self.time.fourier(omega) * np.exp(1j * omega * c.x0)
               * self.space.fourier(k) * np.exp(-1j * kvec @ c.spatial))
        out = out * (-1j * omega) ** self.deriv[0]
        for axis in range(3):
            out = out * (1j * kvec[:, axis]) ** self.deriv[axis + 1]
        return out * (-k ** 2) ** self.lap

    @property
    def region(self):
        lo, hi = self.time.support
        return BallProduct(self.center.x0 + lo, self.center.x0 + hi, self.center.x,
                           self.space.outer_radius)

    def transformed(self, P):
        """Image under a rotation plus translation as a list of (coeff, atom)."""
        rot = P.rotation
        if rot is None:
            raise TestFunctionError("only rotations and translations keep atoms in closed form")
        center = poincare_apply(P, self.center)
        idx = _spatial_index(self.deriv)
        out = {}
        for image in product(range(3), repeat=len(idx)):
            coeff = float(np.prod([rot[i, j] for i, j in zip(image, idx)])) if idx else 1.0
            if coeff == 0.0:
                continue
            deriv = [self.deriv[0], 0, 0, 0]
            for axis in image:
                deriv[axis + 1] += 1
            atom = ScalarAtom(center, self.time, self.space, tuple(deriv), self.lap)
            out[atom] = out.get(atom, 0.0) + coeff
        return [(coeff, atom) for atom, coeff in out.items()]


def _canonical(pairs):
    merged = {}
    for coeff, item in pairs:
        merged[item] = merged.get(item, 0.0) + float(coeff)
    return tuple(sorted(((c, item) for item, c in merged.items() if c != 0.0),
                        key=lambda ci: ci[1].text))


@dataclass(frozen=True)
class ScalarField:
    """Finite linear combination of scalar atoms in canonical order."""

    terms: tuple = ()

    @classmethod
    def combine(cls, pairs):
        return cls(_canonical(pairs))

    @classmethod
    def atom(cls, atom, coeff=1.0):
        return cls.combine([(coeff, atom)])

    @property
    def is_zero(self):
        return not self.terms

    @property
    def text(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{_fmt(c)}*{a.text}" for c, a in self.terms)

    def __add__(self, other):
        return ScalarField.combine(self.terms + other.terms)

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, factor):
        return ScalarField.combine([(factor * c, a) for c, a in self.terms])

    def __rmul__(self, factor):
        return self.scaled(factor)

    def derivative(self, mu):
        return ScalarField.combine([(c, a.differentiated(mu)) for c, a in self.terms])

    def evaluate(self, x):
        x = _points(x)
        out = np.zeros(len(x))
        for c, a in self.terms:
            out = out + c * a.evaluate(x)
        return out

    def fourier(self, p):
        p = _points(p)
        out = np.zeros(len(p), dtype=complex)
        for c, a in self.terms:
            out = out + c * a.fourier(p)
        return out

    @property
    def support(self):
        if not self.terms:
            return None
        return union(*(a.region for _, a in self.terms))

    def transformed(self, P):
        return ScalarField.combine([(c * k, atom) for c, a in self.terms
                                    for k, atom in a.transformed(P)])

    def __call__(self, x):
        return self.evaluate(x)


ZERO_SCALAR = ScalarField()


def scalar_bump(c, width, radius=None, order=6, coeff=1.0):
    """Product bump: time B-spline of half-width ``width`` times a radial bump."""
    atom = ScalarAtom(FourVector.of(c), BumpProfile(order, 0.0, width),
                      RadialBump(radius if radius is not None else width, order))
    return ScalarField.atom(atom, coeff)


@dataclass(frozen=True)
class TwoForm:
    """Antisymmetric tensor field; stores the components f^{μν} with μ < ν."""

    upper: tuple = ()

    @classmethod
    def from_components(cls, comps):
        """
        Build from a mapping {(mu, nu): ScalarField}

        Both orderings may be given; they must be negatives of each other.

        Raises:
            TestFunctionError: on a diagonal entry or a non-antisymmetric pair
        """
        store = {}
        for (mu, nu), value in comps.items():
            if mu == nu:
                if not value.is_zero:
                    raise TestFunctionError("two-form has a nonzero diagonal component")
                continue
            key, val = ((mu, nu), value) if mu < nu else ((nu, mu), -value)
            if key in store and store[key] != val:
                raise TestFunctionError(f"two-form component {key} is not antisymmetric")
            store[key] = val
        return cls(tuple(sorted((k, v) for k, v in store.items() if not v.is_zero)))

    def component(self, mu, nu):
        if mu == nu:
            return ZERO_SCALAR
        lookup = dict(self.upper)
        if mu < nu:
            return lookup.get((mu, nu), ZERO_SCALAR)
        return -lookup.get((nu, mu), ZERO_SCALAR)

    @property
    def is_zero(self):
        return not self.upper

    @property
    def text(self):
        inner = ", ".join(f"{mu}{nu}={v.text}" for (mu, nu), v in self.upper)
        return f"twoform({inner})"

    @property
    def support(self):
        parts = [v.support for _, v in self.upper]
        return union(*parts) if parts else None

    def scaled(self, factor):
        return TwoForm(tuple((k, v.scaled(factor)) for k, v in self.upper))

    def __add__(self, other):
        comps = {}
        for k, v in self.upper + other.upper:
            comps[k] = comps[k] + v if k in comps else v
        return TwoForm.from_components(comps)

    def evaluate(self, x):
        out = np.zeros((len(_points(x)), 4, 4))
        for (mu, nu), v in self.upper:
            val = v.evaluate(x)
            out[:, mu, nu] = val
            out[:, nu, mu] = -val
        return out

    def transformed(self, P):
        rot = P.rotation
        if rot is None:
            raise TestFunctionError("two-forms transform in closed form only under rotations")
        lam = np.eye(4)
        lam[1:, 1:] = rot
        moved = {(mu, nu): self.component(mu, nu).transformed(P) for mu in range(4) for nu in range(4)}
        comps = {}
        for mu in range(4):
            for nu in range(mu + 1, 4):
                acc = ZERO_SCALAR
                for a in range(4):
                    for b in range(4):
                        w = lam[mu, a] * lam[nu, b]
                        if w != 0.0 and not moved[(a, b)].is_zero:
                            acc = acc + moved[(a, b)].scaled(w)
                comps[(mu, nu)] = acc
        return TwoForm.from_components(comps)


def curl(h):
    """Raised exterior derivative (dh)^{μν} of a vector field h given by contravariant components."""
    comps = {}
    for mu in range(4):
        for nu in range(mu + 1, 4):
            # (dh)_{μν} = ∂_μ h_ν - ∂_ν h_μ, then raise both indices
            lower = (h.component(nu).derivative(mu).scaled(METRIC[nu])
                     - h.component(mu).derivative(nu).scaled(METRIC[mu]))
            comps[(mu, nu)] = lower.scaled(METRIC[mu] * METRIC[nu])
    return TwoForm.from_components(comps)


@dataclass(frozen=True)
class OnShellReduction:
    """On the mass shell v̂ is fixed by a scalar: W(u, v) = weight * W_scalar(δu, potential)."""

    weight: float
    potential: ScalarField


@dataclass(frozen=True)
class VectorLeaf:
    """Named vector test function; equality is by kind and canonical text."""

    kind: str
    text: str
    components: tuple = field(compare=False, repr=False)
    tags: frozenset = field(compare=False, default=frozenset())
    region: object = field(compare=False, default=None, repr=False)
    provenance: object = field(compare=False, default=None, repr=False)
    reduction: object = field(compare=False, default=None, repr=False)
    params: tuple = field(compare=False, default=())
    evaluator: object = field(compare=False, default=None, repr=False)

    @property
    def param_dict(self):
        return dict(self.params)


@dataclass(frozen=True)
class VectorField:
    """Linear combination of vector leaves; components are contravariant."""

    terms: tuple = ()

    @classmethod
    def combine(cls, pairs):
        return cls(_canonical(pairs))

    @classmethod
    def leaf(cls, leaf, coeff=1.0):
        return cls.combine([(coeff, leaf)])

    @property
    def is_zero(self):
        return not self.terms

    @property
    def text(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{_fmt(c)}*{leaf.text}" for c, leaf in self.terms)

    @cached_property
    def components(self):
        if any(leaf.components is None for _, leaf in self.terms):
            raise TestFunctionError("boosted fields have no closed-form components")
        comps = []
        for mu in range(4):
            comps.append(ScalarField.combine([(c * k, a) for c, leaf in self.terms
                                              for k, a in leaf.components[mu].terms]))
        return tuple(comps)

    def component(self, mu):
        return self.components[mu]

    @property
    def tags(self):
        if not self.terms:
            return frozenset({TAG_DIVERGENCE_FREE})
        if len(self.terms) == 1:
            return self.terms[0][1].tags
        common = frozenset.intersection(*(leaf.tags for _, leaf in self.terms))
        return common & {TAG_DIVERGENCE_FREE}

    @property
    def support(self):
        if not self.terms:
            return None
        return union(*(leaf.region for _, leaf in self.terms))

    @property
    def provenance(self):
        """Two-form f with δf equal to this field, when every leaf carries one."""
        if not self.terms or any(leaf.provenance is None for _, leaf in self.terms):
            return None
        total = TwoForm()
        for c, leaf in self.terms:
            total = total + leaf.provenance.scaled(c)
        return total

    @property
    def leading_coefficient(self):
        return self.terms[0][0] if self.terms else 1.0

    def __add__(self, other):
        return VectorField.combine(self.terms + other.terms)

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, factor):
        return VectorField.combine([(factor * c, leaf) for c, leaf in self.terms])

    def __rmul__(self, factor):
        return self.scaled(factor)

    def evaluate(self, x):
        x = _points(x)
        out = np.zeros((len(x), 4))
        for c, leaf in self.terms:
            if leaf.evaluator is not None:
                out = out + c * leaf.evaluator(x)
            else:
                out = out + c * np.stack([comp.evaluate(x) for comp in leaf.components], axis=1)
        return out

    def fourier(self, p):
        p = _points(p)
        return np.stack([comp.fourier(p) for comp in self.components], axis=1)

    def transformed(self, P):
        return VectorField.combine([(c, transform_leaf(leaf, P)) for c, leaf in self.terms])


ZERO_VECTOR = VectorField()


def _vector_leaf_from_components(comps, name=None):
    comps = tuple(comps)
    inner = ", ".join(f"{mu}={c.text}" for mu, c in enumerate(comps) if not c.is_zero)
    parts = [c.support for c in comps if not c.is_zero]
    return VectorLeaf("vector", name or f"vector({inner})", comps,
                      region=union(*parts) if parts else None)


def vector_field(comps):
    """Generic vector field from four scalar components (contravariant)."""
    comps = tuple(comps)
    if len(comps) != 4 or not all(isinstance(c, ScalarField) for c in comps):
        raise TestFunctionError("a vector field needs four scalar components")
    if all(c.is_zero for c in comps):
        return ZERO_VECTOR
    return VectorField.leaf(_vector_leaf_from_components(comps))


def time_field(s):
    """Vector field pointing along time with component s."""
    return vector_field((s, ZERO_SCALAR, ZERO_SCALAR, ZERO_SCALAR))


def divergence(u, trust_tags=True):
    """
    Symbolic divergence ∂_μ u^μ

    Args:
        u: VectorField or PairDensity
        trust_tags: Return zero for fields tagged divergence free

    Returns:
        ScalarField

    Raises:
        TestFunctionError: on a scalar or two-form argument
    """
    if isinstance(u, PairDensity):
        return u.divergence
    if not isinstance(u, VectorField):
        raise TestFunctionError(f"divergence needs a vector argument, got {type(u).__name__}")
    if trust_tags and TAG_DIVERGENCE_FREE in u.tags:
        return ZERO_SCALAR
    total = ZERO_SCALAR
    for mu in range(4):
        total = total + u.component(mu).derivative(mu)
    return total


def delta_two_form(f):
    """
    Codifferential (δf)^μ = -2 ∂_ν f^{μν}

    Args:
        f: TwoForm

    Returns:
        Divergence-free VectorField remembering f as provenance
    """
    if not isinstance(f, TwoForm):
        raise TestFunctionError(f"delta_two_form needs a two-form, got {type(f).__name__}")
    if f.is_zero:
        return ZERO_VECTOR
    comps = []
    for mu in range(4):
        acc = ZERO_SCALAR
        for nu in range(4):
            acc = acc + f.component(mu, nu).derivative(nu)
        comps.append(acc.scaled(-2.0))
    leaf = VectorLeaf("delta", f"delta({f.text})", tuple(comps),
                      tags=frozenset({TAG_DIVERGENCE_FREE}), region=f.support, provenance=f)
    return VectorField.leaf(leaf)


def current_probe(h):
    """
    δdh for an arbitrary vector field h

    On shell its transform is 2 p (p·ĥ), so pairings reduce to the scalar δh.
    """
    f = curl(h)
    if f.is_zero:
        return ZERO_VECTOR
    g = delta_two_form(f)
    leaf = VectorLeaf("currentprobe", f"currentprobe({h.text})", g.components,
                      tags=frozenset({TAG_DIVERGENCE_FREE, TAG_CURRENT_PROBE}),
                      region=h.support, provenance=f,
                      reduction=OnShellReduction(2.0, divergence(h, trust_tags=False)),
                      params=(("h", h),))
    return VectorField.leaf(leaf)


def gradient(s):
    """Gradient field u^μ = ∂^μ s; on shell û = -i p ŝ."""
    if s.is_zero:
        return ZERO_VECTOR
    comps = tuple(s.derivative(mu).scaled(METRIC[mu]) for mu in range(4))
    leaf = VectorLeaf("gradient", f"gradient({s.text})", comps, tags=frozenset({TAG_GRADIENT}),
                      region=s.support, reduction=OnShellReduction(-1.0, s),
                      params=(("s", s),))
    return VectorField.leaf(leaf)


def _flux_potential(c, r, eps, k):
    atom = ScalarAtom(c, BumpProfile(k, 0.0, eps), PlateauProfile(r, eps, k))
    return ScalarField.atom(atom)


def flux_probe(c, r, eps, k=6):
    """
    Gauss-law flux probe about c

    h^μ = δ^{μ0} τ(x0 - c0) χ(|x - c|) with τ a bump of half-width eps and χ
    the plateau equal to 1 up to r with a ramp of width eps. The probe is
    g = (τ Δχ, τ' ∇χ) in covariant components, which is -δdh/2.

    Args:
        c: Centre four-vector
        r: Plateau radius
        eps: Ramp width and time half-width
        k: B-spline order

    Returns:
        Tuple (h, g) of VectorFields

    Raises:
        GeometryError: unless r > 2 eps > 0
    """
    c = FourVector.of(c)
    if not (eps > 0 and r > 2.0 * eps):
        raise GeometryError(f"flux probe needs r > 2 eps > 0, got r={r}, eps={eps}")
    s = _flux_potential(c, r, eps, k)
    h = time_field(s)
    tau, chi = BumpProfile(k, 0.0, eps), PlateauProfile(r, eps, k)
    comps = [ScalarField.atom(ScalarAtom(c, tau, chi, (0, 0, 0, 0), 1))]
    for axis in range(3):
        deriv = [1, 0, 0, 0]
        deriv[axis + 1] = 1
        comps.append(ScalarField.atom(ScalarAtom(c, tau, chi, tuple(deriv)), -1.0))
    text = f"fluxprobe(c={c.text}, r={_fmt(r)}, eps={_fmt(eps)}, k={int(k)})"
    region = BallProduct(c.x0 - eps, c.x0 + eps, c.x, r + eps, inner_radius=r)
    leaf = VectorLeaf("fluxprobe", text, tuple(comps),
                      tags=frozenset({TAG_DIVERGENCE_FREE, TAG_FLUX_PROBE, TAG_CURRENT_PROBE}),
                      region=region, provenance=curl(h).scaled(-0.5),
                      reduction=OnShellReduction(-1.0, s.derivative(0)),
                      params=(("c", c), ("r", float(r)), ("eps", float(eps)), ("k", int(k))))
    return h, VectorField.leaf(leaf)


def transform_leaf(leaf, P):
    """
    Image of a vector leaf under a Poincaré map, g_P(x) = L g(P^{-1} x)

    Rotations and translations rebuild the leaf inside its family; any
    other Lorentz part gives a leaf that only evaluates pointwise.
    """
    if not P.is_family_preserving:
        return _boosted_leaf(leaf, P)
    p = leaf.param_dict
    if leaf.kind == "fluxprobe":
        return flux_probe(poincare_apply(P, p["c"]), p["r"], p["eps"], p["k"])[1].terms[0][1]
    if leaf.kind == "delta":
        return delta_two_form(leaf.provenance.transformed(P)).terms[0][1]
    if leaf.kind == "currentprobe":
        return current_probe(p["h"].transformed(P)).terms[0][1]
    if leaf.kind == "gradient":
        return gradient(p["s"].transformed(P)).terms[0][1]
    if leaf.kind == "vector":
        lam = np.eye(4)
        lam[1:, 1:] = P.rotation
        moved = [comp.transformed(P) for comp in leaf.components]
        comps = []
        for mu in range(4):
            acc = ZERO_SCALAR
            for nu in range(4):
                if lam[mu, nu] != 0.0 and not moved[nu].is_zero:
                    acc = acc + moved[nu].scaled(lam[mu, nu])
            comps.append(acc)
        return _vector_leaf_from_components(comps)
    raise TestFunctionError(f"cannot transform a {leaf.kind} leaf")


def _boosted_leaf(leaf, P):
    inverse = P.inverse()
    lam = P.matrix
    inner = VectorField.leaf(leaf)

    def evaluate(x):
        y = _points(x) @ inverse.matrix.T + inverse.y.as_array()
        return inner.evaluate(y) @ lam.T

    return VectorLeaf("boosted", f"boosted({P.text}, {leaf.text})", None,
                      tags=leaf.tags & {TAG_DIVERGENCE_FREE},
                      region=transform_region(P, leaf.region), evaluator=evaluate)


def _series_segment(z):
    # (e^{iz} - 1)/(iz) as a six-term Taylor series
    out = np.zeros_like(z, dtype=complex)
    term = np.ones_like(z, dtype=complex)
    fact = 1.0
    for n in range(6):
        fact *= n + 1
        out = out + term / fact
        term = term * 1j * z
    return out


def segment_factor(z):
    """(e^{iz} - 1)/(iz) with the removable singularity at z = 0 resolved."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < PHASE_SERIES_THRESHOLD
    safe = np.where(small, 1.0, z)
    return np.where(small, _series_segment(z), (np.exp(1j * safe) - 1.0) / (1j * safe))


@dataclass(frozen=True)
class PairDensity:
    """
    Line density m^μ(x) = q (c2 - c1)^μ ∫_0^1 du ϑ(u c2 + (1 - u) c1 - x)

    The direction is fixed so that the divergence is q (ϑ(c1 - x) - ϑ(c2 - x)):
    charge q sits at c1 and -q at c2.
    """

    q: float
    c1: FourVector
    c2: FourVector
    mollifier: Mollifier

    def __post_init__(self):
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "c1", FourVector.of(self.c1))
        object.__setattr__(self, "c2", FourVector.of(self.c2))
        _, kind = minkowski_interval(self.c1, self.c2)
        if kind != "spacelike":
            raise GeometryError(f"pair density endpoints must be spacelike separated, got {kind}")

    @property
    def d(self):
        return self.c1.as_array() - self.c2.as_array()

    @property
    def text(self):
        return (f"pair(q={_fmt(self.q)}, c1={self.c1.text}, c2={self.c2.text}, "
                f"moll={_fmt(self.mollifier.a)}, k={self.mollifier.order})")

    @property
    def support(self):
        return SegmentTube(self.c1, self.c2, self.mollifier.support_radius)

    @property
    def current(self):
        """Constant vector q (c2 - c1) carried along the segment."""
        return -self.q * self.d

    @property
    def integral(self):
        return self.current

    def point(self, u):
        """Point u c2 + (1 - u) c1 of the segment."""
        return self.c1.as_array() - np.multiply.outer(u, self.d)

    @property
    def divergence(self):
        moll = self.mollifier
        return ScalarField.combine([
            (self.q, ScalarAtom(self.c1, moll.time, moll.space)),
            (-self.q, ScalarAtom(self.c2, moll.time, moll.space)),
        ])

    def canonical(self):
        """Split into (coefficient, unit-charge density with ordered endpoints)."""
        if self.q == 0.0:
            return 0.0, None
        if tuple(self.c1.as_array()) <= tuple(self.c2.as_array()):
            return self.q, PairDensity(1.0, self.c1, self.c2, self.mollifier)
        return -self.q, PairDensity(1.0, self.c2, self.c1, self.mollifier)

    def scaled(self, factor):
        return PairDensity(self.q * factor, self.c1, self.c2, self.mollifier)

    def _u_window(self, x):
        a = self.mollifier.a
        d = self.d
        alpha = self.c1.x0 - x[:, 0]
        if d[0] != 0.0:
            t1, t2 = (alpha - a) / d[0], (alpha + a) / d[0]
            t_lo, t_hi = np.minimum(t1, t2), np.maximum(t1, t2)
        else:
            inside = np.abs(alpha) <= a
            t_lo, t_hi = np.where(inside, 0.0, 1.0), np.where(inside, 1.0, 0.0)
        beta = self.c1.spatial - x[:, 1:]
        dd = float(d[1:] @ d[1:])
        bd = beta @ d[1:]
        disc = bd ** 2 - dd * (np.sum(beta ** 2, axis=1) - a ** 2)
        root = np.sqrt(np.maximum(disc, 0.0))
        s_lo = np.where(disc >= 0.0, (bd - root) / dd, 1.0)
        s_hi = np.where(disc >= 0.0, (bd + root) / dd, 0.0)
        lo = np.maximum.reduce([np.zeros_like(t_lo), t_lo, s_lo])
        hi = np.minimum.reduce([np.ones_like(t_hi), t_hi, s_hi])
        return lo, np.maximum(hi, lo)

    def evaluate(self, x, panels=4, nodes=16):
        """Pointwise values (N, 4) by Gauss-Legendre in u over the window meeting supp ϑ."""
        x = _points(x)
        lo, hi = self._u_window(x)
        t, w = gauss_panels(np.linspace(-1.0, 1.0, panels + 1), nodes)
        half = 0.5 * (hi - lo)
        u = lo[:, None] + half[:, None] * (t[None, :] + 1.0)
        pts = self.point(u)
        vals = self.mollifier(pts - x[:, None, :])
        line = np.sum(vals * w[None, :], axis=1) * half
        return line[:, None] * self.current[None, :]

    def fourier(self, p):
        """Closed-form transform q (c2 - c1)^μ ϑ̂(p) (e^{ip·c1} - e^{ip·c2}) / (i p·(c1 - c2)).

        At p = 0 this is the current q (c2 - c1), with the divergence
        carrying +q at c1 and -q at c2.
        """
        p = _points(p)
        eta = np.array(METRIC)
        z = (p * eta) @ self.d
        phase = np.exp(1j * (p * eta) @ self.c2.as_array())
        scalar = self.mollifier.fourier(p) * phase * segment_factor(z)
        return scalar[:, None] * self.current[None, :]

    def transformed(self, P):
        if not P.is_family_preserving:
            raise GeometryError("pair densities follow only rotations and translations")
        return PairDensity(self.q, poincare_apply(P, self.c1), poincare_apply(P, self.c2),
                           self.mollifier)


def pair_density(q, c1, c2, mollifier):
    """Pair density of charge q from c2 to c1 smeared by ``mollifier``."""
    if not isinstance(mollifier, Mollifier):
        mollifier = Mollifier(float(mollifier))
    return PairDensity(q, c1, c2, mollifier)


@dataclass(frozen=True)
class ChargeDensity:
    """Static charge ρ(x) = q ϑ(c - x)."""

    q: float
    c: FourVector
    mollifier: Mollifier

    def __post_init__(self):
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "c", FourVector.of(self.c))

    @property
    def text(self):
        return (f"charge(q={_fmt(self.q)}, c={self.c.text}, moll={_fmt(self.mollifier.a)}, "
                f"k={self.mollifier.order})")

    @property
    def scalar(self):
        return ScalarField.atom(ScalarAtom(self.c, self.mollifier.time, self.mollifier.space), self.q)

    def canonical(self):
        return self.q, ChargeDensity(1.0, self.c, self.mollifier)

    def evaluate(self, x):
        return self.scalar.evaluate(x)

    def transformed(self, P):
        if not P.is_family_preserving:
            raise GeometryError("charge densities follow only rotations and translations")
        return ChargeDensity(self.q, poincare_apply(P, self.c), self.mollifier)


def ft_eval(u, p):
    """
    Fourier transform û(p) = ∫ u(x) e^{ip·x} d⁴x

    Args:
        u: ScalarField, VectorField or PairDensity
        p: Momentum four-vector or (N, 4) array

    Returns:
        Complex array of shape (N,) for scalars and (N, 4) for vectors

    Raises:
        TestFunctionError: for nodes without a closed-form transform
    """
    if isinstance(p, FourVector):
        p = p.as_array()
    if isinstance(u, (ScalarField, PairDensity)):
        return u.fourier(p)
    if isinstance(u, VectorField):
        return u.fourier(p)
    raise TestFunctionError(f"no closed-form transform for {type(u).__name__}")


def _sphere_rule(n_theta=12, n_phi=24):
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    st = np.sqrt(1.0 - ct ** 2)
    dirs = np.stack([np.outer(st, np.cos(phi)).ravel(), np.outer(st, np.sin(phi)).ravel(),
                     np.repeat(ct, n_phi)], axis=1)
    weights = np.repeat(wt, n_phi) * 2.0 * np.pi / n_phi
    return dirs, weights


def convolve_at(s, mollifier, c, method="quadrature"):
    """
    (s∗ϑ)(c) = ∫ s(c + z) ϑ(z) dz

    ``quadrature`` integrates pointwise values of s over the mollifier support;
    ``radial`` uses spherical means and is limited to underived atoms.
    """
    c = FourVector.of(c)
    if method == "radial":
        return sum(coeff * _convolve_atom_radial(atom, mollifier, c) for coeff, atom in s.terms)
    t_nodes, t_w = gauss_panels(mollifier.time.knots, mollifier.order + 2)
    r_nodes, r_w = gauss_panels(mollifier.space._edges(), mollifier.order + 4)
    dirs, d_w = _sphere_rule()
    tau = mollifier.time(t_nodes) * t_w
    radial = mollifier.space(r_nodes) * r_nodes ** 2 * r_w
    spatial = r_nodes[:, None, None] * dirs[None, :, :]
    pts = np.concatenate([
        np.broadcast_to(t_nodes[:, None, None, None], (len(t_nodes), len(r_nodes), len(dirs), 1)),
        np.broadcast_to(spatial[None], (len(t_nodes), len(r_nodes), len(dirs), 3)),
    ], axis=-1).reshape(-1, 4) + c.as_array()
    weights = (tau[:, None, None] * radial[None, :, None] * d_w[None, None, :]).ravel()
    return float(np.sum(s.evaluate(pts) * weights))


def _convolve_atom_radial(atom, mollifier, c):
    if any(atom.deriv) or atom.lap or not isinstance(atom.time, BumpProfile):
        raise TestFunctionError("radial convolution needs an underived product atom")
    a = mollifier.a
    shift = atom.center.x0 - c.x0
    edges = np.concatenate([mollifier.time.knots, atom.time.knots + shift])
    edges = np.unique(np.clip(edges, -a, a))
    t, tw = gauss_panels(edges, mollifier.order + atom.time.order)
    time_part = float(np.sum(atom.time(t - shift) * mollifier.time(t) * tw))
    dist = float(np.linalg.norm(c.spatial - atom.center.spatial))
    r, rw = gauss_panels(mollifier.space._edges(), mollifier.order + 8)
    means = spherical_mean(atom.space, dist, r)
    space_part = float(np.sum(4.0 * np.pi * r ** 2 * mollifier.space(r) * means * rw))
    return time_part * space_part


def build_test_function(record):
    """
    Build a labelled function from a record {kind, ...}

    Kinds: fluxprobe (c, r, eps, k), pair (q, c1, c2, moll, k),
    charge (q, c, moll, k), bump (c, width, radius, k).
    """
    record = dict(record)
    kind = record.get("kind")
    k = int(record.get("k", 6))
    try:
        if kind == "fluxprobe":
            return flux_probe(record["c"], float(record["r"]), float(record["eps"]), k)[1]
        if kind == "pair":
            return pair_density(float(record.get("q", 1.0)), record["c1"], record["c2"],
                                Mollifier(float(record["moll"]), k))
        if kind == "charge":
            return ChargeDensity(float(record.get("q", 1.0)), record["c"],
                                 Mollifier(float(record["moll"]), k))
        if kind == "bump":
            return scalar_bump(record["c"], float(record["width"]),
                               float(record.get("radius", record["width"])), k,
                               float(record.get("coeff", 1.0)))
    except KeyError as e:
        raise TestFunctionError(f"{kind} record is missing {e}") from e
    raise TestFunctionError(f"unknown test function kind {kind!r}")


def test_function_record(obj, name=None):
    """Structured record (name, kind, parameters) for a labelled function."""
    if isinstance(obj, VectorField) and len(obj.terms) == 1 and obj.terms[0][1].kind == "fluxprobe":
        p = obj.terms[0][1].param_dict
        rec = {"kind": "fluxprobe", "c": list(p["c"].as_array()), "r": p["r"], "eps": p["eps"], "k": p["k"]}
    elif isinstance(obj, PairDensity):
        rec = {"kind": "pair", "q": obj.q, "c1": list(obj.c1.as_array()), "c2": list(obj.c2.as_array()),
               "moll": obj.mollifier.a, "k": obj.mollifier.order}
    elif isinstance(obj, ChargeDensity):
        rec = {"kind": "charge", "q": obj.q, "c": list(obj.c.as_array()), "moll": obj.mollifier.a,
               "k": obj.mollifier.order}
    else:
        rec = {"kind": "expression", "text": obj.text}
    rec["name"] = name or rec["kind"]
    return rec


test_function_record.__test__ = False
build_test_function.__test__ = False
