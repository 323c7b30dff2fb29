"""Compactly supported B-spline profiles with closed-form Fourier transforms.

Time profiles are one-dimensional with û(w) = ∫ u(t) e^{iwt} dt. Radial
profiles are functions of |x| in three dimensions whose transforms are
reduced to one-dimensional expressions through the even extension:
if E(k) is the 1D transform of the even extension then the 3D transform
is -(2π/k) E'(k).
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BSpline

from utils.config import DEFAULT_ORDER, TestFunctionError

logger = logging.getLogger(__name__)

# below this value of k * (outer radius) radial transforms use their moment series
SERIES_SWITCH = 0.05


def _fmt(value):
    return repr(float(value))


def gauss_panels(edges, n):
    """
    Composite Gauss-Legendre rule

    Args:
        edges: Increasing panel boundaries
        n: Nodes per panel

    Returns:
        Tuple (nodes, weights) flattened over panels
    """
    x, w = leggauss(n)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def _sinc(x):
    return np.sinc(x / np.pi)


def _sinc_prime(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(np.abs(x) < 1e-4, 1.0, x)
    exact = (safe * np.cos(safe) - np.sin(safe)) / safe ** 2
    return np.where(np.abs(x) < 1e-4, -x / 3.0 + x ** 3 / 30.0, exact)


def sinc_power(k, half_width, order):
    """1D transform of a centred unit-mass B-spline of the given order."""
    return _sinc(np.asarray(k, dtype=float) * half_width / order) ** order


def sinc_power_prime(k, half_width, order):
    x = np.asarray(k, dtype=float) * half_width / order
    return _sinc(x) ** (order - 1) * _sinc_prime(x) * half_width


def _check_order(order):
    if int(order) != order or order < 2:
        raise TestFunctionError(f"smoothness order must be an integer >= 2, got {order}")


@dataclass(frozen=True)
class BumpProfile:
    """
    Centred cardinal B-spline of order k on [center - width, center + width],
    normalised to unit integral.
    """

    order: int = DEFAULT_ORDER
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        _check_order(self.order)
        if not self.width > 0:
            raise TestFunctionError(f"bump width must be positive, got {self.width}")
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "width", float(self.width))

    @cached_property
    def _splines(self):
        knots = np.linspace(self.center - self.width, self.center + self.width, self.order + 1)
        base = BSpline.basis_element(knots, extrapolate=False)
        return [base] + [base.derivative(n) for n in range(1, self.order)]

    @cached_property
    def _antiderivative(self):
        return self._splines[0].antiderivative()

    @property
    def scale(self):
        return self.order / (2.0 * self.width)

    @property
    def support(self):
        return self.center - self.width, self.center + self.width

    @property
    def half_width(self):
        return self.width

    @property
    def knots(self):
        return np.linspace(self.center - self.width, self.center + self.width, self.order + 1)

    def __call__(self, t, n=0):
        """Value of the n-th derivative at t (zero outside the support)."""
        t = np.asarray(t, dtype=float)
        if n >= self.order:
            return np.zeros_like(t)
        return np.nan_to_num(self._splines[n](t), nan=0.0) * self.scale

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        inside = np.clip(t, lo, hi)
        val = (np.nan_to_num(self._antiderivative(inside), nan=0.0)
               - self._antiderivative(lo)) * self.scale
        return np.where(t >= hi, 1.0, np.where(t <= lo, 0.0, val))

    def fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        return sinc_power(omega, self.width, self.order) * np.exp(1j * omega * self.center)

    @property
    def text(self):
        return f"bump(k={self.order}, c={_fmt(self.center)}, w={_fmt(self.width)})"


@dataclass(frozen=True)
class DeltaProfile:
    """Dirac delta at t = 0; only its transform is available."""

    def __call__(self, t, n=0):
        raise TestFunctionError("a delta profile has no pointwise values")

    def fourier(self, omega):
        return np.ones_like(np.asarray(omega, dtype=float), dtype=complex)

    support = (0.0, 0.0)
    half_width = 0.0
    text = "delta()"


class RadialProfile:
    """Radial function of |x| in three dimensions."""

    order = DEFAULT_ORDER

    def derivatives(self, rho, count=4):
        raise NotImplementedError

    def _edges(self):
        raise NotImplementedError

    @property
    def outer_radius(self):
        return float(self._edges()[-1])

    @property
    def feature_width(self):
        """Smallest length scale, used to size momentum cutoffs."""
        raise NotImplementedError

    def __call__(self, rho):
        return self.derivatives(rho, 1)[0]

    def moment(self, n):
        """4π ∫ f(ρ) ρ^(n+2) dρ."""
        return self._moments[n]

    @cached_property
    def _moments(self):
        nodes, weights = gauss_panels(self._edges(), self.order + 8)
        vals = self(nodes)
        return {n: 4.0 * np.pi * float(np.sum(weights * vals * nodes ** (n + 2))) for n in (0, 2, 4)}

    def _series(self, k):
        return self.moment(0) - k ** 2 * self.moment(2) / 6.0 + k ** 4 * self.moment(4) / 120.0

    def _closed(self, k):
        raise NotImplementedError

    def fourier(self, k):
        """3D Fourier transform as a function of |k| (real valued)."""
        k = np.abs(np.asarray(k, dtype=float))
        small = k * self.outer_radius < SERIES_SWITCH
        safe = np.where(small, 1.0, k)
        return np.where(small, self._series(k), self._closed(safe))

    def fourier_quadrature(self, k, nodes_per_panel=48):
        """Reference transform 4π ∫ f ρ² j0(kρ) dρ by Gauss-Legendre panels."""
        k = np.atleast_1d(np.abs(np.asarray(k, dtype=float)))
        edges = self._edges()
        fine = np.unique(np.concatenate([np.linspace(a, b, 9) for a, b in zip(edges[:-1], edges[1:])]))
        nodes, weights = gauss_panels(fine, nodes_per_panel)
        vals = self(nodes) * nodes ** 2
        return 4.0 * np.pi * np.array([np.sum(weights * vals * _sinc(kk * nodes)) for kk in k])


@dataclass(frozen=True, eq=True)
class PlateauProfile(RadialProfile):
    """Equal to 1 for ρ <= r, 0 for ρ >= r + eps, B-spline ramp in between."""

    r: float
    eps: float
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        _check_order(self.order)
        if not (self.r > 0 and self.eps > 0):
            raise TestFunctionError(f"plateau needs r > 0 and eps > 0, got r={self.r}, eps={self.eps}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "order", int(self.order))

    @cached_property
    def ramp(self):
        return BumpProfile(self.order, self.r + 0.5 * self.eps, 0.5 * self.eps)

    def derivatives(self, rho, count=4):
        rho = np.asarray(rho, dtype=float)
        out = [1.0 - self.ramp.cdf(rho)]
        out += [-self.ramp(rho, n) for n in range(count - 1)]
        return out[:count]

    def _edges(self):
        return np.concatenate([[0.0], self.ramp.knots])

    @property
    def feature_width(self):
        return 0.5 * self.eps

    def _closed(self, k):
        h = 0.5 * self.eps
        rm = self.r + h
        beta = sinc_power(k, h, self.order)
        dbeta = sinc_power_prime(k, h, self.order)
        s, c = np.sin(k * rm), np.cos(k * rm)
        de = 2.0 * (dbeta * s / k + beta * (rm * c / k - s / k ** 2))
        return -2.0 * np.pi / k * de

    @property
    def text(self):
        return f"plateau(r={_fmt(self.r)}, eps={_fmt(self.eps)}, k={self.order})"


@dataclass(frozen=True, eq=True)
class RadialBump(RadialProfile):
    """Radial B-spline bump of radius a with unit integral over R^3."""

    a: float
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        _check_order(self.order)
        if not self.a > 0:
            raise TestFunctionError(f"radial bump radius must be positive, got {self.a}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "order", int(self.order))

    @cached_property
    def base(self):
        return BumpProfile(self.order, 0.0, self.a)

    @cached_property
    def norm(self):
        nodes, weights = gauss_panels(self._edges(), self.order + 8)
        return 1.0 / (4.0 * np.pi * float(np.sum(weights * self.base(nodes) * nodes ** 2)))

    def derivatives(self, rho, count=4):
        rho = np.asarray(rho, dtype=float)
        return [self.norm * self.base(rho, n) for n in range(count)]

    def _edges(self):
        knots = self.base.knots
        return np.concatenate([[0.0], knots[knots > 0.0]])

    @property
    def feature_width(self):
        return self.a

    def _closed(self, k):
        return -2.0 * np.pi / k * self.norm * sinc_power_prime(k, self.a, self.order)

    @property
    def text(self):
        return f"rbump(a={_fmt(self.a)}, k={self.order})"


@dataclass(frozen=True)
class PointProfile(RadialProfile):
    """Spatial Dirac delta at the origin; only its transform is available."""

    def derivatives(self, rho, count=4):
        raise TestFunctionError("a point profile has no pointwise values")

    def _edges(self):
        return np.array([0.0, 0.0])

    @property
    def feature_width(self):
        return np.inf

    def fourier(self, k):
        return np.ones_like(np.asarray(k, dtype=float))

    text = "point()"


@dataclass(frozen=True)
class Mollifier:
    """Product density ϑ(x) = τ_a(x0) b_a(|x|): non-negative with unit integral."""

    a: float
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        _check_order(self.order)
        if not self.a > 0:
            raise TestFunctionError(f"mollifier radius must be positive, got {self.a}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "order", int(self.order))

    @cached_property
    def time(self):
        return BumpProfile(self.order, 0.0, self.a)

    @cached_property
    def space(self):
        return RadialBump(self.a, self.order)

    @property
    def support_radius(self):
        """Euclidean 4-radius enclosing the support."""
        return float(np.sqrt(2.0) * self.a)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.time(x[..., 0]) * self.space(np.linalg.norm(x[..., 1:], axis=-1))

    def fourier(self, p):
        p = np.asarray(p, dtype=float)
        return self.time.fourier(p[..., 0]) * self.space.fourier(np.linalg.norm(p[..., 1:], axis=-1))

    @property
    def text(self):
        return f"mollifier(a={_fmt(self.a)}, k={self.order})"


def build_profile(params):
    """
    Build a profile from a record

    Args:
        params: Mapping with 'kind' in {bump, plateau, rbump, mollifier} and
            the parameters of that kind

    Returns:
        BumpProfile, PlateauProfile, RadialBump or Mollifier
    """
    params = dict(params)
    kind = params.pop("kind", None)
    order = int(params.pop("k", params.pop("order", DEFAULT_ORDER)))
    try:
        if kind == "bump":
            return BumpProfile(order, float(params.get("center", 0.0)),
                               float(params.get("width", params.get("half_width", 1.0))))
        if kind == "plateau":
            return PlateauProfile(float(params["r"]), float(params["eps"]), order)
        if kind == "rbump":
            return RadialBump(float(params.get("a", params.get("radius"))), order)
        if kind == "mollifier":
            return Mollifier(float(params.get("a", params.get("radius"))), order)
    except (KeyError, TypeError) as e:
        raise TestFunctionError(f"incomplete {kind} profile record: {e}") from e
    raise TestFunctionError(f"unknown profile kind: {kind!r}")


def profile_record(profile):
    """Inverse of build_profile."""
    if isinstance(profile, BumpProfile):
        return {"kind": "bump", "k": profile.order, "center": profile.center, "width": profile.width}
    if isinstance(profile, PlateauProfile):
        return {"kind": "plateau", "k": profile.order, "r": profile.r, "eps": profile.eps}
    if isinstance(profile, RadialBump):
        return {"kind": "rbump", "k": profile.order, "a": profile.a}
    if isinstance(profile, Mollifier):
        return {"kind": "mollifier", "k": profile.order, "a": profile.a}
    raise TestFunctionError(f"profile {profile!r} has no record form")


def _first_moment_table(profile):
    edges = profile._edges()
    n = profile.order + 4
    nodes, weights = gauss_panels(edges, n)
    pieces = (weights * nodes * profile(nodes)).reshape(len(edges) - 1, n).sum(axis=1)
    return edges, np.concatenate([[0.0], np.cumsum(pieces)]), n


def first_moment(profile, sigma):
    """
    ∫_0^σ s f(s) ds, exact for the piecewise-polynomial profiles

    Args:
        profile: RadialProfile
        sigma: Upper limits (array, >= 0)
    """
    sigma = np.asarray(sigma, dtype=float)
    edges, cumulative, n = _first_moment_table(profile)
    capped = np.clip(sigma, 0.0, edges[-1])
    idx = np.clip(np.searchsorted(edges, capped, side="right") - 1, 0, len(edges) - 2)
    left = edges[idx]
    x, w = leggauss(n)
    half = 0.5 * (capped - left)
    nodes = left[..., None] + half[..., None] * (x + 1.0)
    partial = np.sum(w * nodes * profile(nodes), axis=-1) * half
    return cumulative[idx] + partial


def spherical_mean(profile, rho, s):
    """
    Mean of a radial profile over the sphere of radius s whose centre lies
    at distance rho from the profile centre:

        (1 / (2 rho s)) ∫_{|rho - s|}^{rho + s} σ f(σ) dσ
    """
    rho, s = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(s, dtype=float))
    tiny = 1e-9 * max(profile.outer_radius, 1.0)
    degenerate = (rho < tiny) | (s < tiny)
    safe = np.where(degenerate, 1.0, rho * s)
    full = (first_moment(profile, rho + s) - first_moment(profile, np.abs(rho - s))) / (2.0 * safe)
    return np.where(degenerate, profile(np.where(rho < tiny, s, rho)), full)
