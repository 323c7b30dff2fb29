"""
Builders shared by the scenario kinds: quadrature settings, probe and pair
geometry read from a Scenario, and seeded pools of random words.
"""
import sys
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from utils.algebra import LabelSum, OperatorWord, PsiGenerator, VGenerator, WGenerator
from utils.config import ScenarioError, WorkbenchError
from utils.geometry import FourVector
from utils.kernels import default_config
from utils.profiles import Mollifier
from utils.testfun import ChargeDensity, PairDensity, TwoForm, delta_two_form, flux_probe, scalar_bump

# probe offsets whose supports all overlap, so no two pool probes commute
PROBE_OFFSETS = ((0.0, 0.0, 0.0, 0.0), (0.0, 0.4, 0.0, 0.0), (0.3, 0.0, 0.3, 0.0))
TRIANGLE_OFFSET = (0.0, 2.5, 4.0, 0.0)
FIELD_OFFSETS = ((0.0, 1.0, 1.0, 0.0), (0.2, 2.0, 3.0, 0.5))
FIELD_WIDTH = 0.6
COEFFICIENTS = (-2.0, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0)


def quadrature_config(scenario, **overrides):
    """QuadratureConfig from the scenario's [quadrature] table."""
    base = default_config()
    try:
        return base.with_overrides(**{**scenario.quadrature, **overrides})
    except TypeError as e:
        raise ScenarioError(f"invalid quadrature settings: {e}") from e


def rng_for(scenario):
    return np.random.default_rng(scenario.seed)


def progress(iterable, desc, total=None):
    return tqdm(iterable, desc=desc, total=total, disable=not sys.stderr.isatty())


def vec(values):
    return FourVector.of([float(v) for v in values])


def mollifier(scenario):
    geo = scenario.geometry
    return Mollifier(float(geo["moll"]), int(geo["k"]))


def probe(scenario, center=None):
    """Flux probe g = δdh_c of the scenario geometry."""
    geo = scenario.geometry
    c = vec(geo["c"]) if center is None else FourVector.of(center)
    _, g = flux_probe(c, float(geo["r"]), float(geo["eps"]), int(geo["k"]))
    return g


def pair(scenario, c1=None, c2=None, q=None):
    geo = scenario.geometry
    return PairDensity(float(geo["q"]) if q is None else q,
                       vec(geo["c1"]) if c1 is None else FourVector.of(c1),
                       vec(geo["c2"]) if c2 is None else FourVector.of(c2),
                       mollifier(scenario))


def validated(build, what):
    """Run a builder, reporting invalid geometry as a scenario error."""
    try:
        return build()
    except ScenarioError:
        raise
    except WorkbenchError as e:
        raise ScenarioError(f"invalid {what}: {e}") from e


def generic_field(center, width, order):
    """δf for a two-form with one electric and one magnetic bump component."""
    center = FourVector.of(center)
    shifted = center + FourVector(0.0, (0.3 * width, 0.0, 0.0))
    f = TwoForm.from_components({
        (0, 1): scalar_bump(center, width, width, order),
        (2, 3): scalar_bump(shifted, width, width, order, coeff=0.5),
    })
    return delta_two_form(f)


@dataclass(frozen=True)
class WordPool:
    """
    Letters for random words

    Attributes:
        probes: Single-leaf flux probes with pairwise overlapping supports
        edges: Pair densities of a charge triangle (v1 -> v2 -> v3 -> v1)
        charges: Point charges at the triangle vertices
        fields: Generic divergence-free fields δf near the triangle
    """

    probes: tuple
    edges: tuple
    charges: tuple
    fields: tuple = ()

    @property
    def loop(self):
        """Balanced bridge string W(m12) W(m23) W(m31)."""
        return OperatorWord.of(*(WGenerator(LabelSum.of(m)) for m in self.edges))


def word_pool(scenario):
    geo = scenario.geometry
    c = vec(geo["c"])
    probes = tuple(probe(scenario, c + FourVector.of(off)) for off in PROBE_OFFSETS)
    v1, v2 = vec(geo["c1"]), vec(geo["c2"])
    v3 = v1 + FourVector.of(TRIANGLE_OFFSET)
    moll = mollifier(scenario)
    q = float(geo["q"])
    edges = tuple(PairDensity(q, a, b, moll) for a, b in ((v1, v2), (v2, v3), (v3, v1)))
    charges = tuple(ChargeDensity(q, v, moll) for v in (v1, v2, v3))
    fields = tuple(generic_field(v1 + FourVector.of(off), FIELD_WIDTH, int(geo["k"])) for off in FIELD_OFFSETS)
    return WordPool(probes, edges, charges, fields)


def random_word(rng, pool, max_len=6, bridges=True, matter=True, fields=False):
    """
    Random unnormalized word over the pool

    Args:
        rng: numpy Generator
        pool: WordPool
        max_len: Longest word drawn
        bridges: Allow W letters
        matter: Allow ψ letters
        fields: Draw V letters from the generic fields as well as the probes

    Returns:
        OperatorWord
    """
    kinds = ["V"] + (["W"] if bridges else []) + (["psi"] if matter else [])
    letters = pool.probes + (pool.fields if fields else ())
    factors = []
    for _ in range(int(rng.integers(1, max_len + 1))):
        kind = kinds[int(rng.integers(len(kinds)))]
        coeff = float(rng.choice(COEFFICIENTS))
        if kind == "V":
            factors.append(VGenerator(coeff, letters[int(rng.integers(len(letters)))]))
        elif kind == "W":
            m = pool.edges[int(rng.integers(len(pool.edges)))]
            factors.append(WGenerator(LabelSum.of(m).scaled(coeff)))
        else:
            rho = pool.charges[int(rng.integers(len(pool.charges)))]
            factors.append(PsiGenerator(LabelSum.of(rho).scaled(coeff)))
    return OperatorWord(factors=tuple(factors))


def random_invariant_word(rng, pool, max_len=4, loops=0, fields=False):
    """ψ-free word of field letters with ``loops`` complete bridge triangles spliced in."""
    factors = list(random_word(rng, pool, max_len, bridges=False, matter=False, fields=fields).factors)
    for _ in range(loops):
        scale = float(rng.choice((-1.0, 1.0)))
        for m in pool.edges:
            at = int(rng.integers(len(factors) + 1))
            factors.insert(at, WGenerator(LabelSum.of(m).scaled(scale)))
    return OperatorWord(factors=tuple(factors))


def spacelike_offset(rng, reach, spread=2.0):
    """Random offset placing a second probe spacelike to the first."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    dt = float(rng.uniform(-spread, spread))
    dist = reach + abs(dt) + float(rng.uniform(0.5, spread))
    return FourVector(dt, tuple(dist * direction))
