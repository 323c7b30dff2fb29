import numpy as np
import pytest
from numpy.testing import assert_allclose

from utils.config import GeometryError
from utils.geometry import (BallProduct, FourVector, IDENTITY, PoincareMap, boost, double_cone,
                            minkowski_interval, poincare_apply, regions_spacelike, rotation,
                            transform_region, translation)


@pytest.mark.parametrize("x, y, kind", [
    ((0, 0, 0, 0), (0, 2, 0, 0), "spacelike"),
    ((0, 0, 0, 0), (2, 0, 0, 0), "timelike"),
    ((0, 0, 0, 0), (1, 1, 0, 0), "lightlike"),
])
def test_minkowski_interval_classes(x, y, kind):
    _, got = minkowski_interval(x, y)
    assert got == kind


def test_four_vector_rejects_wrong_length():
    with pytest.raises(GeometryError):
        FourVector.of([1.0, 2.0, 3.0])


def test_double_cone_membership():
    cone = double_cone(FourVector(0.0), 1.0)
    assert cone.contains((0.2, 0.3, 0.0, 0.0))
    assert not cone.contains((0.6, 0.5, 0.0, 0.0))
    closed = double_cone(FourVector(0.0), 1.0, closed=True)
    assert closed.contains((0.5, 0.5, 0.0, 0.0))
    assert not cone.contains((0.5, 0.5, 0.0, 0.0))


def test_double_cone_needs_positive_radius():
    with pytest.raises(GeometryError):
        double_cone(FourVector(0.0), 0.0)


def test_regions_spacelike_for_separated_slabs():
    b1 = BallProduct(-0.1, 0.1, (0.0, 0.0, 0.0), 1.0)
    b2 = BallProduct(-0.1, 0.1, (3.0, 0.0, 0.0), 1.0)
    assert regions_spacelike(b1, b2)
    b3 = BallProduct(2.0, 2.2, (3.0, 0.0, 0.0), 1.0)
    assert not regions_spacelike(b1, b3)


def test_regions_spacelike_is_symmetric(rng):
    for _ in range(20):
        c1, c2 = rng.uniform(-3, 3, 3), rng.uniform(-3, 3, 3)
        t1, t2 = rng.uniform(-1, 1, 2)
        b1 = BallProduct(t1, t1 + 0.2, tuple(c1), 0.5)
        b2 = BallProduct(t2, t2 + 0.2, tuple(c2), 0.5)
        assert regions_spacelike(b1, b2) == regions_spacelike(b2, b1)


def test_rotation_preserves_interval(rng):
    P = rotation((1.0, 2.0, 0.5), 0.7, FourVector(0.3, (1.0, 0.0, -1.0)))
    x, y = FourVector.of(rng.normal(size=4)), FourVector.of(rng.normal(size=4))
    before, _ = minkowski_interval(x, y)
    after, _ = minkowski_interval(poincare_apply(P, x), poincare_apply(P, y))
    assert_allclose(after, before, atol=1e-12)


def test_inverse_and_compose():
    P = boost(0.4, (0.0, 1.0, 0.0), FourVector(1.0, (0.0, 2.0, 0.0)))
    x = FourVector(0.5, (1.0, -1.0, 2.0))
    back = poincare_apply(P.inverse(), poincare_apply(P, x))
    assert_allclose(back.as_array(), x.as_array(), atol=1e-12)
    both = P.compose(P.inverse())
    assert_allclose(both.matrix, IDENTITY.matrix, atol=1e-12)


def test_boost_is_not_family_preserving():
    assert not boost(0.1).is_family_preserving
    assert translation((1.0, 0.0, 0.0, 0.0)).is_family_preserving


def test_non_isometry_rejected():
    mat = np.eye(4)
    mat[1, 1] = 2.0
    with pytest.raises(GeometryError):
        PoincareMap(mat)


def test_transform_region_moves_ball_product():
    ball = BallProduct(0.0, 1.0, (0.0, 0.0, 0.0), 1.0)
    moved = transform_region(translation((1.0, 2.0, 0.0, 0.0)), ball)
    assert moved.t0 == 1.0 and moved.t1 == 2.0
    assert_allclose(moved.center, (2.0, 0.0, 0.0))
