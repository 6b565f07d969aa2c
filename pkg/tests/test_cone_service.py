import math

import pytest
from hypothesis import given, strategies as st

from services.cone_service import (
    Cone,
    ConeDecomposition,
    enumerate_points,
    fundamental_domain,
    is_simple,
    is_unimodular,
    sectors,
    sign_epsilon,
    subdivide,
    verify_partition,
)
from services.errors import NonSimpleConeError, PreconditionError, UnsupportedFieldError
from services.field_service import QuadField


def test_cone_shape(gaussian, unit_square):
    assert unit_square.rank == 2
    assert unit_square.literal() == "1,0;0,1"
    assert unit_square.to_dict() == {"generators": [[1, 0], [0, 1]]}
    with pytest.raises(PreconditionError):
        Cone.of(gaussian, 1, (0, 1), (1, 1))
    with pytest.raises(PreconditionError):
        Cone.of(gaussian, (0, 0))


def test_unimodular(gaussian, rationals):
    assert is_unimodular(Cone.of(gaussian, 1, (0, 1)))
    assert not is_unimodular(Cone.of(gaussian, 1, (0, 2)))
    assert is_unimodular(Cone.of(gaussian, (1, 2)))
    assert not is_unimodular(Cone.of(gaussian, (2, 2)))
    assert not is_unimodular(Cone.of(rationals, 2))


def test_simplicity_modes(gaussian, rationals, unit_square):
    assert is_simple(unit_square)
    assert is_simple(unit_square, "strict")

    single = Cone.of(gaussian, 1)
    assert is_simple(single)
    assert not is_simple(single, "strict")

    diagonal = Cone.of(gaussian, (1, 1), (1, -1))
    assert is_simple(diagonal)
    assert not is_simple(diagonal, "strict")

    assert is_simple(Cone.of(rationals, 1))
    assert not is_simple(Cone.of(rationals, 1), "strict")

    with pytest.raises(PreconditionError):
        is_simple(unit_square, "loose")


def test_opposite_generators_not_simple(gaussian, sqrt2):
    assert not is_simple(Cone.of(gaussian, 1, -1))
    # sigma_2(1 + sqrt2) < 0 < sigma_2(1)
    assert not is_simple(Cone.of(sqrt2, 1, (1, 1)))
    assert is_simple(Cone.of(sqrt2, 1, (2, 1)))


def test_sectors_of_unit_square(unit_square):
    (lo1, hi1), (lo2, hi2) = sectors(unit_square)
    assert (lo1, hi1) == pytest.approx((-math.pi / 2, 0.0))
    assert (lo2, hi2) == pytest.approx((0.0, math.pi / 2))


def test_sectors_empty_for_non_simple(gaussian):
    assert sectors(Cone.of(gaussian, 1, -1)) is None


def test_sign_epsilon():
    f = QuadField.quadratic(3)
    assert sign_epsilon(Cone.of(f, 1, (2, 1))) == 1
    assert sign_epsilon(Cone.of(f, (0, 1))) == -1
    assert sign_epsilon(Cone.of(f, (-1, 0))) == 1
    assert sign_epsilon(Cone.of(QuadField.quadratic(-1), (0, 1))) == 1
    with pytest.raises(NonSimpleConeError):
        sign_epsilon(Cone.of(QuadField.quadratic(2), 1, (1, 1)))


def test_membership(gaussian, unit_square):
    assert unit_square.coefficients(gaussian.element(2, 3)) == (2, 3)
    assert unit_square.contains(gaussian.element(2, 3))
    assert not unit_square.contains(gaussian.element(0, 3))
    assert not unit_square.contains(gaussian.element(-1, 3))
    diagonal = Cone.of(gaussian, (1, 1))
    assert diagonal.contains(gaussian.element(4, 4))
    assert not diagonal.contains(gaussian.element(4, 3))


def test_enumerate_points(unit_square):
    points = list(enumerate_points(unit_square, 2))
    assert [p.coordinates for p, _ in points] == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert [c for _, c in points] == [(1, 1), (1, 2), (2, 1), (2, 2)]
    with pytest.raises(PreconditionError):
        list(enumerate_points(unit_square, 0))


def test_subdivide_sqrt2(sqrt2):
    cones = subdivide(sqrt2, sqrt2.one(), sqrt2.element(3, 2))
    assert [c.coordinates for c in cones] == [
        [(1, 0)], [(1, 0), (2, 1)], [(2, 1)], [(2, 1), (3, 2)],
    ]
    assert all(is_unimodular(c) and is_simple(c) for c in cones)


def test_fundamental_domains():
    assert len(fundamental_domain(QuadField.rationals()).cones) == 1
    assert len(fundamental_domain(QuadField.quadratic(-1)).cones) == 2
    assert len(fundamental_domain(QuadField.quadratic(-3)).cones) == 2
    assert len(fundamental_domain(QuadField.quadratic(-2)).cones) == 4
    assert len(fundamental_domain(QuadField.quadratic(2)).cones) == 4

    dec = fundamental_domain(QuadField.quadratic(3))
    assert dec.signs == (1, 1, -1, -1, -1, -1)
    assert [c.coordinates[0] for c in dec.cones[2:]] == [(0, 1), (0, 1), (1, 1), (1, 1)]


def test_fundamental_domain_needs_class_number_one():
    with pytest.raises(UnsupportedFieldError):
        fundamental_domain(QuadField.quadratic(-5))


@pytest.mark.parametrize("d", [None, -1, -2, -3, -7, 2, 3, 5, 13])
def test_partition_property(d):
    f = QuadField(d)
    report = verify_partition(fundamental_domain(f), 12)
    assert report.passed, report.to_dict()
    assert report.uncovered == 0
    assert report.multiply_covered == 0
    assert report.counterexample is None


def test_partition_reports_gaps(gaussian):
    dec = ConeDecomposition(gaussian, (Cone.of(gaussian, 1),))
    report = verify_partition(dec, 5)
    assert not report.passed
    assert report.uncovered > 0
    assert report.counterexample_hits == 0


def test_partition_reports_overlaps(gaussian):
    square = Cone.of(gaussian, 1, (0, 1))
    dec = ConeDecomposition(gaussian, (Cone.of(gaussian, 1), square, square))
    report = verify_partition(dec, 5)
    assert not report.passed
    assert report.multiply_covered > 0
    assert report.to_dict()["counterexample_hits"] >= 2


def test_partition_height_checked(gaussian):
    with pytest.raises(PreconditionError):
        verify_partition(fundamental_domain(gaussian), 0)


@given(st.integers(min_value=-40, max_value=40), st.integers(min_value=-40, max_value=40))
def test_gaussian_orbit_hits_one_cone(x, y):
    f = QuadField.quadratic(-1)
    alpha = f.element(x, y)
    if alpha.is_zero():
        return
    dec = fundamental_domain(f)
    hits = sum(cone.contains(alpha * u) for u in (f.one(), f.omega(), -f.one(), -f.omega())
               for cone in dec.cones)
    assert hits == 1
