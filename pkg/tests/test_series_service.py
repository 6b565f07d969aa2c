import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from services import series_service
from services.cone_service import Cone
from services.errors import (
    BranchCutError,
    DivergentSpecError,
    NonSimpleConeError,
    PoleError,
    PreconditionError,
    SectorError,
)
from services.field_service import QuadField
from services.series_service import (
    ColumnWeight,
    EvalParams,
    NestedLadder,
    SectorPoint,
    convergence_exponents,
    dedekind_polylog,
    dedekind_zeta_via_cones,
    f0_product,
    f0_sum,
    f_multi,
    fm,
    geometric_tail,
    require_branch_free,
    require_jointly_simple,
)

GAUSSIAN = QuadField.quadratic(-1)


def gaussian_fm_reference(n):
    """f_n(N{1,i}; 0) = zeta(n) beta(n) - zeta(2n)."""
    beta = mpmath.dirichlet(n, [0, 1, 0, -1])
    return float(mpmath.zeta(n) * beta - mpmath.zeta(2 * n))


# Parameters and sector points

@pytest.mark.parametrize("kwargs", [{"bound": 0}, {"tol": 0.0}, {"threads": 0},
                                    {"block_rows": 0}, {"mode": "series"}])
def test_eval_params_validation(kwargs):
    with pytest.raises(PreconditionError):
        EvalParams(**kwargs)


def test_center_point_lies_in_sector(unit_square, sqrt2):
    point = SectorPoint.center([unit_square])
    assert point.t[0] == pytest.approx(complex(math.cos(math.pi / 4), -math.sin(math.pi / 4)))
    assert point.in_sector(unit_square)
    real_cone = Cone.of(sqrt2, 1, (2, 1))
    assert SectorPoint.center([real_cone]).t == (1 + 0j, 1 + 0j)


def test_center_needs_common_sector(gaussian, unit_square):
    with pytest.raises(NonSimpleConeError):
        SectorPoint.center([unit_square, Cone.of(gaussian, -1)])


def test_require_in(unit_square):
    with pytest.raises(PreconditionError):
        SectorPoint((1.0,)).require_in(unit_square)
    with pytest.raises(SectorError):
        SectorPoint((1.0, 1.0)).require_in(unit_square)
    assert SectorPoint.zero(2).is_zero


# f_0

def test_f0_sum_matches_product_over_q(ray):
    result = f0_sum(ray, 1.0)
    assert abs(result.value - 1.0 / (math.e - 1.0)) < 1e-10
    assert abs(f0_product(ray, 1.0) - 1.0 / (math.e - 1.0)) < 1e-14
    assert result.converged and not result.heuristic
    assert result.tail_bound <= 1e-8


def test_f0_sum_matches_product_gaussian(unit_square):
    t = (1 - 1j, 1 + 1j)
    expected = (1.0 / (math.e ** 2 - 1.0)) ** 2
    assert abs(f0_product(unit_square, t) - expected) < 1e-14
    assert abs(f0_sum(unit_square, t).value - expected) < 1e-10


def test_f0_sum_matches_product_real_field(sqrt2):
    cone = Cone.of(sqrt2, 1, (2, 1))
    t = (0.5, 0.5)
    expected = 1.0 / (math.e - 1.0) / (math.e ** 2 - 1.0)
    assert abs(f0_product(cone, t) - expected) < 1e-14
    assert abs(f0_sum(cone, t).value - expected) < 1e-10


def test_f0_sum_refuses_points_outside_sector(unit_square):
    with pytest.raises(SectorError):
        f0_sum(unit_square, (-1.0, -1.0))


def test_f0_product_pole(ray):
    with pytest.raises(PoleError):
        f0_product(ray, 1e-14)


@given(st.floats(min_value=0.3, max_value=3.0))
def test_f0_sum_within_tail_of_product(radius):
    cone = Cone.of(GAUSSIAN, 1, (0, 1))
    point = SectorPoint.center([cone], radius)
    result = f0_sum(cone, point)
    exact = f0_product(cone, point)
    assert abs(result.value - exact) <= result.tail_bound + 1e-12 * max(1.0, abs(exact))


# f_m and polylogarithms

def test_fm_at_sector_point_is_polylog(ray):
    expected = complex(mpmath.polylog(2, mpmath.exp(-0.5)))
    assert abs(fm(ray, 2, 0.5).value - expected) < 1e-9


def test_dedekind_polylog(ray):
    assert abs(dedekind_polylog(ray, 2, (0.5,)) - complex(mpmath.polylog(2, 0.5))) < 1e-9
    assert abs(dedekind_polylog(ray, 2, (1.0,)) - math.pi ** 2 / 6) < 1e-10
    with pytest.raises(BranchCutError):
        dedekind_polylog(ray, 2, (-0.5,))
    with pytest.raises(PreconditionError):
        dedekind_polylog(ray, 2, (0.5, 0.5))


def test_fm_at_zero_gaussian(unit_square):
    result = fm(unit_square, 2, params=EvalParams(bound=512))
    assert abs(result.value - gaussian_fm_reference(2)) < 1e-7
    assert result.heuristic
    assert result.bound == 512
    assert result.value != result.raw_value


def test_fm_refusals(ray, unit_square):
    with pytest.raises(PreconditionError):
        fm(ray, -1)
    with pytest.raises(DivergentSpecError):
        fm(ray, 1)
    with pytest.raises(DivergentSpecError):
        fm(unit_square, 1)


def test_fm_independent_of_threads(unit_square):
    one = fm(unit_square, 2, params=EvalParams(bound=256, threads=1))
    many = fm(unit_square, 2, params=EvalParams(bound=256, threads=4))
    assert one.value == many.value
    assert one.raw_value == many.raw_value
    assert one.tail_bound == many.tail_bound


@given(st.floats(min_value=0.4, max_value=2.0), st.integers(min_value=0, max_value=2),
       st.integers(min_value=3, max_value=24))
def test_tail_bound_is_sound(radius, m, bound):
    cone = Cone.of(GAUSSIAN, 1, (0, 1))
    point = SectorPoint.center([cone], radius)
    small = fm(cone, m, point, A=bound)
    large = fm(cone, m, point, A=4 * bound)
    assert abs(small.value - large.value) <= small.tail_bound + 1e-13 * max(1.0, abs(large.value))


# Dedekind zeta through cones

def test_dedekind_zeta_rationals(rationals):
    assert abs(dedekind_zeta_via_cones(rationals, 3).value - float(mpmath.zeta(3))) < 1e-10


def test_dedekind_zeta_gaussian(gaussian):
    expected = float(mpmath.zeta(2) * mpmath.catalan)
    result = dedekind_zeta_via_cones(gaussian, 2, EvalParams(bound=512))
    assert abs(result.value - expected) < 1e-7


@pytest.mark.slow
def test_dedekind_zeta_sqrt2(sqrt2):
    expected = float(mpmath.zeta(2) * mpmath.dirichlet(2, [0, 1, 0, -1, 0, -1, 0, 1]))
    result = dedekind_zeta_via_cones(sqrt2, 2, EvalParams(bound=1024))
    assert abs(result.value - expected) < 1e-6


def test_dedekind_zeta_needs_m_at_least_two(gaussian):
    with pytest.raises(PreconditionError):
        dedekind_zeta_via_cones(gaussian, 1)


# Nested sums

def test_f_multi_over_q_at_sector_point(ray):
    reference = math.fsum(math.exp(-(a + b)) / (a * (a + b) ** 2)
                          for a in range(1, 80) for b in range(1, 80))
    result = f_multi([ray, ray], [1, 2], 1.0)
    assert abs(result.value - reference) < 1e-12
    assert not result.heuristic


def test_f_multi_gaussian_matches_direct_grid(unit_square):
    bound = 12
    point = SectorPoint.center([unit_square])
    a = np.arange(1, bound + 1, dtype=float)
    A, B, C, D = np.meshgrid(a, a, a, a, indexing='ij')
    terms = (np.exp(-math.sqrt(2.0) * (A + B + C + D))
             / ((A ** 2 + B ** 2) * ((A + C) ** 2 + (B + D) ** 2)))
    result = f_multi([unit_square, unit_square], [1, 1], point, EvalParams(bound=bound))
    assert abs(result.value - math.fsum(terms.ravel())) < 1e-12
    assert result.terms_used == bound ** 4


def test_f_multi_refusals(ray, unit_square):
    with pytest.raises(PreconditionError):
        f_multi([ray, ray], [2])
    with pytest.raises(PreconditionError):
        f_multi([ray, ray], [1, -1])
    with pytest.raises(PreconditionError):
        f_multi([ray, ray], [1, 1.5])
    with pytest.raises(DivergentSpecError):
        f_multi([unit_square, unit_square], [0, 2])


def test_f_multi_single_cone_is_fm(ray):
    assert f_multi([ray], [2], 0.5).value == fm(ray, 2, 0.5).value


def test_convergence_exponents(unit_square):
    assert convergence_exponents([unit_square, unit_square], [2, 4]) == [2, 2]
    with pytest.raises(DivergentSpecError):
        convergence_exponents([unit_square, unit_square], [4, 2])


def test_joint_simplicity(gaussian, unit_square):
    require_jointly_simple([unit_square, unit_square])
    with pytest.raises(NonSimpleConeError):
        require_jointly_simple([unit_square, Cone.of(gaussian, -1)])


def test_branch_cut_precheck(gaussian):
    left = Cone.of(gaussian, (-1, 1), (-1, -1))
    require_branch_free([left], [ColumnWeight((2, 2))])
    with pytest.raises(BranchCutError):
        require_branch_free([left], [ColumnWeight((1.5, 1.5))])


def test_geometric_tail(ray):
    bound = 10
    expected = math.exp(-(bound + 1)) / (1.0 - math.exp(-1.0))
    assert geometric_tail([ray], SectorPoint((1.0,)), bound) == pytest.approx(expected)
    assert geometric_tail([ray], SectorPoint.zero(1), bound) == math.inf


def test_column_weight():
    assert ColumnWeight.norm_power(2, 3).norm_exponent == 3
    assert ColumnWeight((2, 3)).norm_exponent is None
    assert ColumnWeight((1.5, 1.5)).norm_exponent is None
    assert ColumnWeight((2, 3)).mass == 5


# Nesting step and factorisation

@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("t", [0.5, 1.5])
def test_fm_next_is_integral_of_fm(ray, m, t):
    integral = mpmath.quad(lambda u: fm(ray, m, float(u)).value.real, [t, mpmath.inf])
    assert abs(float(integral) - fm(ray, m + 1, t).value.real) < 1e-6


def _sector_cases():
    gaussian = QuadField.quadratic(-1)
    square = Cone.of(gaussian, 1, (0, 1))
    tilted = Cone.of(gaussian, 1, (1, 1))
    sqrt2 = QuadField.quadratic(2)
    positive = Cone.of(sqrt2, 1, (2, 1))
    rationals = QuadField.rationals()
    ray = Cone.of(rationals, 1)
    return [
        [square, square],
        [square, tilted],
        [positive, positive],
        [ray, ray, ray],
    ]


@pytest.mark.parametrize("cones", _sector_cases())
@pytest.mark.parametrize("radius", [0.6, 1.3])
def test_f_multi_without_weights_is_product_of_f0(cones, radius):
    point = SectorPoint.center(cones, radius)
    result = f_multi(cones, [0] * len(cones), point)
    expected = 1 + 0j
    for cone in cones:
        expected *= f0_product(cone, point)
    assert abs(result.value - expected) <= result.tail_bound + 1e-12 * max(1.0, abs(expected))


# Nested ladder

def test_nested_ladder_grid_and_cache(unit_square):
    weights = [ColumnWeight.norm_power(2, 1), ColumnWeight.norm_power(2, 2)]
    ladder = NestedLadder([unit_square, unit_square], weights, SectorPoint.zero(2))
    assert ladder.grid_cells(16) == 33 ** 2
    assert ladder.fits(1024)
    assert not ladder.fits(2048)
    first = ladder.values([8, 4])
    assert ladder.computed_levels == [8, 4]
    second = ladder.values([16, 8, 4])
    assert ladder.computed_levels == [16, 8, 4]
    assert second[1:] == first
    assert ladder.level_sum(16) == second[0]


def test_nested_bound_doubles_until_tol(monkeypatch, unit_square):
    monkeypatch.setattr(series_service, "DEFAULT_NESTED_BOUND", 16)
    monkeypatch.setattr(series_service, "MAX_GRID_CELLS", (2 * 64 + 1) ** 2)
    cones = [unit_square, unit_square]
    loose = f_multi(cones, [1, 2], params=EvalParams(tol=1e6))
    assert loose.bound == 16
    tight = f_multi(cones, [1, 2], params=EvalParams(tol=1e-300))
    assert tight.bound == 64
    assert not tight.converged
    fixed = f_multi(cones, [1, 2], params=EvalParams(bound=32, tol=1e-300))
    assert fixed.bound == 32


def test_nested_default_bound_shrinks_to_fit(monkeypatch, unit_square):
    monkeypatch.setattr(series_service, "MAX_GRID_CELLS", (2 * 128 + 1) ** 2)
    result = f_multi([unit_square, unit_square], [2, 2], params=EvalParams(tol=1.0))
    assert result.bound == 128
