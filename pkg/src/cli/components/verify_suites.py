"""
Verify Suites - Acceptance checks behind `mdz verify`

Every check compares a library value with an independent reference and
records the measured deviation against its tolerance.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional

import mpmath

from services.cone_service import Cone, fundamental_domain, verify_partition
from services.field_service import QuadField
from services.mdzv_service import (
    ExponentMatrix,
    MdzvSpec,
    ShuffleSpec,
    eisenstein_partial,
    enumerate_shuffles,
    mdzv_eval,
    multiple_eisenstein,
    mzv_eval,
    shuffle_to_exponents,
)
from services.oracle_service import (
    BruteForce,
    QuadratureGrid,
    brute_force_sum,
    dirichlet_L,
    quadrant_chain_sum,
    quadrature_mdzf,
    riemann_zeta,
    simplex_volume_check,
    zeta_K,
)
from services.series_service import EvalParams, dedekind_zeta_via_cones, fm

logger = logging.getLogger(__name__)

SUITES = ("oracles", "partition", "quadrature", "nested", "shuffles", "eisenstein")


@dataclass
class CheckRow:
    suite: str
    name: str
    expected: float
    measured: float
    deviation: float
    tolerance: float
    passed: bool
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SuiteSettings:
    """Sizes for a full or a quick run."""

    cone_bound: int = 4000
    brute_bound: int = 64
    partition_height: int = 50
    shuffle_size: int = 6
    nested_bound: Optional[int] = None
    reference_bound: int = 2048

    @classmethod
    def quick(cls) -> 'SuiteSettings':
        return cls(cone_bound=1024, brute_bound=32, partition_height=20,
                   shuffle_size=4, nested_bound=512, reference_bound=1024)


class _Recorder:
    def __init__(self, suite: str):
        self.suite = suite
        self.rows: List[CheckRow] = []

    def check(self, name: str, expected: complex, measured: complex, tolerance: float,
              started: float):
        deviation = abs(complex(measured) - complex(expected))
        row = CheckRow(self.suite, name, complex(expected).real, complex(measured).real,
                       deviation, tolerance, bool(deviation <= tolerance),
                       round(time.perf_counter() - started, 3))
        if not row.passed:
            logger.warning("%s/%s failed: deviation %.3g > %.3g", self.suite, name,
                           deviation, tolerance)
        self.rows.append(row)

    def flag(self, name: str, passed: bool, started: float):
        self.rows.append(CheckRow(self.suite, name, 1.0, 1.0 if passed else 0.0,
                                  0.0 if passed else 1.0, 0.0, passed,
                                  round(time.perf_counter() - started, 3)))


GAUSSIAN = QuadField.quadratic(-1)
SQRT2 = QuadField.quadratic(2)


def _gaussian_nested(k: int, l: int) -> BruteForce:
    """sum over alpha = a + bi, beta = c + di (a, b, c, d >= 1) of N(alpha)^-k N(alpha+beta)^-l."""
    def term(a, b, c, d):
        return 1.0 / ((a * a + b * b) ** k * ((a + c) ** 2 + (b + d) ** 2) ** l)
    return BruteForce(term, 4, decay=(2.0 * l - 2, 2.0 * (k + l) - 4))


def _gaussian_embedded(k: int, l: int) -> BruteForce:
    """The same double sum with sigma_1 powers (a + bi)^-k (a + c + (b + d) i)^-l."""
    def term(a, b, c, d):
        return 1.0 / ((a + 1j * b) ** k * ((a + c) + 1j * (b + d)) ** l)
    return BruteForce(term, 4, decay=(l - 2.0, k + l - 4.0))


def gaussian_norm_chain(k: int, l: int, bound: int) -> complex:
    """Limit of sum over alpha, beta in N{1,i} of N(alpha)^-k N(alpha+beta)^-l."""
    return quadrant_chain_sum(lambda a, b: (a * a + b * b) ** -float(k),
                              lambda a, b: (a * a + b * b) ** -float(l), bound,
                              decay=(2.0 * l - 2, 2.0 * (k + l) - 4, 2.0 * (k + l) - 3),
                              levels=6).value


def gaussian_sigma_chain(k: int, l: int, bound: int) -> complex:
    """Limit of sum over alpha, beta in N{1,i} of alpha^-k (alpha+beta)^-l."""
    return quadrant_chain_sum(lambda a, b: (a + 1j * b) ** -float(k),
                              lambda a, b: (a + 1j * b) ** -float(l), bound,
                              decay=(l - 2.0, k + l - 4.0, k + l - 3.0), levels=6).value


def oracle_suite(settings: SuiteSettings) -> List[CheckRow]:
    rec = _Recorder("oracles")
    params = EvalParams(bound=settings.cone_bound)

    started = time.perf_counter()
    rec.check("riemann_zeta(2)", float(mpmath.pi ** 2 / 6), riemann_zeta(2), 1e-12, started)
    started = time.perf_counter()
    rec.check("L(2, chi_-4)", float(mpmath.catalan), dirichlet_L(2, -4), 1e-12, started)

    for m in (2, 3, 4):
        started = time.perf_counter()
        value = dedekind_zeta_via_cones(GAUSSIAN, m, params).value
        rec.check(f"zeta_Q(i)({m})", zeta_K(GAUSSIAN, m), value, 1e-8, started)

    cone = Cone.of(GAUSSIAN, 1, (0, 1))
    for n in (2, 3):
        started = time.perf_counter()
        expected = zeta_K(GAUSSIAN, n) - riemann_zeta(2 * n)
        rec.check(f"f_{n}(N{{1,i}}; 0)", expected, fm(cone, n, None, params=params).value,
                  1e-8, started)

    started = time.perf_counter()
    value = dedekind_zeta_via_cones(SQRT2, 2, params).value
    rec.check("zeta_Q(sqrt2)(2)", zeta_K(SQRT2, 2), value, 1e-6, started)

    started = time.perf_counter()
    rec.check("zeta(1,2) = zeta(3)", riemann_zeta(3), mzv_eval((1, 2)).value, 1e-9, started)
    started = time.perf_counter()
    stuffle = 2 * mzv_eval((2, 2)).value + riemann_zeta(4)
    rec.check("2 zeta(2,2) + zeta(4) = zeta(2)^2", riemann_zeta(2) ** 2, stuffle, 1e-9, started)
    return rec.rows


def partition_suite(settings: SuiteSettings) -> List[CheckRow]:
    rec = _Recorder("partition")
    fields = [QuadField.rationals()] + [QuadField.quadratic(d) for d in (-1, -3, 2, 5)]
    for f in fields:
        started = time.perf_counter()
        report = verify_partition(fundamental_domain(f), settings.partition_height)
        rec.flag(f"{f.literal()} H={settings.partition_height}", report.passed, started)
    return rec.rows


def quadrature_suite(settings: SuiteSettings) -> List[CheckRow]:
    rec = _Recorder("quadrature")
    started = time.perf_counter()
    rec.check("exp-sinh calibration", 1.0, 1.0 + QuadratureGrid.build().calibration_error(),
              1e-10, started)
    for n, a, b in ((2, 0.0, 1.0), (3, 0.0, 1.0), (1, 2.0, 5.0)):
        started = time.perf_counter()
        expected = (b - a) ** n / math.factorial(n)
        rec.check(f"simplex({n}, {a:g}, {b:g})", expected, simplex_volume_check(n, a, b),
                  1e-3 * expected, started)

    rationals = QuadField.rationals()
    ray = Cone.of(rationals, 1)
    specs = [
        ("Q zeta(2)", MdzvSpec(rationals, (ray,), ExponentMatrix(((2,),)))),
        ("Q zeta(1,2)", MdzvSpec(rationals, (ray, ray), ExponentMatrix(((1, 2),)))),
        ("Q(i) s=[[2],[2]]", MdzvSpec(GAUSSIAN, (Cone.of(GAUSSIAN, 1, (0, 1)),),
                                      ExponentMatrix(((2,), (2,))),
                                      EvalParams(bound=settings.cone_bound))),
    ]
    for name, spec in specs:
        started = time.perf_counter()
        rec.check(name, mdzv_eval(spec).value, quadrature_mdzf(spec).value, 1e-5, started)
    return rec.rows


def nested_suite(settings: SuiteSettings) -> List[CheckRow]:
    """Extrapolated double sums over N{1,i} against the partial-sum box reference."""
    rec = _Recorder("nested")
    cone = Cone.of(GAUSSIAN, 1, (0, 1))
    params = EvalParams(bound=settings.nested_bound)
    for k, l in ((1, 2), (2, 2)):
        started = time.perf_counter()
        spec = MdzvSpec(GAUSSIAN, (cone, cone), ExponentMatrix.uniform(2, (k, l)), params)
        value = mdzv_eval(spec).value
        expected = gaussian_norm_chain(k, l, settings.reference_bound)
        rec.check(f"zeta^Cone_Q(i)({k},{l})", expected, value, 1e-7, started)
    return rec.rows


def shuffle_suite(settings: SuiteSettings) -> List[CheckRow]:
    rec = _Recorder("shuffles")
    started = time.perf_counter()
    counts_ok = all(len(enumerate_shuffles(p, q)) == math.comb(p + q, p)
                    for p in range(1, settings.shuffle_size + 1)
                    for q in range(settings.shuffle_size + 1))
    rec.flag(f"|Sh(p,q)| = C(p+q,p), p,q <= {settings.shuffle_size}", counts_ok, started)

    # one 1-form after each n-form in both directions: k = (2, 2)
    shuffle = ShuffleSpec(2, (2, 2), ((1, 3, 2, 4), (1, 3, 2, 4)))
    exponents = shuffle_to_exponents(shuffle)
    cone = Cone.of(GAUSSIAN, 1, (0, 1))
    bound = settings.brute_bound
    spec = MdzvSpec(GAUSSIAN, (cone, cone), exponents, EvalParams(bound=bound))
    started = time.perf_counter()
    raw = mdzv_eval(spec).raw_value
    brute = brute_force_sum(_gaussian_nested(2, 2), bound, levels=1)
    rec.check(f"shuffle (2,2) box B={bound}", brute.raw_value, raw, 1e-10, started)
    return rec.rows


def eisenstein_suite(settings: SuiteSettings) -> List[CheckRow]:
    rec = _Recorder("eisenstein")
    params = EvalParams(bound=settings.cone_bound)
    cone = Cone.of(GAUSSIAN, 1, (0, 1))

    started = time.perf_counter()
    value = eisenstein_partial(GAUSSIAN, cone, 4, params=params).value
    brute = brute_force_sum(BruteForce(lambda a, b: (a + 1j * b) ** -4.0, 2, decay=(2.0, 3.0)),
                            settings.cone_bound // 2, levels=3)
    rec.check("sum (a+bi)^-4", brute.value, value, 1e-6, started)

    started = time.perf_counter()
    bound = settings.brute_bound
    nested = multiple_eisenstein(GAUSSIAN, cone, 3, 3, params=EvalParams(bound=bound))
    brute = brute_force_sum(_gaussian_embedded(3, 3), bound, levels=1)
    rec.check(f"multiple Eisenstein (3,3) box B={bound}", brute.raw_value, nested.raw_value,
              1e-10, started)

    started = time.perf_counter()
    nested = multiple_eisenstein(GAUSSIAN, cone, 3, 3,
                                 params=EvalParams(bound=settings.nested_bound))
    rec.check("multiple Eisenstein (3,3)", gaussian_sigma_chain(3, 3, settings.reference_bound),
              nested.value, 1e-6, started)

    root2 = math.sqrt(2.0)
    real_cone = Cone.of(SQRT2, 1, (3, 2))
    started = time.perf_counter()
    value = eisenstein_partial(SQRT2, real_cone, 4, params=params).value
    brute = brute_force_sum(BruteForce(lambda a, b: (a + b * (3 + 2 * root2)) ** -4.0, 2,
                                       decay=(2.0, 3.0)),
                            settings.cone_bound // 2, levels=3)
    rec.check("sum (a+b(3+2 sqrt2))^-4", brute.value, value, 1e-6, started)
    return rec.rows


SUITE_RUNNERS: Dict[str, Callable[[SuiteSettings], List[CheckRow]]] = {
    "oracles": oracle_suite,
    "partition": partition_suite,
    "quadrature": quadrature_suite,
    "nested": nested_suite,
    "shuffles": shuffle_suite,
    "eisenstein": eisenstein_suite,
}


def run_suites(name: str, quick: bool = False) -> List[CheckRow]:
    """
    Run one suite, or every suite for 'all'.

    Args:
        name: Suite name or 'all'
        quick: Use reduced sizes

    Returns:
        Check rows in suite order
    """
    settings = SuiteSettings.quick() if quick else SuiteSettings()
    names = SUITES if name == "all" else (name,)
    rows: List[CheckRow] = []
    for suite in names:
        logger.info("running verify suite %s", suite)
        rows.extend(SUITE_RUNNERS[suite](settings))
    return rows
