"""
Oracle Service - Independent verification paths

Classical Dirichlet series (Riemann zeta, L-functions of quadratic
characters, zeta_K = zeta * L), brute-force lattice sums that share no
summation code with the series engines, and quadrature of the integral
representation of multiple Dedekind zeta functions.
"""

import cmath
import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from services.cone_service import Cone, direction_arcs, union_directions
from services.errors import (
    PoleError,
    PreconditionError,
    QuadratureError,
)
from services.field_service import QuadField
from services.series_service import SumResult, f0_product_array
from utils.extrapolation import correction_columns, extrapolate, fit_limit, richardson
from utils.summation import CompensatedSum, ordered_map

logger = logging.getLogger(__name__)

EULER_MACLAURIN_CUTOFF = 10
EULER_MACLAURIN_TERMS = 10

EXP_SINH_RANGE = 3.5
QUADRATURE_STEPS = {1: 1.0 / 32, 2: 1.0 / 20, 3: 1.0 / 12, 4: 1.0 / 10}
MAX_QUADRATURE_DIMENSION = 4
QUADRATURE_SCHEMES = ("exp-sinh", "log-uniform")


# Dirichlet series

def riemann_zeta(s: complex) -> complex:
    """
    zeta(s) for Re s > 1 by Euler-Maclaurin summation.

    Args:
        s: Complex argument with Re s > 1

    Returns:
        zeta(s), absolute error well below 1e-12 on moderate |s|
    """
    s = complex(s)
    if s.real <= 1:
        raise PreconditionError(f"riemann_zeta needs Re s > 1, got {s}")
    n_cut = EULER_MACLAURIN_CUTOFF
    head = sum(k ** -s for k in range(1, n_cut))
    total = head + n_cut ** (1 - s) / (s - 1) + 0.5 * n_cut ** -s
    rising = s  # s (s+1) ... (s+2k-2)
    for k in range(1, EULER_MACLAURIN_TERMS + 1):
        b2k = float(mpmath.bernoulli(2 * k))
        total += b2k / math.factorial(2 * k) * rising * n_cut ** (-s - 2 * k + 1)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    return complex(total)


def jacobi(n: int, m: int) -> int:
    """Jacobi symbol (n/m) for odd positive m."""
    if m <= 0 or not m & 1:
        raise PreconditionError(f"Jacobi symbol needs an odd positive modulus, got {m}")
    if m == 1:
        return 1
    acc = 1
    while True:
        n %= m
        if n == 0:
            return 0
        while not n & 1:
            n >>= 1
            if m & 7 not in (1, 7):
                acc = -acc
        if n == 1:
            return acc
        if n & 3 == 3 and m & 3 == 3:
            acc = -acc
        n, m = m, n


def is_fundamental_discriminant(D: int) -> bool:
    if D == 1:
        return True
    d = D if D % 4 == 1 else D // 4
    if D % 4 not in (0, 1):
        return False
    try:
        return QuadField.quadratic(d).discriminant == D
    except PreconditionError:
        return False


def kronecker_symbol(D: int, n: int) -> int:
    """
    Kronecker symbol (D/n) for n >= 1; chi_D(n) for a fundamental discriminant D.

    Args:
        D: Discriminant (D = 0 or 1 mod 4)
        n: Positive integer

    Returns:
        -1, 0 or 1
    """
    if n < 1:
        raise PreconditionError("kronecker_symbol needs n >= 1")
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    return result * jacobi(D, n)


def character_table(D: int) -> List[int]:
    """chi_D(0), ..., chi_D(|D| - 1)."""
    if not is_fundamental_discriminant(D):
        raise PreconditionError(f"{D} is not a fundamental discriminant")
    if D == 1:
        return [1]
    q = abs(D)
    return [0] + [kronecker_symbol(D, k) for k in range(1, q)]


def dirichlet_L(s: complex, D: int) -> complex:
    """
    L(s, chi_D) = sum over n >= 1 of chi_D(n) n^-s.

    Nonprincipal characters are evaluated for Re s > 0 (s = 1 through the
    digamma formula); D = 1 is the Riemann zeta function.

    Args:
        s: Complex argument
        D: Fundamental discriminant of the character, e.g. -4 or 8

    Returns:
        L(s, chi_D)
    """
    s = complex(s)
    chi = character_table(D)
    if D == 1:
        if s == 1:
            raise PoleError("L(s, chi_1) has a pole at s = 1")
        return riemann_zeta(s)
    if s.real <= 0:
        raise PreconditionError(f"dirichlet_L needs Re s > 0, got {s}")
    q = abs(D)
    if s == 1:
        value = -mpmath.fsum(c * mpmath.digamma(mpmath.mpf(k) / q)
                             for k, c in enumerate(chi) if c) / q
        return complex(value)
    return complex(mpmath.dirichlet(s, chi))


def zeta_K(f: QuadField, s: complex) -> complex:
    """Dedekind zeta of Q or a quadratic field: zeta(s) * L(s, chi_D)."""
    if f.is_rational:
        return riemann_zeta(s)
    return riemann_zeta(s) * dirichlet_L(s, f.discriminant)


# Brute force

@dataclass(frozen=True)
class BruteForce:
    """
    A lattice sum over coefficient boxes.

    term(*coeffs) receives outer coefficients as ints and the last
    min(2, dimension) coefficients as broadcastable numpy arrays.
    Coefficients run over 1..B, or over -B..B without the origin when
    symmetric. predicate(*coeffs) optionally masks terms out. decay lists
    the tail exponents used for extrapolation over B, B/2, ...
    """

    term: Callable[..., np.ndarray]
    dimension: int
    decay: Tuple[complex, ...] = (2.0,)
    symmetric: bool = False
    predicate: Optional[Callable[..., np.ndarray]] = None


@dataclass(frozen=True)
class BruteForceResult:
    value: complex
    raw_value: complex
    tail_estimate: float
    bound: int
    levels: Tuple[int, ...]
    level_values: Tuple[complex, ...]


def _exact_total(values: Sequence[complex]) -> complex:
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def brute_force_sum(description: BruteForce, bound: int, levels: int = 2) -> BruteForceResult:
    """
    Direct nested loops over the coefficient box with extrapolation in the box size.

    Args:
        description: The sum to evaluate
        bound: Box size B >= 1
        levels: Number of box sizes B, B/2, ... (2 uses Richardson)

    Returns:
        BruteForceResult with the extrapolated value and the plain box sum
    """
    if bound < 1:
        raise PreconditionError("box size must be at least 1")
    if levels < 1 or bound >> (levels - 1) < 1:
        raise PreconditionError(f"box size {bound} is too small for {levels} levels")
    dim = description.dimension
    sizes = [bound >> k for k in range(levels)]
    inner = min(2, dim)
    outer = dim - inner
    lo = -bound if description.symmetric else 1
    coeff_range = np.arange(lo, bound + 1, dtype=float)
    axes = [coeff_range[:, None], coeff_range[None, :]] if inner == 2 else [coeff_range]
    size_of = np.abs(axes[0])
    if inner == 2:
        size_of = np.maximum(size_of, np.abs(axes[1]))

    partial = {L: [] for L in sizes}
    for outer_coeffs in itertools.product(range(lo, bound + 1), repeat=outer):
        outer_size = max((abs(a) for a in outer_coeffs), default=0)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            values = np.asarray(description.term(*outer_coeffs, *axes), dtype=complex)
            values = np.broadcast_to(values, size_of.shape).copy()
            if description.predicate is not None:
                mask = np.broadcast_to(description.predicate(*outer_coeffs, *axes), size_of.shape)
                values = np.where(mask, values, 0.0)
        if description.symmetric and outer_size == 0:
            values[size_of == 0] = 0.0
        for L in sizes:
            if outer_size <= L:
                partial[L].append(complex(values[size_of <= L].sum()))

    level_values = [_exact_total(partial[L]) for L in sizes]
    if not all(cmath.isfinite(v) for v in level_values):
        raise PreconditionError("brute-force terms are not finite on the box")
    raw = level_values[0]
    if levels == 1:
        value = raw
    elif levels == 2:
        exponent = min(complex(q).real for q in description.decay)
        value = richardson(level_values[1], level_values[0], 2.0, exponent)
    else:
        columns = correction_columns(description.decay, count=levels - 1)
        value = fit_limit(sizes, level_values, columns)
    result = BruteForceResult(complex(value), raw, abs(value - raw), bound,
                              tuple(sizes), tuple(level_values))
    logger.debug("brute force over %d dims, B=%d: %r", dim, bound, result.value)
    return result


def quadrant_chain_sum(first: Callable[[np.ndarray, np.ndarray], np.ndarray],
                       last: Callable[[np.ndarray, np.ndarray], np.ndarray],
                       bound: int, decay: Sequence[complex], levels: int = 5) -> BruteForceResult:
    """
    Double sum over alpha = a + b*omega and beta in N{1, omega} (coordinates >= 1)
    of first(alpha) * last(alpha + beta), truncated on the box of the partial
    sum P = alpha + beta.

    The inner sum over alpha strictly below P in both coordinates is a 2D
    prefix sum of first, so every box size B, B/2, ... is read off one grid.
    The limit is fitted over those box sizes with the tail exponents in decay.

    Args:
        first: Weight of alpha as a function of its coordinates (a, b)
        last: Weight of P as a function of its coordinates
        bound: Largest box size B for P
        decay: Tail exponents of the P-box truncation
        levels: Number of box sizes (at least 3)

    Returns:
        BruteForceResult; tail_estimate is the shift between the two fit windows
    """
    if levels < 3 or bound >> (levels - 1) < 2:
        raise PreconditionError(f"box size {bound} is too small for {levels} levels")
    coords = np.arange(1, bound + 1, dtype=float)
    a, b = coords[:, None], coords[None, :]
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        inner = np.broadcast_to(np.asarray(first(a, b), dtype=complex), (bound, bound))
        outer = np.broadcast_to(np.asarray(last(a, b), dtype=complex), (bound, bound))
    below = np.zeros((bound, bound), dtype=complex)
    below[1:, 1:] = inner[:-1, :-1].cumsum(axis=0).cumsum(axis=1)
    below *= outer
    if not np.all(np.isfinite(below)):
        raise PreconditionError("brute-force terms are not finite on the box")

    sizes = [bound >> k for k in range(levels)]
    level_values = [_exact_total(below[:L, :L].sum(axis=1)) for L in sizes]
    fit = extrapolate(sizes, level_values, correction_columns(decay, count=levels - 2))
    result = BruteForceResult(fit.value, level_values[0], fit.bound, bound,
                              tuple(sizes), tuple(level_values))
    logger.debug("quadrant chain sum, B=%d: %r (shift %.3g)", bound, result.value, fit.bound)
    return result


# Quadrature

def _decay(u: np.ndarray) -> np.ndarray:
    return np.exp(-u)


@dataclass(frozen=True)
class QuadratureGrid:
    """
    One-dimensional rule on (0, inf): integral of g ~ sum(weights * g(nodes)).

    exp-sinh: r = exp(pi/2 sinh x) on a uniform x grid of the given step.
    log-uniform: r = -log v on midpoints of (0, 1) with spacing step.
    """

    scheme: str
    step: float
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, scheme: str = "exp-sinh", step: float = 1.0 / 32) -> 'QuadratureGrid':
        if scheme not in QUADRATURE_SCHEMES:
            raise QuadratureError(f"unknown quadrature scheme {scheme!r}")
        if not 0 < step < 1:
            raise QuadratureError("quadrature step must lie in (0, 1)")
        if scheme == "exp-sinh":
            half = 2 * int(math.ceil(EXP_SINH_RANGE / (2 * step)))
            x = step * np.arange(-half, half + 1)
            nodes = np.exp(0.5 * math.pi * np.sinh(x))
            weights = step * 0.5 * math.pi * np.cosh(x) * nodes
        else:
            count = int(round(1.0 / step))
            v = (np.arange(count) + 0.5) / count
            nodes = -np.log(v)
            weights = np.full(count, 1.0 / count) / v
        return cls(scheme, step, nodes, weights)

    def __len__(self) -> int:
        return len(self.nodes)

    def coarsened(self) -> 'QuadratureGrid':
        """The same rule at twice the step (every other exp-sinh node)."""
        if self.scheme == "exp-sinh":
            return QuadratureGrid(self.scheme, 2 * self.step, self.nodes[::2], 2 * self.weights[::2])
        return QuadratureGrid.build(self.scheme, 2 * self.step)

    def integrate(self, func: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.sum(self.weights * func(self.nodes)))

    def calibration_error(self) -> float:
        """|integral of exp(-u) - 1| on this grid."""
        return abs(self.integrate(_decay) - 1.0)


@dataclass(frozen=True)
class QuadratureValue:
    value: complex
    error_estimate: float
    nodes: int
    scheme: str


def _rotations(cones: Sequence[Cone]) -> List[float]:
    """theta_i so that exp(i theta_i) sigma_i(P) has positive real part on all partial sums."""
    thetas = []
    for start, span in direction_arcs(union_directions(cones)):
        theta = -(start + span / 2.0)
        thetas.append((theta + math.pi) % (2 * math.pi) - math.pi)
    return thetas


def quadrature_mdzf(spec, scheme: str = "exp-sinh", step: Optional[float] = None,
                    threads: int = 1) -> QuadratureValue:
    """
    The integral representation
    prod Gamma(s_ij)^-1 * integral over (0, inf)^(mn) of
    prod_j f_0(C_j; T_j) prod u_ij^(s_ij - 1) du, with T_ij = u_ij + ... + u_im.

    Each embedding's variables run along the ray exp(i theta_i) (0, inf) that
    keeps every generator exponential decaying. The error estimate is the
    change against the rule at twice the step.

    Args:
        spec: MdzvSpec with real exponents s_ij > 0 and m * n <= 4
        scheme: 'exp-sinh' or 'log-uniform'
        step: Node spacing (defaults per dimension)

    Returns:
        QuadratureValue
    """
    exponents = spec.exponents
    n, m = exponents.n, exponents.m
    dim = n * m
    if dim > MAX_QUADRATURE_DIMENSION:
        raise QuadratureError(f"quadrature dimension {dim} exceeds {MAX_QUADRATURE_DIMENSION}")
    if not exponents.is_real or any(s.real <= 0 for row in exponents.rows for s in row):
        raise QuadratureError("quadrature needs real exponents s_ij > 0")

    cones = list(spec.cones)
    thetas = _rotations(cones)
    prefactor = 1 + 0j
    for i in range(n):
        for j in range(m):
            s = exponents.rows[i][j].real
            prefactor *= cmath.exp(1j * thetas[i] * s) / complex(mpmath.gamma(s))

    grid = QuadratureGrid.build(scheme, step or QUADRATURE_STEPS[dim])
    coarse = grid.coarsened()
    # variable k <-> (i, j) = divmod(k, m)
    powers = [exponents.rows[k // m][k % m].real - 1.0 for k in range(dim)]
    phases = [cmath.exp(1j * theta) for theta in thetas]

    def integrand(r: Sequence[np.ndarray]) -> np.ndarray:
        value = 1.0
        for k in range(dim):
            if powers[k]:
                value = value * np.power(r[k], powers[k])
        for j, cone in enumerate(cones):
            t = [phases[i] * sum(r[i * m + l] for l in range(j, m)) for i in range(n)]
            value = value * f0_product_array(cone, t)
        return value

    def reduce(g: QuadratureGrid) -> complex:
        if dim == 1:
            values = integrand([g.nodes])
            _require_finite(values)
            return complex(np.sum(g.weights * values))
        rest = np.meshgrid(*([g.nodes] * (dim - 1)), indexing='ij')
        rest_weights = np.ones_like(rest[0])
        for w in np.meshgrid(*([g.weights] * (dim - 1)), indexing='ij'):
            rest_weights = rest_weights * w

        def slab(index: int) -> complex:
            values = integrand([np.full_like(rest[0], g.nodes[index])] + list(rest))
            _require_finite(values)
            return g.weights[index] * np.sum(rest_weights * values)

        acc = CompensatedSum()
        for part in ordered_map(slab, range(len(g)), threads):
            acc.add(part)
        return acc.value()

    started = time.perf_counter()
    fine = prefactor * reduce(grid)
    rough = prefactor * reduce(coarse)
    result = QuadratureValue(complex(fine), abs(fine - rough), len(grid) ** dim, scheme)
    logger.info("quadrature over %d dims (%s): %r, error %.3g, %.2fs", dim, scheme,
                result.value, result.error_estimate, time.perf_counter() - started)
    return result


def _require_finite(values: np.ndarray):
    if not np.all(np.isfinite(values)):
        raise QuadratureError("integrand is not finite on the quadrature grid")


def quadrature_result(spec) -> SumResult:
    """quadrature_mdzf packed as a SumResult (mdzv quadrature mode)."""
    started = time.perf_counter()
    q = quadrature_mdzf(spec, threads=spec.params.threads)
    return SumResult(q.value, q.error_estimate, q.nodes, q.error_estimate <= spec.params.tol,
                     raw_value=q.value, heuristic=True, bound=0,
                     seconds=time.perf_counter() - started)


def simplex_volume_check(n: int, a: float, b: float, points: int = 2001) -> float:
    """
    Volume of {a < x_1 < ... < x_n < b} by nested cumulative trapezoid rules.

    The closed form is (b - a)^n / n!.
    """
    if not b > a:
        raise PreconditionError("need b > a")
    if not 1 <= n <= 6:
        raise PreconditionError("simplex dimension must lie in 1..6")
    x = np.linspace(a, b, points)
    h = x[1] - x[0]
    level = np.ones_like(x)
    for _ in range(n):
        level = np.concatenate(([0.0], np.cumsum(0.5 * h * (level[1:] + level[:-1]))))
    return float(level[-1])
