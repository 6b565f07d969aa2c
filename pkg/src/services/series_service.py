"""
Series Service - The kernel f_0 and its iterated family

f_0(C; t) = sum over alpha in C of exp(-sum_i sigma_i(alpha) t_i), its
product form, f_m (weights N(alpha)^-m), the nested sums f_{k_1..k_m},
Dedekind polylogarithms and Dedekind zeta values through cone
decompositions.

Two summation engines live here:
  * a box engine for single cones, evaluating coefficient blocks in
    parallel and reading every truncation level off one pass;
  * a lattice dynamic programme for nested sums over several cones.
At t = 0 both run on a ladder of five truncation levels and extrapolate;
at t != 0 they return the truncated sum with a rigorous geometric bound.
"""

import cmath
import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.cone_service import (
    Cone,
    direction_arcs,
    directions_simple,
    fundamental_domain,
    is_simple,
    is_unimodular,
    union_directions,
)
from services.errors import (
    BranchCutError,
    DivergentSpecError,
    NonSimpleConeError,
    PoleError,
    PreconditionError,
    SectorError,
)
from services.field_service import QuadField
from utils.extrapolation import correction_columns, extrapolate
from utils.summation import CompensatedSum, compensated_total, ordered_map

logger = logging.getLogger(__name__)

DEFAULT_BOX_BOUND = 4096
DEFAULT_NESTED_BOUND = 512
DEFAULT_BLOCK_ROWS = 256
LEVEL_COUNT = 5
MAX_GRID_CELLS = 6_000_000
POLE_TOL = 1e-12


@dataclass(frozen=True)
class EvalParams:
    """
    Evaluation parameters shared by the series and mdzv services.

    bound: coefficient bound A (None picks the engine default)
    tol: target tolerance deciding SumResult.converged
    threads: worker count for block-parallel evaluation
    block_rows: rows of coefficient a_1 per block (fixed, independent of threads)
    mode: 'sum' or 'quadrature' (used by mdzv)
    """

    bound: Optional[int] = None
    tol: float = 1e-8
    threads: int = 1
    block_rows: int = DEFAULT_BLOCK_ROWS
    mode: str = "sum"

    def __post_init__(self):
        if self.bound is not None and self.bound < 1:
            raise PreconditionError("coefficient bound must be at least 1")
        if not self.tol > 0:
            raise PreconditionError("tolerance must be positive")
        if self.threads < 1:
            raise PreconditionError("thread count must be at least 1")
        if self.block_rows < 1:
            raise PreconditionError("block size must be at least 1")
        if self.mode not in ("sum", "quadrature"):
            raise PreconditionError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class SectorPoint:
    """Point (t_1..t_n); membership in S_i(C) is Re(sigma_i(e_j) t_i) > 0 for all j."""

    t: Tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, 't', tuple(complex(v) for v in self.t))

    @classmethod
    def zero(cls, n: int) -> 'SectorPoint':
        return cls((0j,) * n)

    @classmethod
    def center(cls, cones: Sequence[Cone], radius: float = 1.0) -> 'SectorPoint':
        """t_i = radius * exp(-i * mid-direction of the generators under sigma_i)."""
        dirs = union_directions(cones)
        if not directions_simple(dirs):
            raise NonSimpleConeError("cones have no common sector")
        values = []
        real_field = not cones[0].field.is_imaginary
        for start, span in direction_arcs(dirs):
            mid = start + span / 2.0
            if real_field:
                values.append(complex(radius if math.cos(mid) > 0 else -radius))
            else:
                values.append(radius * complex(math.cos(mid), -math.sin(mid)))
        return cls(tuple(values))

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.t)

    def in_sector(self, cone: Cone) -> bool:
        rates = cone.embedding_matrix * np.asarray(self.t)[:, None]
        return bool(np.all(rates.real > 0))

    def require_in(self, cone: Cone):
        if len(self.t) != cone.field.degree:
            raise PreconditionError(
                f"sector point has {len(self.t)} entries, field degree is {cone.field.degree}")
        if not self.in_sector(cone):
            raise SectorError(f"t = {self.t} lies outside the sector of {cone.literal()}")


@dataclass(frozen=True)
class SumResult:
    value: complex
    tail_bound: float
    terms_used: int
    converged: bool
    raw_value: complex = 0j
    heuristic: bool = False
    bound: int = 0
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "raw_value_re": self.raw_value.real,
            "raw_value_im": self.raw_value.imag,
            "tail_bound": self.tail_bound,
            "terms_used": self.terms_used,
            "converged": self.converged,
            "heuristic": self.heuristic,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class ColumnWeight:
    """Per-embedding exponents s_i of one nesting column: prod_i sigma_i(P)^(-s_i)."""

    exponents: Tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, 'exponents', tuple(complex(s) for s in self.exponents))

    @classmethod
    def norm_power(cls, n: int, k: int) -> 'ColumnWeight':
        return cls((complex(k),) * n)

    @property
    def mass(self) -> complex:
        return sum(self.exponents, 0j)

    @property
    def norm_exponent(self) -> Optional[int]:
        """k when every exponent equals the same integer k (weight N(P)^-k)."""
        first = self.exponents[0]
        if first.imag != 0 or first.real != int(first.real):
            return None
        if any(s != first for s in self.exponents):
            return None
        return int(first.real)

    def evaluate(self, sigmas: Sequence[np.ndarray], norms: np.ndarray) -> np.ndarray:
        nonzero = norms != 0
        k = self.norm_exponent
        if k is not None:
            if k == 0:
                return np.ones(norms.shape)
            safe = np.where(nonzero, norms, 1.0)
            return np.where(nonzero, np.power(1.0 / safe, k), 0.0)
        out = np.ones(norms.shape, dtype=complex)
        for sigma, s in zip(sigmas, self.exponents):
            if s == 0:
                continue
            safe = np.where(nonzero, sigma, 1.0)
            if s.imag == 0 and s.real == int(s.real):
                out = out * np.power(safe, -int(s.real))
            else:
                out = out * np.exp(-s * np.log(np.asarray(safe, dtype=complex)))
        return np.where(nonzero, out, 0.0)


# Prechecks

def require_jointly_simple(cones: Sequence[Cone]):
    """Generators of C_1..C_j must share an open half-plane per embedding, for every j."""
    for j in range(1, len(cones) + 1):
        if not directions_simple(union_directions(cones[:j])):
            raise NonSimpleConeError(
                f"cones 1..{j} have no common half-plane; partial sums may vanish")


def convergence_exponents(cones: Sequence[Cone], masses: Sequence[complex]) -> List[complex]:
    """
    Suffix decay exponents of a nested sum at t = 0.

    For every suffix r..m the comparison test needs
    sum_{j>=r} Re(mass_j) > sum_{j>=r} rank(C_j).

    Args:
        cones: C_1..C_m
        masses: Total exponent mass sum_i s_ij per column

    Returns:
        The exponents sum mass - sum rank, one per suffix (last suffix first)
    """
    exponents = []
    mass_total = 0j
    rank_total = 0
    for cone, mass in zip(reversed(cones), reversed(list(masses))):
        mass_total += complex(mass)
        rank_total += cone.rank
        p = mass_total - rank_total
        if p.real <= 0:
            raise DivergentSpecError(
                f"divergent spec: exponent mass {mass_total.real:g} does not exceed "
                f"total rank {rank_total} of the last {len(exponents) + 1} cone(s)")
        exponents.append(p)
    return exponents


def require_branch_free(cones: Sequence[Cone], weights: Sequence[ColumnWeight]):
    """Non-integer exponents need partial sums away from the negative real axis."""
    for j, weight in enumerate(weights):
        arcs = direction_arcs(union_directions(cones[:j + 1]))
        for i, s in enumerate(weight.exponents):
            if s.imag == 0 and s.real == int(s.real):
                continue
            start, span = arcs[i]
            offset = (math.pi - start) % (2 * math.pi)
            if offset <= span + 1e-12 or offset >= 2 * math.pi - 1e-12:
                raise BranchCutError(
                    f"column {j + 1}: sigma_{i + 1} of partial sums meets the negative real axis "
                    f"and exponent {s} is not an integer")


def _as_point(t, n: int) -> SectorPoint:
    if t is None:
        return SectorPoint.zero(n)
    if isinstance(t, SectorPoint):
        point = t
    elif isinstance(t, (int, float, complex)):
        point = SectorPoint((t,) * n) if t == 0 else SectorPoint((t,))
    else:
        point = SectorPoint(tuple(t))
    if len(point.t) != n:
        raise PreconditionError(f"sector point needs {n} entries, got {len(point.t)}")
    return point


def geometric_tail(cones: Sequence[Cone], point: SectorPoint, bound: int) -> float:
    """
    Bound on the mass outside the box a_j <= bound for weights with |N| >= 1.

    Union bound over the coordinate that exceeds the box:
    sum_j r_j^(A+1)/(1-r_j) * prod_{l != j} r_l/(1-r_l), r = exp(-Re v).
    """
    t = np.asarray(point.t)
    rates = []
    for cone in cones:
        v = (cone.embedding_matrix * t[:, None]).sum(axis=0)
        rates.extend(math.exp(-z.real) for z in v)
    if any(r >= 1.0 for r in rates):
        return math.inf
    total = 0.0
    for j, r in enumerate(rates):
        others = 1.0
        for l, q in enumerate(rates):
            if l != j:
                others *= q / (1.0 - q)
        total += r ** (bound + 1) / (1.0 - r) * others
    return total


def _adaptive_bound(cones: Sequence[Cone], point: SectorPoint, params: EvalParams) -> int:
    if params.bound is not None:
        return params.bound
    bound = 16
    while bound < DEFAULT_BOX_BOUND and geometric_tail(cones, point, bound) > params.tol / 10:
        bound *= 2
    return bound


def _level_ladder(bound: int) -> List[int]:
    top = max(16, -(-bound // 16) * 16)
    return [top >> k for k in range(LEVEL_COUNT)]


# Box engine (single cone)

def _cone_kernel(cone: Cone, weight: ColumnWeight, point: SectorPoint) -> Callable[..., np.ndarray]:
    f = cone.field
    coords = cone.coordinates
    phases = None if point.is_zero else point.t

    def kernel(*coeffs: np.ndarray) -> np.ndarray:
        x = sum(np.asarray(a, dtype=float) * g[0] for a, g in zip(coeffs, coords))
        y = sum(np.asarray(a, dtype=float) * g[1] for a, g in zip(coeffs, coords))
        sigmas = f.embed_arrays(x, y)
        values = weight.evaluate(sigmas, f.norm_array(x, y))
        if phases is not None:
            exponent = sum(s * t for s, t in zip(sigmas, phases))
            values = values * np.exp(-exponent)
        return values

    return kernel


def _box_level_sums(cone: Cone, kernel: Callable[..., np.ndarray],
                    levels: Sequence[int], params: EvalParams) -> List[complex]:
    """
    Truncated sums S(L) for every L in levels from a single pass over [1, max(levels)]^m.

    Coefficients are cut into segments between consecutive levels; blocks never
    straddle a segment, so each block result lands in one row of the segment
    matrix. Blocks are reduced in index order.
    """
    ascending = sorted(levels)
    top = ascending[-1]
    segments = len(ascending)
    starts = [0] + ascending[:-1]
    blocks = []
    for s in range(segments):
        lo = starts[s] + 1
        while lo <= ascending[s]:
            hi = min(ascending[s], lo + params.block_rows - 1)
            blocks.append((s, lo, hi))
            lo = hi + 1

    if cone.rank == 1:
        def run(block):
            s, lo, hi = block
            return s, np.sum(kernel(np.arange(lo, hi + 1)))
    else:
        columns = np.arange(1, top + 1)[None, :]

        def run(block):
            s, lo, hi = block
            rows = np.arange(lo, hi + 1)[:, None]
            values = kernel(rows, columns)
            return s, np.add.reduceat(values, starts, axis=1).sum(axis=0)

    partial = [CompensatedSum(() if cone.rank == 1 else (segments,)) for _ in range(segments)]
    for s, value in ordered_map(run, blocks, params.threads):
        partial[s].add(value)
    matrix = [np.atleast_1d(acc.value()) for acc in partial]

    sums = {}
    for q in range(segments):
        if cone.rank == 1:
            sums[ascending[q]] = compensated_total(matrix[p][0] for p in range(q + 1))
        else:
            sums[ascending[q]] = compensated_total(
                matrix[p][r] for p in range(q + 1) for r in range(q + 1))
    return [sums[level] for level in levels]


def cone_sum(cone: Cone, weight: ColumnWeight, point: SectorPoint,
             params: EvalParams) -> SumResult:
    """Weighted sum over one simple cone; the box engine behind f_0, f_m and m = 1 MDZVs."""
    started = time.perf_counter()
    if not is_simple(cone):
        raise NonSimpleConeError(f"cone {cone.literal()} is not simple")
    kernel = _cone_kernel(cone, weight, point)
    if point.is_zero:
        exponents = convergence_exponents([cone], [weight.mass])
        levels = _level_ladder(params.bound or DEFAULT_BOX_BOUND)
        values = _box_level_sums(cone, kernel, levels, params)
        fit = extrapolate(levels, values, correction_columns(exponents))
        result = SumResult(fit.value, fit.bound, levels[0] ** cone.rank, fit.bound <= params.tol,
                           raw_value=values[0], heuristic=True, bound=levels[0],
                           seconds=time.perf_counter() - started)
    else:
        point.require_in(cone)
        bound = _adaptive_bound([cone], point, params)
        value = _box_level_sums(cone, kernel, [bound], params)[0]
        tail = geometric_tail([cone], point, bound)
        result = SumResult(value, tail, bound ** cone.rank, tail <= params.tol,
                           raw_value=value, heuristic=False, bound=bound,
                           seconds=time.perf_counter() - started)
    logger.info("cone %s: value %r, tail %.3g, %d terms, %.2fs", cone.literal(),
                result.value, result.tail_bound, result.terms_used, result.seconds)
    return result


# Lattice dynamic programme (nested sums)

def _shift(array: np.ndarray, vector: Sequence[int]) -> np.ndarray:
    """result[P] = array[P - vector], zero outside."""
    out = np.zeros_like(array)
    dst, src = [], []
    for size, v in zip(array.shape, vector):
        if abs(v) >= size:
            return out
        if v >= 0:
            dst.append(slice(v, size))
            src.append(slice(0, size - v))
        else:
            dst.append(slice(0, size + v))
            src.append(slice(-v, size))
    out[tuple(dst)] = array[tuple(src)]
    return out


def _window_sum(array: np.ndarray, vector: np.ndarray, bound: int) -> np.ndarray:
    """V(P) = sum_{a=1..bound} array[P - a*vector] via a doubling prefix scan along vector."""
    shape = np.asarray(array.shape)
    cumulative = array.copy()
    step = np.asarray(vector, dtype=np.int64)
    while np.all(np.abs(step) < shape):
        cumulative = cumulative + _shift(cumulative, step)
        step = step * 2
    return _shift(cumulative, vector) - _shift(cumulative, (bound + 1) * np.asarray(vector))


def _reference_basis(cones: Sequence[Cone]) -> Tuple[np.ndarray, np.ndarray]:
    """Integer basis matrix B (columns) of the DP grid and its inverse."""
    f = cones[0].field
    if f.is_rational:
        return np.array([[1]]), np.array([[1]])
    first = cones[0]
    if first.rank == 2 and is_unimodular(first):
        (e1x, e1y), (e2x, e2y) = first.coordinates
        det = e1x * e2y - e1y * e2x
        basis = np.array([[e1x, e2x], [e1y, e2y]], dtype=np.int64)
        inverse = det * np.array([[e2y, -e2x], [-e1y, e1x]], dtype=np.int64)
        return basis, inverse
    return np.eye(2, dtype=np.int64), np.eye(2, dtype=np.int64)


def _nested_grid(cones: Sequence[Cone], bound: int):
    """Grid basis, generators in grid coordinates, lower corner and shape for a bound."""
    basis, inverse = _reference_basis(cones)
    dim = basis.shape[0]
    gens = []
    for cone in cones:
        gens.append([inverse @ np.asarray(g.coordinates[:dim], dtype=np.int64)
                     for g in cone.generators])

    lo = np.zeros(dim, dtype=np.int64)
    hi = np.zeros(dim, dtype=np.int64)
    cur_lo, cur_hi = lo.copy(), hi.copy()
    for cone_gens in gens:
        for g in cone_gens:
            cur_lo = cur_lo + np.minimum(g, bound * g)
            cur_hi = cur_hi + np.maximum(g, bound * g)
        lo, hi = np.minimum(lo, cur_lo), np.maximum(hi, cur_hi)
    shape = tuple(int(v) for v in hi - lo + 1)
    return basis, gens, lo, shape


def _nested_level_sum(cones: Sequence[Cone], weights: Sequence[ColumnWeight],
                      point: SectorPoint, bound: int) -> complex:
    """
    sum over alpha_j in C_j (coefficients <= bound) of
    exp(-sum_i sigma_i(P_m) t_i) * prod_j weight_j(P_j), P_j = alpha_1 + ... + alpha_j.

    W_j(P) = weight_j(P) * sum_{a in [1,bound]^r} W_{j-1}(P - sum_k a_k e_k) on a
    grid covering every partial sum.
    """
    f = cones[0].field
    basis, gens, lo, shape = _nested_grid(cones, bound)
    dim = basis.shape[0]
    cells = int(np.prod(shape))
    if cells > MAX_GRID_CELLS:
        raise PreconditionError(
            f"nested grid of {cells} cells exceeds {MAX_GRID_CELLS}; lower the coefficient bound")

    axes = [np.arange(int(lo[k]), int(lo[k]) + shape[k], dtype=float) for k in range(dim)]
    grid = np.meshgrid(*axes, indexing='ij')
    x = sum(basis[0, k] * grid[k] for k in range(dim))
    y = sum(basis[1, k] * grid[k] for k in range(dim)) if dim == 2 else np.zeros_like(x)
    sigmas = f.embed_arrays(x, y)
    norms = f.norm_array(x, y)

    real_valued = point.is_zero and all(w.norm_exponent is not None for w in weights)
    dtype = float if real_valued else complex
    state = np.zeros(shape, dtype=dtype)
    state[tuple(int(-v) for v in lo)] = 1.0
    for cone_gens, weight in zip(gens, weights):
        for g in cone_gens:
            state = _window_sum(state, g, bound)
        state = state * weight.evaluate(sigmas, norms)
    if not point.is_zero:
        exponent = sum(s * t for s, t in zip(sigmas, point.t))
        state = state * np.exp(-exponent)
    return complex(np.sum(state))


class NestedLadder:
    """
    Truncated nested sums over C_1 x ... x C_m, one per coefficient bound.

    Level values are kept, so raising the top of a ladder only adds the new
    level. Levels missing from the cache are summed on the thread pool in
    ladder order.
    """

    def __init__(self, cones: Sequence[Cone], weights: Sequence[ColumnWeight],
                 point: SectorPoint, threads: int = 1):
        self.cones = list(cones)
        self.weights = list(weights)
        self.point = point
        self.threads = threads
        self._values: Dict[int, complex] = {}

    @property
    def computed_levels(self) -> List[int]:
        return sorted(self._values, reverse=True)

    def grid_cells(self, bound: int) -> int:
        return int(np.prod(_nested_grid(self.cones, bound)[3]))

    def fits(self, bound: int) -> bool:
        return self.grid_cells(bound) <= MAX_GRID_CELLS

    def level_sum(self, bound: int) -> complex:
        if bound not in self._values:
            self._values[bound] = _nested_level_sum(self.cones, self.weights, self.point, bound)
        return self._values[bound]

    def values(self, levels: Sequence[int]) -> List[complex]:
        missing = [level for level in levels if level not in self._values]
        computed = ordered_map(
            lambda level: _nested_level_sum(self.cones, self.weights, self.point, level),
            missing, self.threads)
        self._values.update(zip(missing, computed))
        return [self._values[level] for level in levels]


def _fit_nested_ladder(ladder: NestedLadder, exponents: Sequence[complex],
                       params: EvalParams):
    """
    Extrapolate over the ladder below the top bound.

    Without an explicit bound the top starts at DEFAULT_NESTED_BOUND (halved
    until the grid fits) and doubles while the tail bound misses tol and the
    doubled grid still fits.
    """
    columns = correction_columns(exponents)
    top = params.bound or DEFAULT_NESTED_BOUND
    if params.bound is None:
        while top > 16 and not ladder.fits(top):
            top //= 2
    while True:
        levels = _level_ladder(top)
        values = ladder.values(levels)
        fit = extrapolate(levels, values, columns)
        if params.bound is not None or fit.bound <= params.tol or not ladder.fits(2 * levels[0]):
            return levels, values, fit
        logger.debug("nested tail %.3g above tol %.3g at A=%d; doubling", fit.bound,
                     params.tol, levels[0])
        top = 2 * levels[0]


def nested_sum(cones: Sequence[Cone], weights: Sequence[ColumnWeight],
               point: SectorPoint, params: EvalParams,
               norm_weights: bool = True) -> SumResult:
    """
    Nested sum over C_1 x ... x C_m with column weights; shared by f_multi and mdzv.

    Args:
        cones: C_1..C_m (m >= 2), jointly simple prefixes
        weights: One ColumnWeight per cone
        point: Sector point (zero for the MDZV case)
        params: Evaluation parameters
        norm_weights: Weights are integer norm powers (geometric bound valid)

    Returns:
        SumResult; extrapolated and flagged heuristic at t = 0
    """
    started = time.perf_counter()
    require_jointly_simple(cones)

    def terms(a: int) -> int:
        return int(np.prod([a ** c.rank for c in cones]))

    ladder = NestedLadder(cones, weights, point, params.threads)
    if point.is_zero:
        exponents = convergence_exponents(cones, [w.mass for w in weights])
        require_branch_free(cones, weights)
        levels, values, fit = _fit_nested_ladder(ladder, exponents, params)
        result = SumResult(fit.value, fit.bound, terms(levels[0]), fit.bound <= params.tol,
                           raw_value=values[0], heuristic=True, bound=levels[0],
                           seconds=time.perf_counter() - started)
    else:
        for cone in cones:
            point.require_in(cone)
        if not norm_weights:
            raise PreconditionError("sector points need integer norm-power weights")
        bound = params.bound or min(DEFAULT_NESTED_BOUND, _adaptive_bound(cones, point, params))
        value = ladder.level_sum(bound)
        tail = geometric_tail(cones, point, bound)
        result = SumResult(value, tail, terms(bound), tail <= params.tol, raw_value=value,
                           heuristic=False, bound=bound, seconds=time.perf_counter() - started)
    logger.info("nested sum over %d cones: value %r, tail %.3g, %.2fs",
                len(cones), result.value, result.tail_bound, result.seconds)
    return result


# Operations

def f0_sum(c: Cone, t, A: Optional[int] = None, params: Optional[EvalParams] = None) -> SumResult:
    """
    Truncated f_0(C; t) with the geometric tail bound.

    Args:
        c: Simple cone
        t: Sector point inside S_i(C) for every i
        A: Coefficient bound (None picks one from the tail bound)

    Returns:
        SumResult with a rigorous tail bound
    """
    params = params or EvalParams()
    if A is not None:
        params = replace(params, bound=A)
    point = _as_point(t, c.field.degree)
    if not is_simple(c):
        raise NonSimpleConeError(f"cone {c.literal()} is not simple")
    point.require_in(c)
    return cone_sum(c, ColumnWeight.norm_power(c.field.degree, 0), point, params)


def _inverse_expm1(v):
    return np.exp(-v) / -np.expm1(-v)


def f0_product(c: Cone, t) -> complex:
    """
    Closed form prod_j y_j/(1 - y_j), y_j = exp(-v_j), v_j = sum_i sigma_i(e_j) t_i.

    Raises PoleError when some |1 - y_j| < 1e-12.
    """
    point = _as_point(t, c.field.degree)
    v = (c.embedding_matrix * np.asarray(point.t)[:, None]).sum(axis=0)
    result = 1 + 0j
    for vj in v:
        denominator = -np.expm1(-complex(vj))
        if abs(denominator) < POLE_TOL:
            raise PoleError(f"v = {vj} is within {POLE_TOL} of a pole")
        result *= cmath.exp(-vj) / denominator
    return complex(result)


def f0_product_array(c: Cone, t: Sequence[np.ndarray]) -> np.ndarray:
    """Vectorised product form for arrays t_1..t_n (used on quadrature grids)."""
    out = None
    for j in range(c.rank):
        v = sum(c.embedding_matrix[i, j] * t[i] for i in range(c.field.degree))
        factor = _inverse_expm1(v)
        out = factor if out is None else out * factor
    return out


def fm(c: Cone, m: int, t=None, A: Optional[int] = None,
       params: Optional[EvalParams] = None) -> SumResult:
    """
    f_m(C; t) = sum over alpha in C of exp(-sum_i sigma_i(alpha) t_i) / N(alpha)^m.

    At t = 0 the absolute-convergence precheck must pass (n*m > rank).
    """
    if m < 0:
        raise PreconditionError("m must be nonnegative")
    params = params or EvalParams()
    if A is not None:
        params = replace(params, bound=A)
    point = _as_point(t, c.field.degree)
    return cone_sum(c, ColumnWeight.norm_power(c.field.degree, m), point, params)


def f_multi(cones: Sequence[Cone], exponents: Sequence[int], t=None,
            params: Optional[EvalParams] = None) -> SumResult:
    """
    f_{k_1..k_m}(C_1..C_m; t): sum over (alpha_1..alpha_m) of
    exp(-sum_i sigma_i(alpha_1+...+alpha_m) t_i) / prod_j N(alpha_1+...+alpha_j)^{k_j}.

    Args:
        cones: C_1..C_m over one field
        exponents: Integers k_j >= 0
        t: Sector point, or None/0 for t = 0
        params: Evaluation parameters

    Returns:
        SumResult
    """
    cones = list(cones)
    if not cones or len(cones) != len(exponents):
        raise PreconditionError("need one exponent per cone")
    if any(int(k) != k or k < 0 for k in exponents):
        raise PreconditionError("exponents k_j must be nonnegative integers")
    if any(c.field != cones[0].field for c in cones):
        raise PreconditionError("all cones must lie in the same field")
    params = params or EvalParams()
    n = cones[0].field.degree
    point = _as_point(t, n)
    if len(cones) == 1:
        return fm(cones[0], int(exponents[0]), point, params=params)
    weights = [ColumnWeight.norm_power(n, int(k)) for k in exponents]
    return nested_sum(cones, weights, point, params)


def dedekind_polylog(c: Cone, m: int, X: Sequence[complex],
                     params: Optional[EvalParams] = None) -> complex:
    """
    Li^K_m(C; X_1..X_n) = f_m(C; -log X_1, ..., -log X_n), principal branch.

    X = (1, ..., 1) evaluates at t = 0 with the convergence precheck.
    """
    values = [complex(x) for x in X]
    if len(values) != c.field.degree:
        raise PreconditionError(f"need {c.field.degree} arguments, got {len(values)}")
    for x in values:
        if x.imag == 0 and x.real <= 0:
            raise BranchCutError(f"X = {x} lies on the branch cut of the logarithm")
    if all(x == 1 for x in values):
        point = SectorPoint.zero(c.field.degree)
    else:
        point = SectorPoint(tuple(-cmath.log(x) for x in values))
    return fm(c, m, point, params=params).value


def dedekind_zeta_via_cones(f: QuadField, m: int, params: Optional[EvalParams] = None) -> SumResult:
    """
    zeta_K(m) = sum over the fundamental-domain cones of eps(C)^m f_m(C; 0).

    Args:
        f: Q or a class-number-one quadratic field
        m: Integer >= 2

    Returns:
        Combined SumResult (tails add up)
    """
    if int(m) != m or m < 2:
        raise PreconditionError("m must be an integer >= 2")
    params = params or EvalParams()
    started = time.perf_counter()
    dec = fundamental_domain(f)
    value, raw = CompensatedSum(), CompensatedSum()
    tail, terms = 0.0, 0
    for cone, sign in zip(dec.cones, dec.signs):
        part = fm(cone, int(m), None, params=params)
        factor = sign ** int(m)
        value.add(factor * part.value)
        raw.add(factor * part.raw_value)
        tail += part.tail_bound
        terms += part.terms_used
    result = SumResult(value.value(), tail, terms, tail <= params.tol, raw_value=raw.value(),
                       heuristic=True, bound=params.bound or DEFAULT_BOX_BOUND,
                       seconds=time.perf_counter() - started)
    logger.info("zeta_%s(%d) via %d cones: %r", f, m, len(dec.cones), result.value)
    return result
