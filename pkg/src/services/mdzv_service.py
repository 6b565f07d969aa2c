"""
MDZV Service - Multiple Dedekind zeta values and functions

Sum form of zeta_{K; C_1..C_m}(s_ij), the K = Q multiple zeta path,
shuffle combinatorics of the shuffle-indexed definition and the
Eisenstein-type specialisations with zero exponents.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field as dc_field
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from services.cone_service import Cone, is_simple, is_unimodular
from services.errors import (
    DivergentSpecError,
    NonSimpleConeError,
    PreconditionError,
    ShuffleError,
)
from services.field_service import QuadField
from services.series_service import (
    ColumnWeight,
    EvalParams,
    SectorPoint,
    SumResult,
    cone_sum,
    nested_sum,
    require_branch_free,
)
from utils.extrapolation import correction_columns, extrapolate

logger = logging.getLogger(__name__)

DEFAULT_MZV_BOUND = 16384


def _format_entry(s: complex) -> str:
    if s.imag == 0:
        return str(int(s.real)) if s.real == int(s.real) else repr(s.real)
    return f"{s.real!r}{s.imag:+}j"


@dataclass(frozen=True)
class ExponentMatrix:
    """s_ij with i = embedding row (1..n) and j = iteration column (1..m)."""

    rows: Tuple[Tuple[complex, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(complex(s) for s in row) for row in self.rows)
        if not rows or not rows[0]:
            raise PreconditionError("exponent matrix must be nonempty")
        if any(len(row) != len(rows[0]) for row in rows):
            raise PreconditionError("exponent matrix rows must have equal length")
        object.__setattr__(self, 'rows', rows)

    @classmethod
    def uniform(cls, n: int, columns: Sequence[complex]) -> 'ExponentMatrix':
        """Equal rows: the norm-power specialisation."""
        return cls(tuple(tuple(columns) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def m(self) -> int:
        return len(self.rows[0])

    def row(self, i: int) -> Tuple[complex, ...]:
        return self.rows[i]

    def column(self, j: int) -> Tuple[complex, ...]:
        return tuple(row[j] for row in self.rows)

    @property
    def is_integer(self) -> bool:
        return all(s.imag == 0 and s.real == int(s.real) for row in self.rows for s in row)

    @property
    def is_real(self) -> bool:
        return all(s.imag == 0 for row in self.rows for s in row)

    @property
    def has_equal_rows(self) -> bool:
        return all(row == self.rows[0] for row in self.rows)

    def swapped(self) -> 'ExponentMatrix':
        return ExponentMatrix(tuple(reversed(self.rows)))

    def literal(self) -> str:
        return ";".join(",".join(_format_entry(s) for s in row) for row in self.rows)


@dataclass(frozen=True)
class MdzvSpec:
    """Field, ordered cones C_1..C_m, exponent matrix and evaluation parameters."""

    field: QuadField
    cones: Tuple[Cone, ...]
    exponents: ExponentMatrix
    params: EvalParams = dc_field(default_factory=EvalParams)

    def __post_init__(self):
        object.__setattr__(self, 'cones', tuple(self.cones))
        if not self.cones:
            raise PreconditionError("at least one cone is required")
        for c in self.cones:
            if c.field != self.field:
                raise PreconditionError("all cones must lie in the spec's field")
            if not is_unimodular(c):
                raise PreconditionError(f"cone {c.literal()} is not unimodular")
            if not is_simple(c):
                raise NonSimpleConeError(f"cone {c.literal()} is not simple")
        if self.exponents.n != self.field.degree or self.exponents.m != len(self.cones):
            raise PreconditionError(
                f"exponent matrix is {self.exponents.n}x{self.exponents.m}, "
                f"expected {self.field.degree}x{len(self.cones)}")

    def describe(self) -> dict:
        return {
            "field": self.field.literal(),
            "cones": [c.literal() for c in self.cones],
            "exp": self.exponents.literal(),
            "mode": self.params.mode,
            "bound": self.params.bound,
            "tol": self.params.tol,
        }


@dataclass(frozen=True)
class ShuffleSpec:
    """
    m n-forms interleaved with m_i copies of a 1-form in each direction i.

    taus[i][x-1] is the position of element x of {1..m+m_i} under tau_i.
    Valid shuffles keep the order of {1..m} and of {m+1..m+m_i} and fix 1.
    """

    m: int
    m_i: Tuple[int, ...]
    taus: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, 'm_i', tuple(self.m_i))
        object.__setattr__(self, 'taus', tuple(tuple(t) for t in self.taus))
        if self.m < 1:
            raise ShuffleError("m must be at least 1")
        if len(self.taus) != len(self.m_i):
            raise ShuffleError("one permutation per direction is required")
        for i, (extra, tau) in enumerate(zip(self.m_i, self.taus)):
            size = self.m + extra
            if extra < 0 or sorted(tau) != list(range(1, size + 1)):
                raise ShuffleError(f"tau_{i + 1} is not a permutation of 1..{size}")
            forms, ones = tau[:self.m], tau[self.m:]
            if list(forms) != sorted(forms) or list(ones) != sorted(ones):
                raise ShuffleError(f"tau_{i + 1} does not preserve the order of both blocks")
            if tau[0] != 1:
                raise ShuffleError(f"tau_{i + 1} does not fix 1")

    @classmethod
    def from_positions(cls, m: int, positions: Sequence[Sequence[int]],
                       sizes: Sequence[int]) -> 'ShuffleSpec':
        """Build each tau_i from the positions of the n-forms inside 1..m+m_i."""
        taus = []
        extras = []
        for pos, size in zip(positions, sizes):
            pos = sorted(pos)
            rest = [k for k in range(1, size + 1) if k not in pos]
            taus.append(tuple(pos) + tuple(rest))
            extras.append(size - m)
        return cls(m, tuple(extras), tuple(taus))


# Shuffles

def enumerate_shuffles(p: int, q: int, variant: str = "all") -> List[Tuple[int, ...]]:
    """
    All order-preserving interleavings of {1..p} and {p+1..p+q}.

    Args:
        p: Size of the first block (>= 1)
        q: Size of the second block (>= 0)
        variant: 'all', or 'sh1' for shuffles with tau(1) = 1

    Returns:
        Permutations as tuples, tau[x-1] = image of x, in lexicographic
        order of the first block's positions
    """
    if p < 1 or q < 0:
        raise PreconditionError("need p >= 1 and q >= 0")
    if variant not in ("all", "sh1"):
        raise PreconditionError(f"unknown shuffle variant {variant!r}")
    total = p + q
    result = []
    for positions in itertools.combinations(range(1, total + 1), p):
        if variant == "sh1" and positions[0] != 1:
            continue
        rest = [k for k in range(1, total + 1) if k not in positions]
        result.append(tuple(positions) + tuple(rest))
    return result


def shuffle_to_exponents(s: ShuffleSpec) -> ExponentMatrix:
    """
    Integer exponents k_ij from a shuffle.

    The images tau_i(1) < ... < tau_i(m) cut 1..m+m_i into m closed pieces;
    k_ij = tau_i(j+1) - tau_i(j) and k_im = m + m_i + 1 - tau_i(m), so that
    no 1-forms give k = 1 everywhere.
    """
    rows = []
    for extra, tau in zip(s.m_i, s.taus):
        images = tau[:s.m]
        row = [images[j + 1] - images[j] for j in range(s.m - 1)]
        row.append(s.m + extra + 1 - images[-1])
        rows.append(tuple(row))
    return ExponentMatrix(tuple(rows))


# Evaluation

def _is_rational_ray_spec(f: QuadField, cones: Sequence[Cone]) -> bool:
    return f.is_rational and all(c.generators[0].x == 1 for c in cones)


def _weights(exponents: ExponentMatrix) -> List[ColumnWeight]:
    return [ColumnWeight(exponents.column(j)) for j in range(exponents.m)]


def _evaluate(f: QuadField, cones: Sequence[Cone], exponents: ExponentMatrix,
              params: EvalParams) -> SumResult:
    n = f.degree
    if _is_rational_ray_spec(f, cones):
        return mzv_eval(exponents.row(0), params)
    weights = _weights(exponents)
    zero = SectorPoint.zero(n)
    if len(cones) == 1:
        require_branch_free(cones, weights)
        return cone_sum(cones[0], weights[0], zero, params)
    return nested_sum(cones, weights, zero, params, norm_weights=False)


def mdzv_eval(spec: MdzvSpec) -> SumResult:
    """
    Multiple Dedekind zeta function in sum form:
    sum over alpha_j in C_j of prod_i prod_j sigma_i(alpha_1 + ... + alpha_j)^(-s_ij).

    K = Q with every cone N{1} goes through mzv_eval; quadrature mode goes
    through the integral representation.

    Args:
        spec: The evaluation description

    Returns:
        SumResult (heuristic tail at t = 0)
    """
    if spec.params.mode == "quadrature":
        from services.oracle_service import quadrature_result
        return quadrature_result(spec)
    return _evaluate(spec.field, spec.cones, spec.exponents, spec.params)


def mzv_eval(s: Sequence[complex], params: Optional[EvalParams] = None) -> SumResult:
    """
    zeta(s_1..s_d) = sum over 0 < n_1 < ... < n_d of prod_j n_j^(-s_j).

    Exact simplex sums up to N plus the last variable's tail through the
    Hurwitz zeta function; the remaining error is extrapolated over N,
    N/2, ..., N/16.

    Args:
        s: Exponents s_1..s_d
        params: bound sets N (default 16384)

    Returns:
        SumResult
    """
    params = params or EvalParams()
    started = time.perf_counter()
    s = [complex(v) for v in s]
    d = len(s)
    if d == 0:
        raise PreconditionError("need at least one exponent")
    for r in range(d):
        tail_mass = sum(v.real for v in s[r:])
        if tail_mass <= d - r:
            raise DivergentSpecError(
                f"divergent spec: Re(s_{r + 1} + ... + s_{d}) = {tail_mass:g} must exceed {d - r}")

    bound = params.bound or DEFAULT_MZV_BOUND
    top = max(16, -(-bound // 16) * 16)
    levels = [top >> k for k in range(5)]
    logs = np.log(np.arange(1, top + 1, dtype=float))

    # index N holds C_k(N), the depth-k sum with n_k <= N
    previous = np.ones(top + 1, dtype=complex)
    head = previous
    for k, exponent in enumerate(s):
        terms = np.exp(-exponent * logs) * previous[:-1]
        head = np.concatenate(([0j], np.cumsum(terms)))
        if k < d - 1:
            previous = head
    prefix = previous

    values = []
    for level in levels:
        hurwitz = complex(mpmath.zeta(s[-1], level + 1))
        values.append(complex(head[level] + prefix[level] * hurwitz))

    if d == 1:
        columns = correction_columns([s[0]])
    else:
        q = min((sum(s[r:], 0j) - (d - r) for r in range(d - 1)), key=lambda z: z.real)
        columns = correction_columns([q] if d == 2 else [q, q])
    fit = extrapolate(levels, values, columns)
    result = SumResult(fit.value, fit.bound, top * d, fit.bound <= params.tol,
                       raw_value=values[0], heuristic=d > 1, bound=top,
                       seconds=time.perf_counter() - started)
    logger.info("zeta%s = %r (tail %.3g)", tuple(s), result.value, result.tail_bound)
    return result


def _single_row(n: int, i: int, k: int) -> Tuple[complex, ...]:
    if not 1 <= i <= n:
        raise PreconditionError(f"embedding index {i} out of range 1..{n}")
    return tuple(complex(k) if r == i - 1 else 0j for r in range(n))


def eisenstein_partial(f: QuadField, c: Cone, k: int, i: int = 1,
                       params: Optional[EvalParams] = None) -> SumResult:
    """
    sum over alpha in C of sigma_i(alpha)^(-k), a cone portion of an Eisenstein series.

    Args:
        f: Field of the cone
        c: Simple cone with independent generators
        k: Integer >= 3
        i: Embedding index

    Returns:
        SumResult
    """
    if int(k) != k or k < 3:
        raise PreconditionError(f"k = {k} is refused; absolute convergence needs an integer k >= 3")
    if c.field != f:
        raise PreconditionError("cone does not lie in the field")
    if not is_simple(c):
        raise NonSimpleConeError(f"cone {c.literal()} is not simple")
    params = params or EvalParams()
    weight = ColumnWeight(_single_row(f.degree, i, int(k)))
    return cone_sum(c, weight, SectorPoint.zero(f.degree), params)


def multiple_eisenstein(f: QuadField, c: Cone, k: int, l: int, i: int = 1,
                        params: Optional[EvalParams] = None) -> SumResult:
    """sum over alpha, beta in C of sigma_i(alpha)^(-k) sigma_i(alpha+beta)^(-l), k, l >= 3."""
    if int(k) != k or int(l) != l or k < 3 or l < 3:
        raise PreconditionError(f"(k, l) = ({k}, {l}) is refused; both must be integers >= 3")
    if c.field != f:
        raise PreconditionError("cone does not lie in the field")
    if not is_simple(c):
        raise NonSimpleConeError(f"cone {c.literal()} is not simple")
    params = params or EvalParams()
    weights = [ColumnWeight(_single_row(f.degree, i, int(k))),
               ColumnWeight(_single_row(f.degree, i, int(l)))]
    return nested_sum([c, c], weights, SectorPoint.zero(f.degree), params, norm_weights=False)


def eisenstein_kronecker(f: QuadField, c: Cone, k: int, l: int,
                         params: Optional[EvalParams] = None) -> SumResult:
    """zeta_{K,C,C}(k,k,l,l) = sum over alpha, beta in C of N(alpha)^-k N(alpha+beta)^-l."""
    spec = MdzvSpec(f, (c, c), ExponentMatrix.uniform(f.degree, (k, l)), params or EvalParams())
    return mdzv_eval(spec)
