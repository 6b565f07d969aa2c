"""
Cone Service - Unimodular simple cones over Q and quadratic fields

A cone N{e_1..e_m} is the set of sums a_1 e_1 + ... + a_m e_m with all
a_j >= 1. This module checks unimodularity and simplicity, computes the
sign eps(C), enumerates points, builds fundamental domains of
O_K - {0} modulo units and verifies them by exhaustive orbit search.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from services.errors import NonSimpleConeError, PreconditionError, UnsupportedFieldError
from services.field_service import (
    FieldElement,
    QuadField,
    class_number_one,
    fundamental_unit,
    roots_of_unity,
    totally_positive_unit,
)

logger = logging.getLogger(__name__)

ANGLE_TOL = 1e-12
TWO_PI = 2.0 * math.pi


def _arc(angles: Sequence[float]) -> Tuple[float, float, float]:
    """
    Smallest closed arc containing the given directions.

    Returns:
        (start, span, largest_gap); the arc is [start, start + span]
    """
    ordered = sorted(a % TWO_PI for a in angles)
    if len(ordered) == 1:
        return ordered[0], 0.0, TWO_PI
    gaps = [ordered[k + 1] - ordered[k] for k in range(len(ordered) - 1)]
    gaps.append(ordered[0] + TWO_PI - ordered[-1])
    k = max(range(len(gaps)), key=lambda idx: gaps[idx])
    start = ordered[(k + 1) % len(ordered)]
    return start, TWO_PI - gaps[k], gaps[k]


def _arc_contains(start: float, span: float, angle: float) -> bool:
    offset = (angle - start) % TWO_PI
    return offset <= span + ANGLE_TOL or offset >= TWO_PI - ANGLE_TOL


def _extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    old_r, r = a, b
    old_p, p = 1, 0
    old_q, q = 0, 1
    while r:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_p, p = p, old_p - quotient * p
        old_q, q = q, old_q - quotient * q
    if old_r < 0:
        return -old_r, -old_p, -old_q
    return old_r, old_p, old_q


def _det(u: Tuple[int, int], v: Tuple[int, int]) -> int:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class Cone:
    """Ordered generators e_1..e_m (1 <= m <= n) of the lattice cone N{e_1..e_m}."""

    field: QuadField
    generators: Tuple[FieldElement, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, 'generators', gens)
        if not 1 <= len(gens) <= self.field.degree:
            raise PreconditionError(
                f"a cone in {self.field} needs 1..{self.field.degree} generators, got {len(gens)}")
        for g in gens:
            if g.field != self.field:
                raise PreconditionError("generator belongs to a different field")
            if g.is_zero():
                raise PreconditionError("generators must be nonzero")

    @classmethod
    def of(cls, f: QuadField, *gens: Union[FieldElement, Tuple[int, int], int]) -> 'Cone':
        """Build a cone from elements, (x, y) pairs or integers."""
        elements = []
        for g in gens:
            if isinstance(g, FieldElement):
                elements.append(g)
            elif isinstance(g, int):
                elements.append(f.element(g, 0))
            else:
                elements.append(f.element(*g))
        return cls(f, tuple(elements))

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def coordinates(self) -> List[Tuple[int, int]]:
        return [g.coordinates for g in self.generators]

    @cached_property
    def embedding_matrix(self) -> np.ndarray:
        """sigma_i(e_j) as an (n, m) complex array."""
        return np.array([[g.embed(i + 1) for g in self.generators]
                         for i in range(self.field.degree)], dtype=complex)

    @cached_property
    def directions(self) -> Tuple[Tuple[float, ...], ...]:
        """arg(sigma_i(e_j)) per embedding."""
        return tuple(tuple(float(np.angle(z)) for z in row) for row in self.embedding_matrix)

    def coefficients(self, alpha: FieldElement) -> Optional[Tuple[int, ...]]:
        """Integer coefficients of alpha in the generators, or None if alpha is not in their span."""
        if self.field.is_rational:
            e = self.generators[0].x
            return (alpha.x // e,) if alpha.x % e == 0 else None
        if self.rank == 1:
            e = self.generators[0].coordinates
            if _det(e, alpha.coordinates) != 0:
                return None
            idx = 0 if e[0] != 0 else 1
            if alpha.coordinates[idx] % e[idx]:
                return None
            return (alpha.coordinates[idx] // e[idx],)
        e1, e2 = self.coordinates
        det = _det(e1, e2)
        if det == 0:
            return None
        a, b = _det(alpha.coordinates, e2), _det(e1, alpha.coordinates)
        if a % det or b % det:
            return None
        return a // det, b // det

    def contains(self, alpha: FieldElement) -> bool:
        coeffs = self.coefficients(alpha)
        return coeffs is not None and all(c >= 1 for c in coeffs)

    def literal(self) -> str:
        return ";".join(str(g) for g in self.generators)

    def to_dict(self) -> dict:
        return {"generators": [list(g.coordinates) for g in self.generators]}


@dataclass(frozen=True)
class ConeDecomposition:
    """Cones with their signs eps(C), one per cone."""

    field: QuadField
    cones: Tuple[Cone, ...]
    signs: Tuple[int, ...] = dc_field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'cones', tuple(self.cones))
        signs = tuple(self.signs) or tuple(sign_epsilon(c) for c in self.cones)
        if len(signs) != len(self.cones):
            raise PreconditionError("one sign per cone is required")
        object.__setattr__(self, 'signs', signs)

    def to_list(self) -> List[dict]:
        return [{"generators": [list(g.coordinates) for g in c.generators], "sign": s}
                for c, s in zip(self.cones, self.signs)]


@dataclass
class PartitionReport:
    field: str
    height: int
    passed: bool
    orbits_checked: int
    orbit_elements: int
    uncovered: int
    multiply_covered: int
    counterexample: Optional[Tuple[int, int]] = None
    counterexample_hits: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "height": self.height,
            "passed": self.passed,
            "orbits_checked": self.orbits_checked,
            "orbit_elements": self.orbit_elements,
            "uncovered": self.uncovered,
            "multiply_covered": self.multiply_covered,
            "counterexample": list(self.counterexample) if self.counterexample else None,
            "counterexample_hits": self.counterexample_hits,
        }


# Checks

def is_unimodular(c: Cone) -> bool:
    """
    True iff the generators extend to a Z-basis of O_K.

    For m = n this is det = +-1; for n = 2, m = 1 it is gcd(x, y) = 1.
    """
    if c.field.is_rational:
        return abs(c.generators[0].x) == 1
    if c.rank == 2:
        return abs(_det(*c.coordinates)) == 1
    x, y = c.coordinates[0]
    return math.gcd(x, y) == 1


def is_simple(c: Cone, mode: str = "operative") -> bool:
    """
    Simplicity of a cone.

    Args:
        c: The cone
        mode: 'operative' (directions in an open half-plane per embedding) or
            'strict' (also no pair of cone points with arg(sigma(a)) = -arg(sigma(b)),
            a = b allowed)

    Returns:
        True if the cone is simple in the given mode
    """
    if mode not in ("operative", "strict"):
        raise PreconditionError(f"unknown simplicity mode {mode!r}")
    if not directions_simple(c.directions):
        return False
    if mode == "operative":
        return True
    for row in c.directions:
        start, span, _ = _arc(row)
        if span < ANGLE_TOL:
            # every point lies on one ray
            twice = (2.0 * start) % TWO_PI
            if twice < ANGLE_TOL or twice > TWO_PI - ANGLE_TOL:
                return False
            continue
        # point arguments fill the open arc (start, start + span)
        lo, hi = 2.0 * start, 2.0 * (start + span)
        k = math.floor(lo / TWO_PI + ANGLE_TOL) + 1
        if TWO_PI * k < hi - ANGLE_TOL:
            return False
    return True


def directions_simple(directions: Sequence[Sequence[float]]) -> bool:
    """Open half-plane test for each embedding's direction list."""
    return all(_arc(row)[2] > math.pi + ANGLE_TOL for row in directions)


def union_directions(cones: Sequence[Cone]) -> List[List[float]]:
    """Per-embedding directions of all generators of the given cones."""
    n = cones[0].field.degree
    return [[a for c in cones for a in c.directions[i]] for i in range(n)]


def direction_arcs(directions: Sequence[Sequence[float]]) -> List[Tuple[float, float]]:
    """(start, span) of the generator arc for each embedding."""
    arcs = []
    for row in directions:
        start, span, _ = _arc(row)
        arcs.append((start, span))
    return arcs


def sectors(c: Cone) -> Optional[List[Tuple[float, float]]]:
    """
    Open intervals (lo, hi) of arg(t_i) for which Re(sigma_i(e_j) t_i) > 0 for all j.

    Returns:
        One interval per embedding, or None when the cone is not simple
    """
    if not is_simple(c):
        return None
    result = []
    for start, span in direction_arcs(c.directions):
        center = -(start + span / 2.0)
        center = math.atan2(math.sin(center), math.cos(center))
        half = (math.pi - span) / 2.0
        result.append((center - half, center + half))
    return result


def sign_epsilon(c: Cone) -> int:
    """
    eps(C): product over real embeddings of the constant sign of sigma(alpha) on C.

    Imaginary quadratic cones have sign +1.
    """
    if not is_simple(c):
        raise NonSimpleConeError(f"cone {c.literal()} is not simple")
    if c.field.is_imaginary:
        return 1
    sign = 1
    for i in range(c.field.degree):
        if c.embedding_matrix[i, 0].real < 0:
            sign = -sign
    return sign


def enumerate_points(c: Cone, bound: int) -> Iterator[Tuple[FieldElement, Tuple[int, ...]]]:
    """
    Yield every sum a_1 e_1 + ... + a_m e_m with 1 <= a_j <= bound.

    Order is lexicographic in (a_1, ..., a_m).
    """
    if bound < 1:
        raise PreconditionError("coefficient bound must be at least 1")
    for coeffs in itertools.product(range(1, bound + 1), repeat=c.rank):
        point = c.field.element(0, 0)
        for a, g in zip(coeffs, c.generators):
            point = point + g * a
        yield point, coeffs


# Fundamental domains

def subdivide(f: QuadField, start: FieldElement, end: FieldElement) -> List[Cone]:
    """
    Split the half-open planar cone [start, end) into unimodular cones.

    Consecutive rays r_k, r_{k+1} satisfy |det| = 1; each r_{k+1} is chosen
    with det(r_k, r_{k+1}) = 1 and minimal remaining det(r_{k+1}, end). The
    result alternates rays and open two-dimensional cones, starting with
    N{start} and omitting N{end}.
    """
    a, v = start.coordinates, end.coordinates
    orientation = 1 if _det(a, v) > 0 else -1
    if _det(a, v) == 0:
        raise PreconditionError("start and end rays must be independent")
    cones = []
    current = a
    while True:
        cones.append(Cone.of(f, current))
        remaining = orientation * _det(current, v)
        if remaining == 1:
            cones.append(Cone.of(f, current, v))
            return cones
        g, p, q = _extended_gcd(current[0], current[1])
        if g != 1:
            raise PreconditionError(f"ray {current} is not primitive")
        b0 = (-q * orientation, p * orientation)
        offset = orientation * _det(b0, v)
        # smallest t with offset + t * remaining >= 1
        t = -((offset - 1) // remaining)
        nxt = (b0[0] + t * current[0], b0[1] + t * current[1])
        logger.debug("subdivide: ray %s -> %s (remaining det %d)", current, nxt, remaining)
        cones.append(Cone.of(f, current, nxt))
        current = nxt


def fundamental_domain(f: QuadField) -> ConeDecomposition:
    """
    Partition of a fundamental domain of O_K - {0} modulo U_K into
    operative-simple unimodular cones.

    Args:
        f: Q, or a class-number-one quadratic field

    Returns:
        The decomposition with signs eps(C)
    """
    if not class_number_one(f):
        raise UnsupportedFieldError(f"{f} is not a supported class-number-one field")
    if f.is_rational:
        return ConeDecomposition(f, (Cone.of(f, 1),), (1,))
    if f.is_imaginary:
        if f.d in (-1, -3):
            cones = [Cone.of(f, 1), Cone.of(f, 1, (0, 1))]
        else:
            omega, minus_one = (0, 1), (-1, 0)
            cones = [Cone.of(f, 1), Cone.of(f, 1, omega),
                     Cone.of(f, omega), Cone.of(f, omega, minus_one)]
        return ConeDecomposition(f, tuple(cones), tuple(1 for _ in cones))

    eps = totally_positive_unit(f)
    cones = subdivide(f, f.one(), eps)
    signs = [1] * len(cones)
    if fundamental_unit(f).norm() == 1:
        # Mixed-sign quadrant; units preserve it when N(eps_0) = 1.
        b = f.omega()
        mixed = subdivide(f, b, b * eps)
        cones.extend(mixed)
        signs.extend(-1 for _ in mixed)
    logger.debug("fundamental domain of %s: %d cones", f, len(cones))
    return ConeDecomposition(f, tuple(cones), tuple(signs))


def _orbit_units(f: QuadField, height: int) -> List[FieldElement]:
    if not f.is_real:
        return roots_of_unity(f)
    eps0 = fundamental_unit(f)
    log_eps = math.log(abs(eps0.embed(1)))
    omega_size = abs(f.omega_embeddings[0])
    k_max = int(math.ceil(2.0 * (math.log(max(height, 2)) + math.log(1.0 + omega_size)) / log_eps)) + 3
    result = []
    for k in range(-k_max, k_max + 1):
        power = eps0 ** k
        result.extend((power, -power))
    return result


def verify_partition(dec: ConeDecomposition, height: int) -> PartitionReport:
    """
    Check that every nonzero alpha with |x|, |y| <= height has exactly one
    unit multiple lying in exactly one cone of the decomposition.

    Violations are reported, never raised.

    Args:
        dec: The decomposition to check
        height: Coordinate bound H >= 1

    Returns:
        PartitionReport with counts and the first counterexample
    """
    if height < 1:
        raise PreconditionError("height bound must be at least 1")
    f = dec.field
    xs = np.arange(-height, height + 1)
    if f.is_rational:
        X = xs.copy()
        Y = np.zeros_like(X)
    else:
        X, Y = np.meshgrid(xs, xs, indexing='ij')
        X, Y = X.ravel(), Y.ravel()
    nonzero = (X != 0) | (Y != 0)
    X, Y = X[nonzero], Y[nonzero]

    orbit = _orbit_units(f, height)
    c0, c1 = f.omega_minpoly
    largest = max(max(abs(u.x), abs(u.y)) for u in orbit)
    use_objects = largest * height * (1 + abs(c0) + abs(c1)) * 4 > 2 ** 62
    dtype = object if use_objects else np.int64
    X, Y = X.astype(dtype), Y.astype(dtype)

    hits = np.zeros(X.shape, dtype=np.int64)
    for u in orbit:
        bx = u.x * X + c0 * u.y * Y
        by = u.x * Y + u.y * X + c1 * u.y * Y
        for cone in dec.cones:
            if cone.rank == 1:
                ex, ey = cone.coordinates[0]
                cross = ex * by - ey * bx
                dot = ex * bx + ey * by
                inside = (cross == 0) & (dot > 0)
            else:
                (e1x, e1y), (e2x, e2y) = cone.coordinates
                det = e1x * e2y - e1y * e2x
                a = (bx * e2y - by * e2x) * det
                b = (e1x * by - e1y * bx) * det
                scale = det * det
                inside = (a >= scale) & (b >= scale) & (a % scale == 0) & (b % scale == 0)
            hits += np.asarray(inside, dtype=np.int64)

    bad = np.nonzero(hits != 1)[0]
    report = PartitionReport(
        field=f.literal(),
        height=height,
        passed=bad.size == 0,
        orbits_checked=int(X.size),
        orbit_elements=int(X.size) * len(orbit),
        uncovered=int(np.count_nonzero(hits == 0)),
        multiply_covered=int(np.count_nonzero(hits > 1)),
    )
    if bad.size:
        k = int(bad[0])
        report.counterexample = (int(X[k]), int(Y[k]))
        report.counterexample_hits = int(hits[k])
        logger.warning("partition check failed for %s at %s (%d hits)",
                       f, report.counterexample, report.counterexample_hits)
    return report
