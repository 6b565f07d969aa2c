"""
Field Service - Exact arithmetic in Q and quadratic number fields

Elements are stored as integer coordinates (x, y) in the integral basis
{1, w}, where w = sqrt(d) or (1 + sqrt(d))/2 when d = 1 mod 4. Arithmetic is
checked against the 64-bit range, norms against the 128-bit range.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from services.errors import FieldOverflowError, PreconditionError, UnsupportedFieldError

logger = logging.getLogger(__name__)

INT64_MAX = 2 ** 63 - 1
INT128_MAX = 2 ** 127 - 1

# Imaginary quadratic fields with class number one
IMAGINARY_CLASS_NUMBER_ONE = (-1, -2, -3, -7, -11, -19, -43, -67, -163)

# Real quadratic fields Q(sqrt(d)), d < 100, with class number one
REAL_CLASS_NUMBER_ONE = (
    2, 3, 5, 6, 7, 11, 13, 14, 17, 19, 21, 22, 23, 29, 31, 33, 37, 38, 41,
    43, 46, 47, 53, 57, 59, 61, 62, 67, 69, 71, 73, 77, 83, 86, 89, 93, 94, 97,
)

PELL_SEARCH_LIMIT = 10 ** 6


def _checked(value: int) -> int:
    if -INT64_MAX - 1 <= value <= INT64_MAX:
        return value
    raise FieldOverflowError(f"coordinate {value} exceeds the 64-bit range")


def _is_squarefree(d: int) -> bool:
    n = abs(d)
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class QuadField:
    """
    Q (d is None) or the quadratic field Q(sqrt(d)).

    The embedding convention is fixed: sigma_1 sends sqrt(d) to the positive
    root (real fields) or to the root with positive imaginary part.
    """

    d: Optional[int] = None

    def __post_init__(self):
        if self.d is None:
            return
        if not isinstance(self.d, int) or isinstance(self.d, bool):
            raise PreconditionError(f"d must be an integer, got {self.d!r}")
        if self.d in (0, 1):
            raise PreconditionError("d must not be 0 or 1")
        if not _is_squarefree(self.d):
            raise PreconditionError(f"d = {self.d} is not squarefree")

    @classmethod
    def rationals(cls) -> 'QuadField':
        return cls(None)

    @classmethod
    def quadratic(cls, d: int) -> 'QuadField':
        return cls(d)

    @property
    def is_rational(self) -> bool:
        return self.d is None

    @property
    def is_real(self) -> bool:
        return self.d is not None and self.d > 0

    @property
    def is_imaginary(self) -> bool:
        return self.d is not None and self.d < 0

    @property
    def degree(self) -> int:
        return 1 if self.d is None else 2

    @property
    def signature(self) -> str:
        if self.is_rational:
            return "rational"
        return "real" if self.is_real else "imaginary"

    @property
    def omega_minpoly(self) -> Tuple[int, int]:
        """(c0, c1) with w^2 = c0 + c1*w."""
        if self.d is None:
            return 0, 0
        if self.d % 4 == 1:
            return (self.d - 1) // 4, 1
        return self.d, 0

    @property
    def discriminant(self) -> int:
        if self.d is None:
            return 1
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def basis_labels(self) -> List[str]:
        if self.d is None:
            return ["1"]
        if self.d % 4 == 1:
            return ["1", f"(1+sqrt({self.d}))/2"]
        return ["1", f"sqrt({self.d})"]

    @cached_property
    def omega_embeddings(self) -> Tuple[complex, ...]:
        """Images of w under sigma_1, sigma_2."""
        if self.d is None:
            return ()
        root = cmath.sqrt(self.d) if self.d < 0 else complex(math.sqrt(self.d))
        if self.d % 4 == 1:
            return ((1 + root) / 2, (1 - root) / 2)
        return (root, -root)

    def literal(self) -> str:
        return "Q" if self.d is None else f"d={self.d}"

    def __str__(self) -> str:
        return "Q" if self.d is None else f"Q(sqrt({self.d}))"

    def element(self, x: int, y: int = 0) -> 'FieldElement':
        return FieldElement(self, int(x), int(y))

    def one(self) -> 'FieldElement':
        return self.element(1, 0)

    def omega(self) -> 'FieldElement':
        if self.d is None:
            raise UnsupportedFieldError("Q has no second basis element")
        return self.element(0, 1)

    def norm_array(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vectorised norm on float coordinates (exact below 2**53)."""
        x = np.asarray(x, dtype=float)
        if self.d is None:
            return x
        y = np.asarray(y, dtype=float)
        c0, c1 = self.omega_minpoly
        return x * x + c1 * x * y - c0 * y * y

    def embed_arrays(self, x: np.ndarray, y: np.ndarray) -> List[np.ndarray]:
        """
        Vectorised embeddings sigma_1..sigma_n of the elements x + y*w.

        Args:
            x: First coordinates (any broadcastable shape)
            y: Second coordinates (ignored for Q)

        Returns:
            List of n arrays; real dtype for Q and real fields, complex for
            imaginary fields. The smaller of the two real embeddings is taken
            as N(alpha)/sigma_other(alpha) to avoid cancellation.
        """
        x = np.asarray(x, dtype=float)
        if self.d is None:
            return [x]
        y = np.asarray(y, dtype=float)
        w1, w2 = self.omega_embeddings
        if self.is_imaginary:
            s1 = x + y * w1
            return [s1, np.conj(s1)]
        s1 = x + y * w1.real
        s2 = x + y * w2.real
        norm = self.norm_array(x, y)
        with np.errstate(divide='ignore', invalid='ignore'):
            alt1 = np.where(s2 != 0, norm / np.where(s2 != 0, s2, 1.0), s1)
            alt2 = np.where(s1 != 0, norm / np.where(s1 != 0, s1, 1.0), s2)
        small1 = np.abs(s1) < np.abs(s2)
        return [np.where(small1, alt1, s1), np.where(small1, s2, alt2)]


@dataclass(frozen=True)
class FieldElement:
    """Algebraic integer x + y*w with exact integer coordinates."""

    field: QuadField
    x: int
    y: int = 0

    def __post_init__(self):
        _checked(self.x)
        _checked(self.y)
        if self.field.is_rational and self.y != 0:
            raise PreconditionError("elements of Q have y = 0")

    @property
    def coordinates(self) -> Tuple[int, int]:
        return self.x, self.y

    def _coerce(self, other: Union['FieldElement', int]) -> 'FieldElement':
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise PreconditionError("elements belong to different fields")
            return other
        if isinstance(other, int):
            return FieldElement(self.field, other, 0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, _checked(self.x + other.x), _checked(self.y + other.y))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, _checked(-self.x), _checked(-self.y))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        c0, c1 = self.field.omega_minpoly
        x = self.x * other.x + c0 * self.y * other.y
        y = self.x * other.y + self.y * other.x + c1 * self.y * other.y
        return FieldElement(self.field, _checked(x), _checked(y))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            if not self.is_unit():
                raise PreconditionError("negative powers are only defined for units")
            return self.inverse() ** (-k)
        result = self.field.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def conjugate(self) -> 'FieldElement':
        if self.field.is_rational:
            return self
        _, c1 = self.field.omega_minpoly
        return FieldElement(self.field, _checked(self.x + c1 * self.y), _checked(-self.y))

    def norm(self) -> int:
        if self.field.is_rational:
            return self.x
        c0, c1 = self.field.omega_minpoly
        value = self.x * self.x + c1 * self.x * self.y - c0 * self.y * self.y
        if abs(value) > INT128_MAX:
            raise FieldOverflowError(f"norm of {self} exceeds the 128-bit range")
        return value

    def trace(self) -> int:
        if self.field.is_rational:
            return self.x
        _, c1 = self.field.omega_minpoly
        return 2 * self.x + c1 * self.y

    def multiplication_matrix(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Matrix of multiplication by self on the basis (1, w), columns are images."""
        if self.field.is_rational:
            raise UnsupportedFieldError("multiplication matrix is 2x2 for quadratic fields only")
        c0, c1 = self.field.omega_minpoly
        return ((self.x, c0 * self.y), (self.y, self.x + c1 * self.y))

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def inverse(self) -> 'FieldElement':
        n = self.norm()
        if abs(n) != 1:
            raise PreconditionError(f"{self} is not a unit")
        conj = self.conjugate()
        return conj if n == 1 else -conj

    def embed(self, i: int) -> complex:
        """sigma_i(self), 1-based index."""
        n = self.field.degree
        if not 1 <= i <= n:
            raise PreconditionError(f"embedding index {i} out of range 1..{n}")
        return self.embeddings()[i - 1]

    def embeddings(self) -> Tuple[complex, ...]:
        if self.field.is_rational:
            return (complex(self.x),)
        w1, w2 = self.field.omega_embeddings
        s1 = self.x + self.y * w1
        s2 = self.x + self.y * w2
        if self.field.is_real:
            norm = self.norm()
            if abs(s1) < abs(s2) and s2 != 0:
                s1 = norm / s2
            elif abs(s2) < abs(s1) and s1 != 0:
                s2 = norm / s1
            return (complex(s1.real), complex(s2.real))
        return (complex(s1), complex(s1).conjugate())

    def __str__(self) -> str:
        return f"{self.x},{self.y}" if not self.field.is_rational else str(self.x)


# Module-level operations

def embed(f: QuadField, alpha: FieldElement, i: int) -> complex:
    """
    Evaluate sigma_i(alpha) in binary64.

    Args:
        f: The field
        alpha: Element of f
        i: Embedding index, 1 <= i <= degree

    Returns:
        Complex value of the embedding
    """
    if alpha.field != f:
        raise PreconditionError("element does not belong to the field")
    return alpha.embed(i)


def norm(f: QuadField, alpha: FieldElement) -> int:
    """Exact norm N_{K/Q}(alpha)."""
    if alpha.field != f:
        raise PreconditionError("element does not belong to the field")
    return alpha.norm()


def trace(f: QuadField, alpha: FieldElement) -> int:
    """Exact trace Tr_{K/Q}(alpha)."""
    if alpha.field != f:
        raise PreconditionError("element does not belong to the field")
    return alpha.trace()


def fundamental_unit(f: QuadField) -> FieldElement:
    """
    Fundamental unit eps_0 > 1 (under sigma_1) of a real quadratic field.

    Found by the smallest v >= 1 solving u^2 - d v^2 = -1 or +1 (or -4/+4
    when d = 1 mod 4), trying the negative norm first so that a norm -1
    unit wins when both exist for the same v.

    Args:
        f: A real quadratic field

    Returns:
        The fundamental unit as a field element
    """
    if not f.is_real:
        raise UnsupportedFieldError(
            f"{f} has a finite unit group, use units() instead")
    d = f.d
    scale = 4 if d % 4 == 1 else 1
    for v in range(1, PELL_SEARCH_LIMIT + 1):
        base = d * v * v
        for target in (base - scale, base + scale):
            if target <= 0:
                continue
            u = math.isqrt(target)
            if u * u != target:
                continue
            if scale == 4:
                return f.element((u - v) // 2, v)
            return f.element(u, v)
    raise UnsupportedFieldError(
        f"no unit found for {f} with v <= {PELL_SEARCH_LIMIT}")


def totally_positive_unit(f: QuadField) -> FieldElement:
    """Smallest totally positive unit > 1: eps_0 if N(eps_0) = 1, else eps_0^2."""
    eps0 = fundamental_unit(f)
    return eps0 if eps0.norm() == 1 else eps0 * eps0


def units(f: QuadField) -> List[FieldElement]:
    """
    Explicit unit list for Q and imaginary quadratic fields.

    Returns:
        The roots of unity of f, as successive powers of a generator
    """
    if f.is_real:
        raise UnsupportedFieldError(
            f"{f} has infinitely many units, use fundamental_unit() instead")
    return roots_of_unity(f)


def roots_of_unity(f: QuadField) -> List[FieldElement]:
    if f.d == -1:
        gen = f.omega()
        count = 4
    elif f.d == -3:
        gen = f.omega()
        count = 6
    else:
        return [f.one(), -f.one()]
    result = [f.one()]
    for _ in range(count - 1):
        result.append(result[-1] * gen)
    return result


def class_number_one(f: QuadField) -> bool:
    if f.is_rational:
        return True
    if f.is_imaginary:
        return f.d in IMAGINARY_CLASS_NUMBER_ONE
    return f.d in REAL_CLASS_NUMBER_ONE


def coordinate_determinant(vectors: Sequence[Tuple[int, int]]) -> int:
    (a, b), (c, e) = vectors
    return a * e - b * c
