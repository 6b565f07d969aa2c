"""
Extrapolation - Limits of truncated sums from a ladder of truncation levels

A truncated sum S(L) is modelled as S + sum_k c_k L^{-q_k} (log L)^{l_k};
the limit S is solved for on the largest levels and compared with the same
fit one level lower to estimate the remaining error.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

Column = Tuple[complex, int]

BOUND_SAFETY = 2.0
ROUNDING_FLOOR = 1e-15


@dataclass(frozen=True)
class Extrapolation:
    value: complex
    bound: float
    columns: Tuple[Column, ...]


def correction_columns(exponents: Sequence[complex], count: int = 3) -> List[Column]:
    """
    Correction terms for a tail with leading decay exponents.

    Each distinct exponent q gives L^{-q}, and so does every integer step
    above the smallest one. An exponent reached by several suffixes, or
    lying a whole number of steps above a smaller suffix exponent, also
    gets L^{-q} log L: the inner sums of the smaller suffix diverge
    logarithmically at exactly that order. Columns are ordered by
    Re(q), the log column after its power.

    Args:
        exponents: Decay exponents (e.g. one per suffix of a nested sum)
        count: Number of correction columns

    Returns:
        List of (q, log_power) pairs
    """
    ordered = sorted(exponents, key=lambda q: (complex(q).real, complex(q).imag))
    distinct: List[complex] = []
    logged: List[complex] = []
    for q in ordered:
        below = [s for s in distinct if _integer_step(s, q)]
        if below:
            if not any(_same(q, s) for s in logged):
                logged.append(below[0] if _same(below[0], q) else q)
            if any(_same(q, s) for s in distinct):
                continue
        distinct.append(q)

    columns: List[Column] = [(q, 0) for q in distinct] + [(q, 1) for q in logged]
    base = ordered[0]
    for step in range(1, count + 1):
        q = base + step
        if not any(_same(q, s) for s in distinct):
            distinct.append(q)
            columns.append((q, 0))
    columns.sort(key=lambda c: (complex(c[0]).real, complex(c[0]).imag, c[1]))
    return columns[:count]


def _same(a: complex, b: complex) -> bool:
    return abs(complex(a) - complex(b)) < 1e-9


def _integer_step(low: complex, high: complex) -> bool:
    """high - low is a nonnegative integer."""
    gap = complex(high) - complex(low)
    return abs(gap.imag) < 1e-9 and gap.real > -1e-9 and abs(gap.real - round(gap.real)) < 1e-9


def fit_limit(levels: Sequence[float], values: Sequence[complex],
              columns: Sequence[Column]) -> complex:
    """
    Solve S(L_k) = S + sum_c a_c L_k^{-q_c} (log L_k)^{l_c} for S.

    Args:
        levels: Truncation levels, len(columns) + 1 of them
        values: S(L_k) at those levels
        columns: Correction terms

    Returns:
        The fitted limit S
    """
    levels = np.asarray(levels, dtype=float)
    x = levels / levels.max()
    rows = [np.ones_like(x, dtype=complex)]
    for q, log_power in columns:
        col = np.power(x, -complex(q))
        if log_power:
            col = col * np.log(x) ** log_power
        rows.append(col)
    matrix = np.stack(rows, axis=1)
    rhs = np.asarray(values, dtype=complex)
    try:
        coeffs = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError:
        coeffs = np.linalg.lstsq(matrix, rhs, rcond=None)[0]
    return complex(coeffs[0])


def extrapolate(levels: Sequence[float], values: Sequence[complex],
                columns: Sequence[Column]) -> Extrapolation:
    """
    Fit on the largest len(columns)+1 levels; bound by the shift to the
    next lower window.

    Args:
        levels: Levels in decreasing order, len(columns) + 2 of them
        values: Truncated sums at those levels

    Returns:
        Extrapolation(value, bound, columns)
    """
    k = len(columns) + 1
    if len(levels) < k + 1:
        raise ValueError(f"need {k + 1} levels for {len(columns)} correction columns")
    upper = fit_limit(levels[:k], values[:k], columns)
    lower = fit_limit(levels[1:k + 1], values[1:k + 1], columns)
    bound = BOUND_SAFETY * abs(upper - lower) + ROUNDING_FLOOR * max(1.0, abs(upper))
    logger.debug("extrapolation over %s: %r (bound %.3g)", list(levels), upper, bound)
    return Extrapolation(upper, float(bound), tuple(columns))


def richardson(small: complex, large: complex, ratio: float, exponent: float) -> complex:
    """Classic two-level Richardson step for S(L) = S + c L^{-exponent}."""
    factor = ratio ** exponent
    return (factor * large - small) / (factor - 1.0)
