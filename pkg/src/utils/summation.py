"""
Summation - Compensated accumulation and ordered block reduction

Results must not depend on the number of worker threads, so work is split
into fixed blocks, evaluated with an order-preserving map and folded in
block order with a Neumaier accumulator.
"""

from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, List, Sequence, TypeVar, Union

import numpy as np

T = TypeVar('T')
R = TypeVar('R')

Number = Union[float, complex, np.ndarray]


def _neumaier(total: np.ndarray, comp: np.ndarray, value: np.ndarray):
    new_total = total + value
    comp = comp + np.where(np.abs(total) >= np.abs(value),
                           (total - new_total) + value,
                           (value - new_total) + total)
    return new_total, comp


class CompensatedSum(object):
    """
    Neumaier accumulator for real or complex scalars and arrays.

    Real and imaginary parts carry separate running compensations.
    """

    def __init__(self, shape=()):
        self.reset(shape)

    def reset(self, shape=()):
        self._shape = shape
        self._re = np.zeros(shape)
        self._re_comp = np.zeros(shape)
        self._im = np.zeros(shape)
        self._im_comp = np.zeros(shape)
        self.count = 0

    def add(self, item: Number) -> 'CompensatedSum':
        value = np.asarray(item, dtype=complex)
        self._re, self._re_comp = _neumaier(self._re, self._re_comp, value.real)
        self._im, self._im_comp = _neumaier(self._im, self._im_comp, value.imag)
        self.count += 1
        return self

    def merge(self, other: 'CompensatedSum') -> 'CompensatedSum':
        self._re, self._re_comp = _neumaier(self._re, self._re_comp, other._re)
        self._re, self._re_comp = _neumaier(self._re, self._re_comp, other._re_comp)
        self._im, self._im_comp = _neumaier(self._im, self._im_comp, other._im)
        self._im, self._im_comp = _neumaier(self._im, self._im_comp, other._im_comp)
        self.count += other.count
        return self

    def value(self) -> Number:
        result = (self._re + self._re_comp) + 1j * (self._im + self._im_comp)
        if self._shape == ():
            return complex(result)
        return result


def compensated_total(items: Iterable[Number]) -> complex:
    acc = CompensatedSum()
    for item in items:
        acc.add(item)
    return acc.value()


def ordered_map(func: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """
    Apply func to every item, results in item order.

    Args:
        func: Pure function of one block description
        items: Fixed block descriptions
        threads: Worker count; 1 runs inline

    Returns:
        List of results aligned with items
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPool(min(threads, len(items))) as pool:
        return pool.map(func, items)
