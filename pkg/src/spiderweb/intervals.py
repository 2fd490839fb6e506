"""Outward-rounded interval arithmetic on numpy arrays.

An :class:`Interval` holds two float64 arrays ``lo <= hi`` of equal shape and
broadcasts like numpy.  Every arithmetic operation returns an enclosure of the
exact real result: endpoints are computed with correctly rounded IEEE-754
double operations and then pushed one representable step away from the
interval with ``nextafter``.  Scalars are 0-d arrays.

Cosines of rational multiples of 2*pi are enclosed by high-precision
evaluation rounded outward to doubles (exact for angles whose reduced
denominator is 1, 2, 3, 4 or 6), so every enclosure is at most two units in
the last place wide.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath
import numpy as np


class IntervalError(ValueError):
    pass


class DivisionByZeroInterval(IntervalError):
    pass


class NegativeSqrt(IntervalError):
    pass


_NEG_INF = -np.inf
_POS_INF = np.inf


def _down(x):
    return np.nextafter(x, _NEG_INF)


def _up(x):
    return np.nextafter(x, _POS_INF)


def pairwise_sum(a, axis, rounder=None):
    """Pairwise (halving-tree) sum, optionally with a directed rounding step
    applied after every addition.  Both scalar kinds use this same tree so the
    float result always lies inside the interval enclosure."""
    a = np.moveaxis(np.asarray(a, dtype=np.float64), axis, 0)
    if a.shape[0] == 0:
        return np.zeros(a.shape[1:])
    while a.shape[0] > 1:
        k = a.shape[0]
        if k % 2:
            pad = np.zeros((1,) + a.shape[1:])
            a = np.concatenate([a, pad], axis=0)
            k += 1
        s = a[0:k:2] + a[1:k:2]
        a = s if rounder is None else rounder(s)
    return a[0]


def powi_tree(x, p, *, mul, square):
    """x**p for integer p >= 1 via a fixed square-and-multiply tree."""
    if p < 1 or p != int(p):
        raise ValueError(f"integer power must be >= 1, got {p}")
    p = int(p)
    if p == 1:
        return x
    if p % 2 == 0:
        return powi_tree(square(x), p // 2, mul=mul, square=square)
    return mul(x, powi_tree(square(x), (p - 1) // 2, mul=mul, square=square))


class Interval:
    """Closed interval [lo, hi] with outward-rounded arithmetic."""

    __slots__ = ("lo", "hi")

    # make numpy defer to our reflected operators
    __array_ufunc__ = None
    __array_priority__ = 1000

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=np.float64)
        hi = lo if hi is None else np.asarray(hi, dtype=np.float64)
        lo, hi = np.broadcast_arrays(lo, hi)
        if not np.all(lo <= hi):
            raise IntervalError("interval endpoints out of order (lo > hi)")
        self.lo = lo.copy() if lo.base is not None else lo
        self.hi = hi.copy() if hi.base is not None else hi

    @classmethod
    def _make(cls, lo, hi):
        iv = object.__new__(cls)
        iv.lo = lo
        iv.hi = hi
        return iv

    @classmethod
    def point(cls, x):
        x = np.asarray(x, dtype=np.float64)
        return cls._make(x, x)

    # -- introspection ----------------------------------------------------

    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    def __len__(self):
        return len(self.lo)

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __getitem__(self, idx):
        return Interval._make(self.lo[idx], self.hi[idx])

    def width(self):
        return self.hi - self.lo

    def mid(self):
        return 0.5 * (self.lo + self.hi)

    def mag(self):
        """Exact upper bound of |x| over the interval."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self):
        """Exact lower bound of |x| over the interval."""
        m = np.minimum(np.abs(self.lo), np.abs(self.hi))
        return np.where((self.lo <= 0.0) & (self.hi >= 0.0), 0.0, m)

    def contains(self, x):
        x = np.asarray(x, dtype=np.float64)
        return (self.lo <= x) & (x <= self.hi)

    def contains_zero(self):
        return (self.lo <= 0.0) & (self.hi >= 0.0)

    def intersect(self, other):
        other = _coerce(other)
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if not np.all(lo <= hi):
            raise IntervalError("empty intersection")
        return Interval._make(lo, hi)

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        return Interval._make(-self.hi, -self.lo)

    def __add__(self, other):
        o = _coerce(other)
        return Interval._make(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        return Interval._make(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        return _coerce(other).__sub__(self)

    def __mul__(self, other):
        o = _coerce(other)
        p1 = self.lo * o.lo
        p2 = self.lo * o.hi
        p3 = self.hi * o.lo
        p4 = self.hi * o.hi
        lo = _down(np.minimum(np.minimum(p1, p2), np.minimum(p3, p4)))
        hi = _up(np.maximum(np.maximum(p1, p2), np.maximum(p3, p4)))
        return Interval._make(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if np.any(o.contains_zero()):
            raise DivisionByZeroInterval("divisor interval contains zero")
        q1 = self.lo / o.lo
        q2 = self.lo / o.hi
        q3 = self.hi / o.lo
        q4 = self.hi / o.hi
        lo = _down(np.minimum(np.minimum(q1, q2), np.minimum(q3, q4)))
        hi = _up(np.maximum(np.maximum(q1, q2), np.maximum(q3, q4)))
        return Interval._make(lo, hi)

    def __rtruediv__(self, other):
        return _coerce(other).__truediv__(self)

    # -- reductions --------------------------------------------------------

    def sum(self, axis=-1):
        lo = pairwise_sum(self.lo, axis, rounder=_down)
        hi = pairwise_sum(self.hi, axis, rounder=_up)
        return Interval._make(np.asarray(lo), np.asarray(hi))


def _coerce(x):
    if isinstance(x, Interval):
        return x
    return Interval.point(x)


#: A scalar interval is simply a 0-d Interval.
IntervalScalar = Interval


def interval(lo, hi=None):
    """Build an interval (point interval when ``hi`` is omitted)."""
    return Interval(lo, hi)


def sqrt(x):
    if not isinstance(x, Interval):
        x = Interval.point(x)
    if np.any(x.lo < 0.0):
        raise NegativeSqrt("sqrt of an interval with negative lower endpoint")
    lo = np.maximum(_down(np.sqrt(x.lo)), 0.0)
    hi = _up(np.sqrt(x.hi))
    return Interval._make(lo, hi)


def square(x):
    if not isinstance(x, Interval):
        x = Interval.point(x)
    lo_abs = x.mig()
    hi_abs = x.mag()
    return Interval._make(_down(lo_abs * lo_abs), _up(hi_abs * hi_abs))


def _mul(a, b):
    return a * b


def powi(x, p):
    """x**p for integer p >= 0 (p = 0 gives the exact point interval 1)."""
    if p == 0:
        one = np.ones(np.shape(x.lo) if isinstance(x, Interval) else np.shape(x))
        return Interval.point(one)
    return powi_tree(_coerce(x), p, mul=_mul, square=square)


def pow_half(x, p):
    """x**(p/2) for odd positive p, computed as sqrt(x)**p."""
    if p % 2 == 0:
        raise ValueError("pow_half expects an odd exponent numerator")
    return powi(sqrt(x), p)


def vector_sup_norm(v: Interval) -> float:
    """Rigorous upper bound of the sup norm of an interval vector."""
    return float(np.max(v.mag()))


def matrix_sup_norm(m: Interval) -> float:
    """Rigorous upper bound of the operator sup norm (max row sum) of an
    interval matrix."""
    row = pairwise_sum(m.mag(), axis=1, rounder=_up)
    return float(np.max(row))


def matvec(a: np.ndarray, v: Interval) -> Interval:
    """Enclosure of A @ v for a float matrix A (treated as exact)."""
    prod = Interval.point(np.asarray(a, dtype=np.float64)) * v[None, :]
    return prod.sum(axis=1)


# -- enclosures of pi and of cos(2*pi*k/l) ---------------------------------

def _pi_bounds():
    with mpmath.workdps(40):
        f = float(mpmath.pi)
    return _one_ulp_bracket(f)


def _one_ulp_bracket(f):
    return float(np.nextafter(f, _NEG_INF)), float(np.nextafter(f, _POS_INF))


#: cos(2*pi*num/den) is exact when the reduced fraction has one of these
#: denominators.
_EXACT_COS = {
    (0, 1): 1.0,
    (1, 2): -1.0,
    (1, 4): 0.0,
    (3, 4): 0.0,
    (1, 3): -0.5,
    (2, 3): -0.5,
    (1, 6): 0.5,
    (5, 6): 0.5,
}


@lru_cache(maxsize=None)
def _cos_two_pi_data(num: int, den: int):
    """(lo, nearest double, hi) for cos(2*pi*num/den)."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    num %= den
    g = math.gcd(num, den)
    num //= g
    den //= g
    exact = _EXACT_COS.get((num, den))
    if exact is not None:
        return exact, exact, exact
    # 40 digits leave ~23 guard digits beyond double precision, so the
    # rounded double is within one representable step of the true cosine
    with mpmath.workdps(40):
        f = float(mpmath.cos(2 * mpmath.pi * mpmath.mpf(num) / den))
    lo, hi = _one_ulp_bracket(f)
    return max(lo, -1.0), f, min(hi, 1.0)


def cos_two_pi(num: int, den: int) -> Interval:
    """Enclosure of cos(2*pi*num/den) for exact integers num, den."""
    lo, _, hi = _cos_two_pi_data(num, den)
    return Interval(lo, hi)


def cos_two_pi_float(num: int, den: int) -> float:
    """Correctly rounded double inside the matching interval enclosure."""
    return _cos_two_pi_data(num, den)[1]


PI = Interval(*_pi_bounds())
