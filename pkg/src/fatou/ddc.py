"""Double-double arithmetic: real and complex scalars with ~31 significant digits.

Used when small divisors push the linearization recursion past what binary64
can resolve.  Values are unevaluated sums hi + lo with |lo| <= 0.5 ulp(hi).
"""

from __future__ import annotations

import math

_SPLITTER = 134217729.0  # 2^27 + 1


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float):
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def _split(a: float):
    c = _SPLITTER * a
    big = c - a
    hi = c - big
    return hi, a - hi


def _two_prod(a: float, b: float):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


class DD:
    """Double-double real number."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        self.hi = float(hi)
        self.lo = float(lo)

    @staticmethod
    def of(x) -> "DD":
        if isinstance(x, DD):
            return x
        if not isinstance(x, (int, float)):
            raise TypeError(f"cannot coerce {type(x).__name__} to DD")
        return DD(float(x))

    def __float__(self) -> float:
        return self.hi + self.lo

    def __repr__(self) -> str:
        return f"DD({self.hi!r}, {self.lo!r})"

    def __neg__(self) -> "DD":
        return DD(-self.hi, -self.lo)

    def __add__(self, other) -> "DD":
        o = DD.of(other)
        s, e = _two_sum(self.hi, o.hi)
        t, f = _two_sum(self.lo, o.lo)
        e += t
        s, e = _quick_two_sum(s, e)
        e += f
        hi, lo = _quick_two_sum(s, e)
        return DD(hi, lo)

    __radd__ = __add__

    def __sub__(self, other) -> "DD":
        return self + (-DD.of(other))

    def __rsub__(self, other) -> "DD":
        return DD.of(other) + (-self)

    def __mul__(self, other) -> "DD":
        o = DD.of(other)
        p, e = _two_prod(self.hi, o.hi)
        e += self.hi * o.lo + self.lo * o.hi
        hi, lo = _quick_two_sum(p, e)
        return DD(hi, lo)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DD":
        o = DD.of(other)
        q1 = self.hi / o.hi
        r = self - o * q1
        q2 = r.hi / o.hi
        r = r - o * q2
        q3 = r.hi / o.hi
        hi, lo = _quick_two_sum(q1, q2)
        return DD(hi, lo) + q3

    def __rtruediv__(self, other) -> "DD":
        return DD.of(other) / self

    def __abs__(self) -> "DD":
        return -self if self.hi < 0 or (self.hi == 0 and self.lo < 0) else self

    def __lt__(self, other) -> bool:
        o = DD.of(other)
        return self.hi < o.hi or (self.hi == o.hi and self.lo < o.lo)

    def __le__(self, other) -> bool:
        o = DD.of(other)
        return self.hi < o.hi or (self.hi == o.hi and self.lo <= o.lo)

    def __eq__(self, other) -> bool:
        o = DD.of(other)
        return self.hi == o.hi and self.lo == o.lo

    def sqrt(self) -> "DD":
        if self.hi == 0 and self.lo == 0:
            return DD(0.0)
        x = math.sqrt(self.hi)
        # one Newton step in double-double
        x_dd = DD(x)
        return (x_dd + self / x_dd) * 0.5

    def is_finite(self) -> bool:
        return math.isfinite(self.hi) and math.isfinite(self.lo)


class DDComplex:
    """Complex number with double-double components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0.0, im=0.0):
        self.re = DD.of(re)
        self.im = DD.of(im)

    @staticmethod
    def of(x) -> "DDComplex":
        if isinstance(x, DDComplex):
            return x
        if isinstance(x, DD):
            return DDComplex(x, DD(0.0))
        if isinstance(x, complex):
            return DDComplex(DD(x.real), DD(x.imag))
        if not isinstance(x, (int, float)):
            raise TypeError(f"cannot coerce {type(x).__name__} to DDComplex")
        return DDComplex(DD(float(x)), DD(0.0))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"DDComplex({complex(self)!r})"

    def __neg__(self) -> "DDComplex":
        return DDComplex(-self.re, -self.im)

    def __add__(self, other) -> "DDComplex":
        o = DDComplex.of(other)
        return DDComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other) -> "DDComplex":
        o = DDComplex.of(other)
        return DDComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other) -> "DDComplex":
        return DDComplex.of(other) - self

    def __mul__(self, other) -> "DDComplex":
        o = DDComplex.of(other)
        return DDComplex(self.re * o.re - self.im * o.im,
                         self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DDComplex":
        o = DDComplex.of(other)
        den = o.re * o.re + o.im * o.im
        return DDComplex((self.re * o.re + self.im * o.im) / den,
                         (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other) -> "DDComplex":
        return DDComplex.of(other) / self

    def __eq__(self, other) -> bool:
        o = DDComplex.of(other)
        return self.re == o.re and self.im == o.im

    def abs2(self) -> DD:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return float(self.abs2().sqrt())

    def is_finite(self) -> bool:
        return self.re.is_finite() and self.im.is_finite()


DD_ZERO = DD(0.0)
DDC_ZERO = DDComplex(0.0, 0.0)
DDC_ONE = DDComplex(1.0, 0.0)
