"""Truncated power-series arithmetic over complex coefficients.

Two series types are provided:

* :class:`Series2` -- a scalar-valued series in two variables (z, w),
  truncated at a fixed total degree.  Coefficients are stored densely in a
  triangular array ordered by total degree and, within a degree, by
  descending z-power (graded-lex).  A pair of Series2 holds the jet of a
  C^2 -> C^2 map.
* :class:`Series1C2` -- a series in one variable with C^2-valued
  coefficients.  This is the shape of a parametrized curve through the
  origin and of the linearizing series solved for elsewhere.

Truncation is exact: an operation on series of order D retains every
coefficient of total degree <= D and nothing else, so results can be
compared against brute-force oracles coefficient by coefficient.

Coefficient arrays are numpy complex128 by default.  Passing
``mode="dd"`` to the constructors switches to object arrays of
:class:`fatou.ddc.DDComplex` (double-double), for situations where small
divisors amplify rounding; all operations are dtype-generic.

NaN/Inf never enter a series: constructors and arithmetic validate and
raise :class:`NonFiniteError` instead of propagating.

Every operation is pure and never mutates its operands, so series can be
shared across threads and evaluated in parallel; coefficient arrays should
be treated as frozen once a series has been handed off.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

import numpy as np

from .ddc import DDComplex, DDC_ZERO

__all__ = [
    "SeriesError",
    "NonFiniteError",
    "OrderMismatchError",
    "Series2",
    "Series1C2",
    "series2_mul",
    "series2_exp",
    "series1_compose_map",
    "series1_eval",
    "tri_size",
    "tri_index",
    "series1_to_json",
    "series1_from_json",
    "jet_to_json",
    "jet_from_json",
]


class SeriesError(ValueError):
    pass


class NonFiniteError(SeriesError):
    """A NaN or Inf tried to enter a series."""


class OrderMismatchError(SeriesError):
    """Binary operation on series of different truncation orders."""


def tri_size(order: int) -> int:
    """Number of monomials of total degree <= order in two variables."""
    return (order + 1) * (order + 2) // 2


def tri_index(l1: int, l2: int) -> int:
    """Flat index of the monomial z^l1 w^l2 (graded, then ascending w-power)."""
    d = l1 + l2
    return d * (d + 1) // 2 + l2


def _is_dd(arr: np.ndarray) -> bool:
    return arr.dtype == object


def _zeros(n: int, dd: bool) -> np.ndarray:
    if dd:
        return np.array([DDC_ZERO] * n, dtype=object)
    return np.zeros(n, dtype=np.complex128)


def _scalar_of(x, dd: bool):
    return DDComplex.of(x) if dd else complex(x)


def _finite(arr: np.ndarray) -> bool:
    if _is_dd(arr):
        return all(c.is_finite() for c in arr)
    return bool(np.isfinite(arr.view(np.float64)).all())


def _check_finite(arr: np.ndarray, where: str) -> None:
    if not _finite(arr):
        raise NonFiniteError(f"non-finite coefficient in {where}")


def _mul1(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """Product of univariate coefficient arrays, truncated at `order`."""
    full = np.convolve(a, b)
    return full[: order + 1]


class Series2:
    """Dense truncated power series in (z, w) with scalar complex coefficients."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: np.ndarray | Sequence, *, _validate: bool = True):
        if order < 0:
            raise SeriesError("order must be >= 0")
        arr = coeffs if isinstance(coeffs, np.ndarray) else np.asarray(coeffs)
        if len(arr) != tri_size(order):
            raise SeriesError(
                f"coefficient array has length {len(arr)}, expected {tri_size(order)}"
            )
        if _validate:
            _check_finite(arr, "Series2")
        self.order = order
        self.coeffs = arr

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, order: int, mode: str = "double") -> "Series2":
        return cls(order, _zeros(tri_size(order), mode == "dd"), _validate=False)

    @classmethod
    def const(cls, order: int, value, mode: str = "double") -> "Series2":
        s = cls.zero(order, mode)
        s.coeffs[0] = _scalar_of(value, mode == "dd")
        _check_finite(s.coeffs[:1], "Series2.const")
        return s

    @classmethod
    def var_z(cls, order: int, mode: str = "double") -> "Series2":
        s = cls.zero(order, mode)
        s.coeffs[tri_index(1, 0)] = _scalar_of(1.0, mode == "dd")
        return s

    @classmethod
    def var_w(cls, order: int, mode: str = "double") -> "Series2":
        s = cls.zero(order, mode)
        s.coeffs[tri_index(0, 1)] = _scalar_of(1.0, mode == "dd")
        return s

    @property
    def dd(self) -> bool:
        return _is_dd(self.coeffs)

    def copy(self) -> "Series2":
        return Series2(self.order, self.coeffs.copy(), _validate=False)

    # -- access -------------------------------------------------------

    def get(self, l1: int, l2: int):
        """Coefficient of z^l1 w^l2."""
        if l1 < 0 or l2 < 0 or l1 + l2 > self.order:
            raise SeriesError(f"monomial ({l1},{l2}) outside truncation order {self.order}")
        return self.coeffs[tri_index(l1, l2)]

    def layer(self, d: int) -> np.ndarray:
        """Homogeneous part of total degree d as a vector over w-powers 0..d."""
        start = d * (d + 1) // 2
        return self.coeffs[start : start + d + 1]

    def truncate(self, new_order: int) -> "Series2":
        if new_order > self.order:
            raise SeriesError("cannot extend a truncated series")
        return Series2(new_order, self.coeffs[: tri_size(new_order)].copy(), _validate=False)

    def pad(self, new_order: int) -> "Series2":
        """Zero-extend to a larger truncation order.

        The new top coefficients are set to 0, which is only correct if the
        caller knows they are unused; see the jet pipeline's working-order
        bookkeeping.
        """
        if new_order < self.order:
            raise SeriesError("pad cannot shrink; use truncate")
        out = _zeros(tri_size(new_order), self.dd)
        out[: len(self.coeffs)] = self.coeffs
        return Series2(new_order, out, _validate=False)

    # -- ring operations ----------------------------------------------

    def _chk(self, other: "Series2") -> None:
        if self.order != other.order:
            raise OrderMismatchError(f"orders differ: {self.order} vs {other.order}")

    def __add__(self, other: "Series2") -> "Series2":
        self._chk(other)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.coeffs + other.coeffs
        _check_finite(out, "Series2.add")
        return Series2(self.order, out, _validate=False)

    def __sub__(self, other: "Series2") -> "Series2":
        self._chk(other)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.coeffs - other.coeffs
        _check_finite(out, "Series2.sub")
        return Series2(self.order, out, _validate=False)

    def __neg__(self) -> "Series2":
        return Series2(self.order, -self.coeffs, _validate=False)

    def scale(self, factor) -> "Series2":
        fac = _scalar_of(factor, self.dd)
        out = self.coeffs * fac
        _check_finite(out, "Series2.scale")
        return Series2(self.order, out, _validate=False)

    def __mul__(self, other):
        if isinstance(other, Series2):
            return series2_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def pow(self, k: int) -> "Series2":
        if k < 0:
            raise SeriesError("negative powers not supported; use inverse()")
        out = Series2.const(self.order, 1.0, "dd" if self.dd else "double")
        for _ in range(k):
            out = series2_mul(out, self)
        return out

    def inverse(self) -> "Series2":
        """Multiplicative inverse; requires a nonzero constant term."""
        dd = self.dd
        c0 = self.coeffs[0]
        if (abs(complex(c0)) if dd else abs(c0)) == 0.0:
            raise SeriesError("inverse of a series with zero constant term")
        D = self.order
        inv0 = _scalar_of(1.0, dd) / c0
        out = _zeros(tri_size(D), dd)
        out[0] = inv0
        for d in range(1, D + 1):
            acc = _zeros(d + 1, dd)
            for k in range(1, d + 1):
                acc = acc + np.convolve(self.layer(k), _layer_of(out, d - k))
            start = d * (d + 1) // 2
            out[start : start + d + 1] = acc * (-inv0)
        _check_finite(out, "Series2.inverse")
        return Series2(D, out, _validate=False)

    # -- evaluation and substitution ------------------------------------

    def eval(self, z, w):
        """Value of the truncated polynomial at the point (z, w)."""
        dd = self.dd
        zz = _scalar_of(z, dd)
        ww = _scalar_of(w, dd)
        zp = [_scalar_of(1.0, dd)]
        wp = [_scalar_of(1.0, dd)]
        for _ in range(self.order):
            zp.append(zp[-1] * zz)
            wp.append(wp[-1] * ww)
        # high degrees first so the small tail terms accumulate before the bulk
        total = _scalar_of(0.0, dd)
        for d in range(self.order, -1, -1):
            lay = self.layer(d)
            for j in range(d + 1):
                total = total + lay[j] * zp[d - j] * wp[j]
        return total if dd else complex(total)

    def compose_linear(self, a, b, c, d) -> "Series2":
        """Substitute z -> a*Z + b*W, w -> c*Z + d*W (degree-preserving)."""
        dd_mode = self.dd
        D = self.order
        lin1 = np.array([_scalar_of(a, dd_mode), _scalar_of(b, dd_mode)],
                        dtype=object if dd_mode else np.complex128)
        lin2 = np.array([_scalar_of(c, dd_mode), _scalar_of(d, dd_mode)],
                        dtype=object if dd_mode else np.complex128)
        one = _zeros(1, dd_mode)
        one[0] = _scalar_of(1.0, dd_mode)
        pow1 = [one]
        pow2 = [one]
        for _ in range(D):
            pow1.append(np.convolve(pow1[-1], lin1))
            pow2.append(np.convolve(pow2[-1], lin2))
        out = _zeros(tri_size(D), dd_mode)
        for deg in range(D + 1):
            lay = self.layer(deg)
            acc = _zeros(deg + 1, dd_mode)
            for l2 in range(deg + 1):
                l1 = deg - l2
                coef = lay[l2]
                if not dd_mode and coef == 0:
                    continue
                acc = acc + np.convolve(pow1[l1], pow2[l2]) * coef
            start = deg * (deg + 1) // 2
            out[start : start + deg + 1] = acc
        _check_finite(out, "Series2.compose_linear")
        return Series2(D, out, _validate=False)

    def shift_div_z1(self, l: int, drop_tol: float = 1e-9) -> "Series2":
        """Exact division by z^l.

        Requires every monomial with z-power < l to vanish (up to roundoff
        `drop_tol` relative to the largest coefficient); the result has
        truncation order reduced by l.
        """
        if l < 0:
            raise SeriesError("shift power must be >= 0")
        if l == 0:
            return self.copy()
        D = self.order
        if D < l:
            raise SeriesError("order too small for the requested division")
        dd = self.dd
        if dd:
            scale = max((abs(c) for c in self.coeffs), default=0.0)
        else:
            scale = float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0
        new_order = D - l
        out = _zeros(tri_size(new_order), dd)
        for l1 in range(D + 1):
            for l2 in range(D + 1 - l1):
                c = self.coeffs[tri_index(l1, l2)]
                mag = abs(c) if dd else abs(c)
                if l1 < l:
                    if mag > drop_tol * max(scale, 1e-300):
                        raise SeriesError(
                            f"series not divisible by z^{l}: monomial ({l1},{l2}) "
                            f"has coefficient of magnitude {mag:.3e}"
                        )
                    continue
                if l1 - l + l2 <= new_order:
                    out[tri_index(l1 - l, l2)] = c
        return Series2(new_order, out, _validate=False)

    def max_coeff_norm(self, min_degree: int = 0) -> float:
        """max |coefficient| over monomials of total degree >= min_degree."""
        best = 0.0
        for d in range(min_degree, self.order + 1):
            for c in self.layer(d):
                best = max(best, abs(c) if self.dd else abs(c))
        return float(best)

    def to_dd(self) -> "Series2":
        if self.dd:
            return self
        out = np.array([DDComplex.of(complex(c)) for c in self.coeffs], dtype=object)
        return Series2(self.order, out, _validate=False)

    def to_complex(self) -> "Series2":
        if not self.dd:
            return self
        out = np.array([complex(c) for c in self.coeffs], dtype=np.complex128)
        return Series2(self.order, out, _validate=False)

    def __repr__(self) -> str:
        return f"Series2(order={self.order}, nnz={sum(1 for c in self.coeffs if abs(complex(c) if self.dd else c) != 0)})"


def _layer_of(flat: np.ndarray, d: int) -> np.ndarray:
    start = d * (d + 1) // 2
    return flat[start : start + d + 1]


def series2_mul(a: Series2, b: Series2) -> Series2:
    """Cauchy product truncated at the common order (bilinear, commutative)."""
    if a.order != b.order:
        raise OrderMismatchError(f"orders differ: {a.order} vs {b.order}")
    D = a.order
    dd = a.dd or b.dd
    aa = a.to_dd() if dd and not a.dd else a
    bb = b.to_dd() if dd and not b.dd else b
    out = _zeros(tri_size(D), dd)
    for d in range(D + 1):
        acc = _zeros(d + 1, dd)
        for d1 in range(d + 1):
            la = aa.layer(d1)
            lb = bb.layer(d - d1)
            acc = acc + np.convolve(la, lb)
        start = d * (d + 1) // 2
        out[start : start + d + 1] = acc
    _check_finite(out, "series2_mul")
    return Series2(D, out, _validate=False)


def series2_exp(a: Series2) -> Series2:
    """exp of a series with zero constant term.

    Uses the derivative relation for the Euler operator z*d/dz + w*d/dw:
    with E = exp(a), the degree-n part satisfies
    n*E_n = sum_{k=1..n} k * a_k * E_{n-k} (homogeneous-layer products),
    which is exact at every retained degree.
    """
    dd = a.dd
    c0 = a.coeffs[0]
    if (abs(complex(c0)) if dd else abs(c0)) != 0.0:
        raise SeriesError("series2_exp requires a zero constant term")
    D = a.order
    out = _zeros(tri_size(D), dd)
    out[0] = _scalar_of(1.0, dd)
    for n in range(1, D + 1):
        acc = _zeros(n + 1, dd)
        for k in range(1, n + 1):
            lay = a.layer(k)
            if not dd and not lay.any():
                continue
            acc = acc + np.convolve(lay * k if not dd else lay * _scalar_of(k, dd),
                                    _layer_of(out, n - k))
        start = n * (n + 1) // 2
        if dd:
            out[start : start + n + 1] = acc * (DDComplex.of(1.0) / DDComplex.of(n))
        else:
            out[start : start + n + 1] = acc / n
    _check_finite(out, "series2_exp")
    return Series2(D, out, _validate=False)


class Series1C2:
    """Truncated series in one variable with C^2-valued coefficients.

    coeffs has shape (order+1, 2); coeffs[k] is the coefficient of w^k.
    """

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs, *, _validate: bool = True):
        if order < 0:
            raise SeriesError("order must be >= 0")
        arr = coeffs if isinstance(coeffs, np.ndarray) else np.asarray(coeffs)
        if arr.shape != (order + 1, 2):
            raise SeriesError(f"coefficient array has shape {arr.shape}, expected {(order + 1, 2)}")
        if _validate:
            _check_finite(arr.ravel(), "Series1C2")
        self.order = order
        self.coeffs = arr

    @classmethod
    def zero(cls, order: int, mode: str = "double") -> "Series1C2":
        dd = mode == "dd"
        if dd:
            arr = np.array([[DDC_ZERO, DDC_ZERO] for _ in range(order + 1)], dtype=object)
        else:
            arr = np.zeros((order + 1, 2), dtype=np.complex128)
        return cls(order, arr, _validate=False)

    @property
    def dd(self) -> bool:
        return _is_dd(self.coeffs)

    def component(self, i: int) -> np.ndarray:
        return self.coeffs[:, i]

    def copy(self) -> "Series1C2":
        return Series1C2(self.order, self.coeffs.copy(), _validate=False)

    def to_complex(self) -> "Series1C2":
        if not self.dd:
            return self
        arr = np.array([[complex(c) for c in row] for row in self.coeffs], dtype=np.complex128)
        return Series1C2(self.order, arr, _validate=False)

    def norms(self) -> np.ndarray:
        """max(|first|, |second|) per coefficient (the max-norm on C^2)."""
        if self.dd:
            return np.array([max(abs(row[0]), abs(row[1])) for row in self.coeffs])
        return np.max(np.abs(self.coeffs), axis=1)

    def __repr__(self) -> str:
        return f"Series1C2(order={self.order})"


def series1_eval(psi: Series1C2, w) -> tuple:
    """Horner evaluation; returns the C^2 value as a pair."""
    if psi.dd:
        ww = DDComplex.of(w)
        v0 = psi.coeffs[psi.order][0]
        v1 = psi.coeffs[psi.order][1]
        for k in range(psi.order - 1, -1, -1):
            v0 = v0 * ww + psi.coeffs[k][0]
            v1 = v1 * ww + psi.coeffs[k][1]
        return (v0, v1)
    ww = complex(w)
    v = psi.coeffs[psi.order].copy()
    for k in range(psi.order - 1, -1, -1):
        v = v * ww + psi.coeffs[k]
    return (complex(v[0]), complex(v[1]))


def _subst_bivariate(P: Series2, u: np.ndarray, v: np.ndarray, order: int, dd: bool) -> np.ndarray:
    """P(u(w), v(w)) truncated at `order`, by nested Horner over the triangle."""
    res = _zeros(order + 1, dd)
    for l1 in range(P.order, -1, -1):
        inner = _zeros(order + 1, dd)
        for l2 in range(P.order - l1, -1, -1):
            inner = _mul1(inner, v, order)
            inner[0] = inner[0] + P.coeffs[tri_index(l1, l2)]
        res = _mul1(res, u, order) + inner
    return res


def series1_compose_map(f_pair: tuple, psi: Series1C2, order: int | None = None) -> Series1C2:
    """Univariate series of F(psi^1(w), psi^2(w)) truncated at psi's order.

    F is given as its jet, a pair of scalar Series2.  psi must vanish at 0
    (psi_0 = (0,0)); otherwise the substitution leaves the domain where the
    truncated jet represents F and an error is raised.
    """
    P, Q = f_pair
    D = psi.order if order is None else order
    if order is not None and order > psi.order:
        raise SeriesError("requested order exceeds psi's order")
    dd = psi.dd or P.dd or Q.dd
    psi_ = psi.to_complex() if not dd and psi.dd else psi
    u = psi_.coeffs[: D + 1, 0]
    v = psi_.coeffs[: D + 1, 1]
    z0 = abs(complex(u[0]) if dd else u[0])
    w0 = abs(complex(v[0]) if dd else v[0])
    if z0 != 0.0 or w0 != 0.0:
        raise SeriesError("series1_compose_map requires psi(0) = (0, 0)")
    if dd:
        P = P.to_dd()
        Q = Q.to_dd()
        if not psi.dd:
            u = np.array([DDComplex.of(complex(x)) for x in u], dtype=object)
            v = np.array([DDComplex.of(complex(x)) for x in v], dtype=object)
    out1 = _subst_bivariate(P, u, v, D, dd)
    out2 = _subst_bivariate(Q, u, v, D, dd)
    if dd:
        arr = np.empty((D + 1, 2), dtype=object)
        arr[:, 0] = out1
        arr[:, 1] = out2
    else:
        arr = np.stack([out1, out2], axis=1)
    return Series1C2(D, arr)


# -- serialization ----------------------------------------------------


def _f17(x: float) -> str:
    if not math.isfinite(x):
        raise NonFiniteError("cannot serialize a non-finite number")
    return format(x, ".17g")


def series1_to_json(psi: Series1C2) -> str:
    """JSON text {order, coeffs: [[re1,im1,re2,im2], ...]}, coefficient of w^k at index k."""
    p = psi.to_complex()
    rows = []
    for k in range(p.order + 1):
        a, b = p.coeffs[k]
        rows.append(f"[{_f17(a.real)},{_f17(a.imag)},{_f17(b.real)},{_f17(b.imag)}]")
    return '{"order":%d,"coeffs":[%s]}' % (p.order, ",".join(rows))


def series1_from_json(text: str) -> Series1C2:
    obj = json.loads(text)
    order = int(obj["order"])
    arr = np.zeros((order + 1, 2), dtype=np.complex128)
    for k, row in enumerate(obj["coeffs"]):
        arr[k, 0] = complex(row[0], row[1])
        arr[k, 1] = complex(row[2], row[3])
    return Series1C2(order, arr)


def jet_to_json(jet: tuple) -> str:
    """Serialize a jet (pair of Series2) with both components packed per monomial.

    Index order is the triangular graded-lex order of Series2.
    """
    P = jet[0].to_complex()
    Q = jet[1].to_complex()
    if P.order != Q.order:
        raise OrderMismatchError("jet components have different orders")
    rows = []
    for i in range(tri_size(P.order)):
        a = P.coeffs[i]
        b = Q.coeffs[i]
        rows.append(f"[{_f17(a.real)},{_f17(a.imag)},{_f17(b.real)},{_f17(b.imag)}]")
    return '{"order":%d,"coeffs":[%s]}' % (P.order, ",".join(rows))


def jet_from_json(text: str) -> tuple:
    obj = json.loads(text)
    order = int(obj["order"])
    n = tri_size(order)
    p = np.zeros(n, dtype=np.complex128)
    q = np.zeros(n, dtype=np.complex128)
    for i, row in enumerate(obj["coeffs"]):
        p[i] = complex(row[0], row[1])
        q[i] = complex(row[2], row[3])
    return (Series2(order, p), Series2(order, q))
