"""Truncated Laurent series in one local variable.

A :class:`Series` stores coefficients of ``q**val, q**(val+1), ...`` up to
(but excluding) ``q**order``.  Arithmetic tracks the truncation order so a
result never claims more terms than its inputs determine.  Polynomials in
``x`` can be evaluated on a series argument, which is how the local jets of
the curve data are produced from the same formulas used pointwise.
"""
from __future__ import annotations

import numpy as np

_ZERO = 1e-300


class Series:
    __slots__ = ("coeffs", "val")

    def __init__(self, coeffs, val=0):
        self.coeffs = np.asarray(coeffs, dtype=complex).copy()
        self.val = int(val)

    # -- construction -----------------------------------------------------
    @classmethod
    def const(cls, c, order):
        out = np.zeros(max(order, 1), dtype=complex)
        out[0] = c
        return cls(out[:order] if order > 0 else out[:0], 0)

    @classmethod
    def var(cls, order):
        """The local coordinate ``q`` itself."""
        out = np.zeros(order, dtype=complex)
        if order > 1:
            out[1] = 1.0
        return cls(out, 0)

    @property
    def order(self):
        return self.val + len(self.coeffs)

    def copy(self):
        return Series(self.coeffs, self.val)

    def __repr__(self):
        return f"Series(val={self.val}, order={self.order}, coeffs={self.coeffs!r})"

    def __getitem__(self, e):
        if e >= self.order:
            raise IndexError(f"coefficient q^{e} beyond truncation order {self.order}")
        if e < self.val:
            return 0j
        return self.coeffs[e - self.val]

    def coefficients(self, lo, hi):
        """Coefficients of q^lo .. q^(hi-1) as an array (zeros below ``val``)."""
        return np.array([self[e] for e in range(lo, hi)], dtype=complex)

    def normalized(self):
        """Drop exactly-zero leading coefficients."""
        nz = np.nonzero(np.abs(self.coeffs) > _ZERO)[0]
        if len(nz) == 0:
            return Series(np.zeros(0), self.order)
        k = nz[0]
        return Series(self.coeffs[k:], self.val + k)

    def truncate(self, order):
        order = min(order, self.order)
        n = max(order - self.val, 0)
        return Series(self.coeffs[:n], self.val)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Series):
            if self.order <= 0:
                return self.copy()
            other = Series.const(other, self.order)
        lo = min(self.val, other.val)
        hi = min(self.order, other.order)
        if hi <= lo:
            return Series(np.zeros(0), hi)
        out = np.zeros(hi - lo, dtype=complex)
        for s in (self, other):
            n = max(0, min(hi, s.order) - s.val)
            out[s.val - lo:s.val - lo + n] += s.coeffs[:n]
        return Series(out, lo)

    __radd__ = __add__

    def __neg__(self):
        return Series(-self.coeffs, self.val)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series(self.coeffs * other, self.val)
        a, b = self.normalized(), other.normalized()
        val = a.val + b.val
        order = min(a.val + b.order, b.val + a.order)
        n = order - val
        if n <= 0:
            return Series(np.zeros(0), order)
        c = np.convolve(a.coeffs[:n], b.coeffs[:n])[:n]
        if len(c) < n:
            c = np.concatenate([c, np.zeros(n - len(c))])
        return Series(c, val)

    __rmul__ = __mul__

    def inverse(self):
        s = self.normalized()
        n = len(s.coeffs)
        if n == 0:
            raise ZeroDivisionError("series has no known nonzero coefficient")
        c = s.coeffs
        b = np.zeros(n, dtype=complex)
        b[0] = 1.0 / c[0]
        for k in range(1, n):
            b[k] = -np.dot(c[1:k + 1], b[k - 1::-1][:k]) * b[0]
        return Series(b, -s.val)

    def __truediv__(self, other):
        if not isinstance(other, Series):
            return Series(self.coeffs / other, self.val)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return Series.const(1.0, len(self.coeffs))
        base = self
        out = None
        while k:
            if k & 1:
                out = base if out is None else out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def sqrt(self, branch=None):
        """Square root of a series with even valuation.

        ``branch`` (a complex number) selects the sign of the leading
        coefficient: the root closest to it is kept.
        """
        s = self.normalized()
        if s.val % 2:
            raise ValueError("square root of a series with odd valuation")
        c = s.coeffs
        n = len(c)
        r = np.zeros(n, dtype=complex)
        r[0] = np.sqrt(c[0])
        if branch is not None and abs(r[0] - branch) > abs(r[0] + branch):
            r[0] = -r[0]
        for k in range(1, n):
            r[k] = (c[k] - np.dot(r[1:k], r[k - 1:0:-1])) / (2 * r[0])
        return Series(r, s.val // 2)

    # -- calculus and substitutions --------------------------------------
    def deriv(self):
        e = np.arange(self.val, self.order)
        c = self.coeffs * e
        if self.val == 0:
            return Series(c[1:], 0)
        return Series(c, self.val - 1)

    def flip(self):
        """Substitute q -> -q."""
        e = np.arange(self.val, self.order)
        return Series(self.coeffs * (-1.0) ** e, self.val)

    def residue(self):
        return self[-1]

    def __call__(self, q):
        q = np.asarray(q, dtype=complex)
        acc = np.zeros_like(q)
        for c in self.coeffs[::-1]:
            acc = acc * q + c
        return acc * q ** self.val

    def compose(self, inner):
        """``self(inner(q))`` for ``inner`` with positive valuation."""
        inner = inner.normalized()
        if inner.val < 1:
            raise ValueError("inner series must vanish at the origin")
        n = self.order - self.val
        # Horner on the regular part, then multiply by inner**val.
        acc = Series.const(0.0, inner.order)
        for c in self.coeffs[::-1]:
            acc = acc * inner + c
        acc = acc.truncate(n * inner.val)
        if self.val:
            acc = acc * inner ** self.val
        return acc

    def revert(self):
        """Compositional inverse of a series ``a1 q + a2 q^2 + ...`` with a1 != 0."""
        s = self.normalized()
        if s.val != 1:
            raise ValueError("reversion needs valuation exactly 1")
        n = s.order
        g = Series.var(n) / s.coeffs[0]
        # Newton iteration on s(g(q)) = q doubles precision each pass.
        for _ in range(int(np.ceil(np.log2(max(n, 2)))) + 2):
            resid = s.compose(g) - Series.var(n)
            g = (g - resid / s.deriv().compose(g)).truncate(n)
        return g


def polynomial(coeffs, x):
    """Evaluate sum(coeffs[k] * x**k) for arrays or :class:`Series` ``x``."""
    acc = 0
    for c in list(coeffs)[::-1]:
        acc = acc * x + c
    return acc


def taylor_shift(coeffs, x0):
    """Ascending coefficients of P(x0 + t) given ascending coefficients of P."""
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=complex))
    return p(np.polynomial.Polynomial([x0, 1.0])).coef
