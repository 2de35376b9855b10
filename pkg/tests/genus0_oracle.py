"""Exact recursion for y^2 = x^2 - 1 in the rational parameter z.

x = (z + 1/z)/2, y = (z - 1/z)/2, B = dz1 dz2 / (z1 - z2)^2, involution
z -> 1/z, ramification at z = +-1.  Everything is evaluated at Gaussian
rational points, so residues are exact rational numbers.
"""
from functools import lru_cache
from itertools import combinations

import sympy as sp

_counter = [0]


def _fresh():
    _counter[0] += 1
    return sp.Symbol(f"s{_counter[0]}")


def xz(z):
    return (z + 1 / z) / 2


def yz(z):
    return (z - 1 / z) / 2


def dxdz(z):
    return (1 - 1 / z ** 2) / 2


def bergman(z1, z2):
    return 1 / (z1 - z2) ** 2


def _sigma_factor(z):
    return -1 / z ** 2  # d(1/z) = -dz / z^2


def _residue(expr, s, a):
    """Exact residue of a rational function of s at s = a.

    Shifts to u = s - a, strips the pole order from the denominator and
    reads the u^(k-1) coefficient off a truncated power-series quotient.
    """
    num, den = sp.fraction(sp.cancel(sp.together(expr)))
    params = sorted((num.free_symbols | den.free_symbols) - {s}, key=str)
    dom = sp.QQ_I.frac_field(*params) if params else sp.QQ_I
    P = sp.Poly(num, s, domain=dom).shift(a).all_coeffs()[::-1]
    P = [dom.from_sympy(c) for c in P]
    D = [dom.from_sympy(c) for c in sp.Poly(den, s, domain=dom).shift(a).all_coeffs()[::-1]]
    k = next(i for i, c in enumerate(D) if not dom.is_zero(c))
    if k == 0:
        return sp.Integer(0)
    D = D[k:]
    P = P + [dom.zero] * k
    q = []
    for i in range(k):
        acc = P[i] - sum((q[j] * D[i - j] for j in range(max(0, i - len(D) + 1), i)), dom.zero)
        q.append(acc / D[0])
    return dom.to_sympy(q[k - 1])


def W(g, args):
    """dz-coefficient of W^(g)_n at the given (exact) arguments."""
    args = tuple(sp.nsimplify(a) if not isinstance(a, sp.Basic) else a for a in args)
    return _W(g, args)


@lru_cache(maxsize=None)
def _W(g, args):
    n = len(args)
    if (g, n) == (0, 1):
        return sp.Integer(0)
    if (g, n) == (0, 2):
        return bergman(*args)
    z0, rest = args[0], args[1:]
    s = _fresh()
    kern = sp.Rational(1, 2) * (1 / (s - z0) - 1 / (1 / s - z0)) / (2 * yz(s) * dxdz(s))
    sb = 1 / s
    br = 0
    idx = range(len(rest))
    for h in range(g + 1):
        for r in range(len(rest) + 1):
            for J in combinations(idx, r):
                if (h, r + 1) == (0, 1) or (g - h, len(rest) - r + 1) == (0, 1):
                    continue
                pJ = tuple(rest[i] for i in J)
                pK = tuple(rest[i] for i in idx if i not in J)
                br += _W(h, (s,) + pJ) * _W(g - h, (sb,) + pK) * _sigma_factor(s)
    if g >= 1:
        br += _W(g - 1, (s, sb) + rest) * _sigma_factor(s)
    expr = kern * br
    return sp.cancel(sum(_residue(expr, s, a) for a in (1, -1)))


def W_dx(g, zs):
    """dx-coefficient (product of dx_i) of W^(g)_n at parameter values zs."""
    val = W(g, zs)
    for z in zs:
        val = val / dxdz(sp.nsimplify(z))
    return complex(sp.N(val, 30))
