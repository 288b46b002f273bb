"""Sparse multivariate polynomials.

A polynomial is a dict mapping exponent tuples to float coefficients. The
helpers here are shared by the form algebra (coefficients of PolyForm terms),
the averaged Taylor smoothers, and the manufactured targets.
"""

import itertools
from math import comb, factorial

import numpy as np


def multi_indices(nvars, degree):
    """All exponent tuples of length nvars with total degree exactly degree."""
    if nvars == 0:
        if degree == 0:
            yield ()
        return
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in multi_indices(nvars - 1, degree - first):
            yield (first,) + rest


def multi_indices_upto(nvars, degree):
    """All exponent tuples of length nvars with total degree at most degree,
    ordered by increasing degree."""
    for dd in range(degree + 1):
        for alpha in multi_indices(nvars, dd):
            yield alpha


def multi_factorial(alpha):
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def multi_binomial(alpha, beta):
    out = 1
    for a, b in zip(alpha, beta):
        out *= comb(a, b)
    return out


def below(alpha):
    """Exponent tuples beta with beta <= alpha componentwise."""
    return itertools.product(*[range(a + 1) for a in alpha])


def constant(nvars, value=1.0):
    return {(0,) * nvars: float(value)}


def unit(nvars, var, value=1.0):
    e = [0] * nvars
    e[var] = 1
    return {tuple(e): float(value)}


def add(p, q, scale=1.0):
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0.0) + scale * c
    return out


def scale(p, s):
    return {e: s * c for e, c in p.items()}


def mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return out


def power(p, e, nvars):
    out = constant(nvars)
    base = p
    while e:
        if e & 1:
            out = mul(out, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return out


def diff(p, var):
    out = {}
    for e, c in p.items():
        if e[var] == 0:
            continue
        e2 = list(e)
        e2[var] -= 1
        e2 = tuple(e2)
        out[e2] = out.get(e2, 0.0) + e[var] * c
    return out


def prune(p, tol=0.0):
    return {e: c for e, c in p.items() if abs(c) > tol}


def degree(p):
    return max((sum(e) for e in p), default=0)


def exponent_array(p, nvars):
    """Return (exponents (M, nvars) int array, coefficients (M,) array)."""
    if not p:
        return np.zeros((0, nvars), dtype=int), np.zeros(0)
    keys = list(p.keys())
    return np.array(keys, dtype=int).reshape(len(keys), nvars), np.array([p[e] for e in keys])


def monomial_values(x, exps):
    """Evaluate monomials x**exps.

    Args:
      x:     (N, nvars) points
      exps:  (M, nvars) exponents

    Returns:
      (N, M) array.
    """
    x = np.asarray(x, dtype=float)
    if exps.shape[1] == 0:
        return np.ones((x.shape[0], exps.shape[0]))
    return np.prod(x[:, None, :] ** exps[None, :, :], axis=2)


def evaluate(p, x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    exps, coeffs = exponent_array(p, x.shape[1])
    if coeffs.size == 0:
        return np.zeros(x.shape[0])
    return monomial_values(x, exps).dot(coeffs)


def linear_forms(A, b):
    """Polynomials y_i = sum_j A[i,j] z_j + b[i] in the variables z."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    src, m = A.shape
    out = []
    for i in range(src):
        p = {}
        if b[i] != 0.0:
            p[(0,) * m] = float(b[i])
        for j in range(m):
            if A[i, j] != 0.0:
                p[tuple(1 if l == j else 0 for l in range(m))] = float(A[i, j])
        out.append(p)
    return out


class Substitution(object):
    """Affine change of variables y = A z + b applied to polynomials in y.

    Powers of the linear forms are cached, so one Substitution should be
    reused for every polynomial that goes through the same map.
    """

    def __init__(self, A, b):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.m = self.A.shape[1]
        self.lin = linear_forms(self.A, self.b)
        self._powers = {}

    def power(self, i, e):
        key = (i, e)
        if key not in self._powers:
            if e == 0:
                self._powers[key] = constant(self.m)
            elif e == 1:
                self._powers[key] = self.lin[i]
            else:
                self._powers[key] = mul(self.power(i, e - 1), self.lin[i])
        return self._powers[key]

    def monomial(self, exps, coeff=1.0):
        p = constant(self.m, coeff)
        for i, e in enumerate(exps):
            if e:
                p = mul(p, self.power(i, e))
        return p

    def __call__(self, poly):
        out = {}
        for exps, c in poly.items():
            for e, v in self.monomial(exps, c).items():
                out[e] = out.get(e, 0.0) + v
        return out
