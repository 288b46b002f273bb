"""Local smoothers P_S (averaged Taylor polynomials over a ball in the patch of
S) and cell projections Pi_T (best approximation in the exterior derivative,
then in L^2 on the kernel of d).
"""

import logging
from functools import lru_cache
from math import factorial, pi

import numpy as np
from scipy.linalg import eigh
from scipy.special import gamma

from mesh import combinations
from exterior import (TOLERANCES, MissingExteriorDerivative, PolyForm, combine,
                      exterior_derivative, permutation_sign)
from exterior import polynomial as poly
from exterior.quadrature import ball_rule, simplex_rule
from spaces import local_basis, _reference_local_basis

logger = logging.getLogger(__name__)

BALL_SHRINK = 0.9
BUMP_EXPONENT = 4


def bump_exponent(r):
    """The bump (1 - |z|^2)^q has q - 1 derivatives vanishing on the sphere, enough
    for the kernels of averaged Taylor polynomials of degree r <= q."""
    if r > BUMP_EXPONENT:
        raise ValueError("averaged Taylor polynomials are supported up to degree {}, got {}"
                         .format(BUMP_EXPONENT, r))
    return BUMP_EXPONENT


def bump_normalization(n, q):
    """1 / int_{|z|<1} (1 - |z|^2)^q dz."""
    return gamma(q + 1 + n / 2.0) / (pi ** (n / 2.0) * gamma(q + 1))


@lru_cache(maxsize=None)
def taylor_kernels(n, r):
    """Averaging kernels of the degree-r averaged Taylor polynomial on the unit ball.

    Returns:
      (betas, kernels) with kernels[b] a polynomial in z such that
      Q^r f(c + rho xs) = sum_b xs^betas[b] int_B f(c + rho z) kernels[b](z) dz.
    """
    q = bump_exponent(r)
    base = poly.constant(n)
    for i in range(n):
        e = [0] * n
        e[i] = 2
        base = poly.add(base, {tuple(e): 1.0}, -1.0)
    bump = poly.scale(poly.power(base, q, n), bump_normalization(n, q))

    betas = list(poly.multi_indices_upto(n, r))
    kernels = []
    for beta in betas:
        K = {}
        for alpha in poly.multi_indices_upto(n, r):
            if any(a < b for a, b in zip(alpha, beta)):
                continue
            shift = tuple(a - b for a, b in zip(alpha, beta))
            g = {tuple(s + e for s, e in zip(shift, key)): c for key, c in bump.items()}
            for var, times in enumerate(alpha):
                for t in range(times):
                    g = poly.diff(g, var)
            coeff = (-1) ** sum(beta) * poly.multi_binomial(alpha, beta) / poly.multi_factorial(alpha)
            K = poly.add(K, g, coeff)
        kernels.append(poly.prune(K))
    return betas, kernels


@lru_cache(maxsize=None)
def _kernel_weights(n, r):
    """Ball nodes z and the (nodes, betas) matrix of weights * kernels."""
    q = bump_exponent(r)
    z, w = ball_rule(n, 2 * q + 2 * r + 4)
    betas, kernels = taylor_kernels(n, r)
    W = np.stack([w * poly.evaluate(K, z) for K in kernels], axis=1)
    return z, W, betas


class SmoothedForm(object):
    """Polynomial k-form sum_{beta,K} c xs^beta dx_K in xs = (x - center) / radius.

    Args:
      terms:  dict {(beta, K): coefficient}, K increasing 0-based
    """

    has_trace = True
    has_d = True

    def __init__(self, n, k, center, radius, terms):
        self.n = n
        self.k = k
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.terms = terms

    def __repr__(self):
        return "SmoothedForm(n={}, k={}, center={}, radius={:.3g})".format(
            self.n, self.k, self.center, self.radius)

    def on(self, host):
        """The same polynomial pulled back onto host (a cell or any subsimplex)."""
        return PolyForm.from_cartesian(host, self.k, self.terms, origin=self.center, scale=self.radius)

    def values(self, x, cell=None):
        x = np.atleast_2d(x)
        xs = (x - self.center) / self.radius
        index = {K: a for a, K in enumerate(combinations(self.n, self.k))}
        out = np.zeros((len(x), len(index)))
        if not self.terms:
            return out
        keys = list(self.terms)
        exps = np.array([beta for beta, K in keys], dtype=int).reshape(len(keys), self.n)
        mon = poly.monomial_values(xs, exps)
        for a, (beta, K) in enumerate(keys):
            out[:, index[K]] += self.terms[(beta, K)] * mon[:, a]
        return out

    __call__ = values

    def cartesian(self, cell, bary):
        return self.values(cell.to_cartesian(bary), cell)

    def d(self):
        out = {}
        for (beta, K), c in self.terms.items():
            for j in range(self.n):
                if beta[j] == 0 or j in K:
                    continue
                sign, J = permutation_sign((j,) + K)
                b = beta[:j] + (beta[j] - 1,) + beta[j + 1:]
                out[(b, J)] = out.get((b, J), 0.0) + sign * beta[j] * c / self.radius
        return SmoothedForm(self.n, self.k + 1, self.center, self.radius, out)


class LocalSmoother(object):
    """Averaged Taylor polynomial of degree r over a ball inside the patch of S.

    The ball is the inscribed ball of the largest cell containing S, shrunk by
    BALL_SHRINK.
    """

    def __init__(self, S, complex, r):
        self.S = S
        self.r = r
        self.patch = complex.patches(S)
        cells = self.patch.containing_cells
        self.cell = max(cells, key=lambda T: (T.volume, -T.id))
        center, radius = self.cell.inscribed_ball()
        self.center = center
        self.radius = BALL_SHRINK * radius

    def __call__(self, omega, degree=None):
        return self.apply(omega, degree)

    def apply(self, omega, degree=None):
        degree = self.r if degree is None else degree
        n = len(self.center)
        z, W, betas = _kernel_weights(n, degree)
        f = np.atleast_2d(omega.values(self.center + self.radius * z, self.cell))
        M = W.T.dot(f)
        terms = {}
        for b, beta in enumerate(betas):
            for a, K in enumerate(combinations(n, omega.k)):
                if M[b, a] != 0.0:
                    terms[(beta, K)] = M[b, a]
        return SmoothedForm(n, omega.k, self.center, self.radius, terms)

    def per_cell(self, omega):
        """P_S omega restricted to each cell of the patch."""
        P = self.apply(omega)
        return {T.id: P.on(T) for T in self.patch.containing_cells}

    def derivative_residual(self, omega, points):
        """max |d(P^r omega) - P^(r-1)(d omega)| at points."""
        if self.r < 1:
            return 0.0
        lhs = self.apply(omega).d().values(points)
        rhs = self.apply(omega.d(), self.r - 1).values(points)
        return float(np.abs(lhs - rhs).max())


def averaged_taylor(omega, S, complex, r):
    return LocalSmoother(S, complex, r).apply(omega)


class Smoothers(object):
    """One LocalSmoother per simplex of a complex, built on demand."""

    def __init__(self, complex, r):
        self.complex = complex
        self.r = r
        self._smoothers = {}

    def __getitem__(self, S):
        if S.id not in self._smoothers:
            self._smoothers[S.id] = LocalSmoother(S, self.complex, self.r)
        return self._smoothers[S.id]


@lru_cache(maxsize=None)
def _projection_tables(family, r, k, n, order):
    basis = _reference_local_basis(family, r, k, n).forms
    pts, w = simplex_rule(n, order)
    vals = np.stack([f.evaluate(pts) for f in basis], axis=1)
    dvals = np.stack([exterior_derivative(f).evaluate(pts) for f in basis], axis=1)
    return pts, w, vals, dvals


class CellProjection(object):
    """Pi_T: L^2 best approximation of d(omega) in dP(T), lifted with minimal L^2
    norm, plus the L^2 projection onto the kernel of d in P(T).

    Built from the generalized eigenproblem K v = lambda M v of the stiffness
    and mass matrices of the local space; modes with positive lambda span a
    complement of the kernel and are M-orthogonal to it.
    """

    def __init__(self, T, selector, order=None, tol=None):
        family, r, k, n = selector.key
        self.T = T
        self.selector = selector
        self.k = k
        self.order = 2 * r + 6 if order is None else order
        self.basis = local_basis(T, family, r, k)
        pts, w, vals, dvals = _projection_tables(family, r, k, n, self.order)
        self.pts = pts
        self.weights = T.volume * factorial(n) * w
        self.values = vals.dot(T.form_to_cartesian(k))
        self.dvalues = dvals.dot(T.form_to_cartesian(k + 1)) if k < n else \
            np.zeros(vals.shape[:2] + (0,))

        M = np.einsum('qac,qbc,q->ab', self.values, self.values, self.weights)
        K = np.einsum('qac,qbc,q->ab', self.dvalues, self.dvalues, self.weights)
        lam, V = eigh(K, M)
        tol = TOLERANCES.rank if tol is None else tol
        top = lam.max(initial=0.0)
        self.positive = lam > tol * top if top > 0.0 else np.zeros(len(lam), dtype=bool)
        self.eigenvalues = lam
        self.modes = V

    def _samples(self, omega):
        x = self.T.to_cartesian(self.pts)
        f = np.atleast_2d(omega.values(x, self.T))
        if self.k == self.T.dim:
            return f, np.zeros((len(x), 0))
        if not getattr(omega, 'has_d', False):
            raise MissingExteriorDerivative("{} carries no exterior derivative".format(omega))
        check = getattr(omega, 'validate_derivative', None)
        if check is not None:
            check(x[:2])
        return f, np.atleast_2d(omega.d().values(x, self.T))

    def coefficients(self, omega):
        f, g = self._samples(omega)
        V = self.modes
        pos = self.positive
        fm = V.T.dot(np.einsum('qac,qc,q->a', self.values, f, self.weights))
        fd = V.T.dot(np.einsum('qac,qc,q->a', self.dvalues, g, self.weights))
        c = np.zeros(len(pos))
        c[pos] = fd[pos] / self.eigenvalues[pos]
        c[~pos] = fm[~pos]
        return V.dot(c)

    def __call__(self, omega):
        return self.apply(omega)

    def apply(self, omega):
        return combine(self.basis.forms, self.coefficients(omega), self.T)

    def errors(self, omega):
        """(||omega - Pi omega||_{L^2(T)}, ||d omega - d Pi omega||_{L^2(T)})."""
        f, g = self._samples(omega)
        u = self.coefficients(omega)
        e = f - np.einsum('qac,a->qc', self.values, u)
        de = g - np.einsum('qac,a->qc', self.dvalues, u)
        return (float(np.sqrt(max(self.weights.dot((e ** 2).sum(axis=1)), 0.0))),
                float(np.sqrt(max(self.weights.dot((de ** 2).sum(axis=1)), 0.0))))


def cell_projection(omega, T, selector, order=None):
    return CellProjection(T, selector, order).apply(omega)
