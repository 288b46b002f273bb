"""Exact polynomial exterior calculus on simplices.

A PolyForm lives on a host simplex and is stored in reduced barycentric
coordinates t = (lambda_1, ..., lambda_d): lambda_0 is replaced by 1 - sum(t)
and dlambda_0 by -sum(dt), so each form has exactly one representation and
coefficients can be compared directly. Internally a term is keyed by
(exponents over t, increasing 0-based indices into dt); the public ``terms``
view reports them as BaryMonomial/WedgeIndex over lambda_0..lambda_d.

Because barycentric coordinates are intrinsic, moving a form between two
simplices with corresponding vertex orders (``PolyForm.on``) is the affine
pullback between them.
"""

import logging
from functools import lru_cache
from math import factorial

import attrs
import numpy as np
from scipy.linalg import norm, qr, solve_triangular

from mesh import combinations, compound_matrix
from exterior import polynomial as poly
from exterior.quadrature import simplex_rule

logger = logging.getLogger(__name__)


@attrs.frozen
class Tolerances(object):
    """Numerical thresholds shared by the library."""
    rank: float = 1e-10
    duality: float = 1e-9
    trace: float = 1e-10
    moment: float = 1e-9
    reproduction: float = 1e-8
    derivative: float = 1e-5
    prune: float = 1e-15


TOLERANCES = Tolerances()


class HostMismatch(ValueError):
    pass


class DegreeOverflow(ValueError):
    pass


class DegreeMismatch(ValueError):
    pass


class NotASubsimplex(ValueError):
    pass


class TraceUnavailable(ValueError):
    pass


class MissingExteriorDerivative(ValueError):
    pass


class InconsistentDerivative(ValueError):
    pass


class BaryMonomial(tuple):
    """Exponents over lambda_0, ..., lambda_d."""

    @property
    def degree(self):
        return sum(self)


class WedgeIndex(tuple):
    """Strictly increasing indices I into dlambda_1, ..., dlambda_d."""

    @property
    def degree(self):
        return len(self)


def permutation_sign(seq):
    """Sign of the permutation sorting seq, and the sorted tuple.

    Returns (0, None) when seq has a repeated entry.
    """
    seq = tuple(seq)
    if len(set(seq)) != len(seq):
        return 0, None
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign, tuple(sorted(seq))


@lru_cache(maxsize=None)
def _index_of(d, k):
    return {I: a for a, I in enumerate(combinations(d, k))}


@lru_cache(maxsize=None)
def _wedge_table(d, ka, kb):
    target = _index_of(d, ka + kb)
    table = []
    for a, I in enumerate(combinations(d, ka)):
        for b, J in enumerate(combinations(d, kb)):
            sign, K = permutation_sign(I + J)
            if sign:
                table.append((a, b, target[K], sign))
    return tuple(table)


def wedge_values(a, ka, b, kb, d):
    """Pointwise wedge of sampled coefficient arrays in one frame.

    Args:
      a:  (N, C(d, ka)) coefficients of a ka-form
      b:  (N, C(d, kb)) coefficients of a kb-form

    Returns:
      (N, C(d, ka + kb)) coefficients of a ^ b.
    """
    out = np.zeros((a.shape[0], len(combinations(d, ka + kb))))
    for i, j, t, s in _wedge_table(d, ka, kb):
        out[:, t] += s * a[:, i] * b[:, j]
    return out


def _dlambda(j, d):
    """dlambda_j (j over 0..d) as a combination of reduced differentials."""
    if j == 0:
        return [(-1.0, i) for i in range(d)]
    return [(1.0, j - 1)]


def _accumulate(out, key, value):
    out[key] = out.get(key, 0.0) + value


def _pullback_terms(terms, k, substitution, form_map):
    """Pull terms back along y = A z + b.

    Args:
      substitution: poly.Substitution for the coefficients
      form_map:     (src, m) matrix with dy_i = sum_j form_map[i, j] dz_j
    """
    form_map = np.asarray(form_map, dtype=float)
    m = form_map.shape[1]
    rows = _index_of(form_map.shape[0], k)
    cols = combinations(m, k)
    C = compound_matrix(form_map, k)
    out = {}
    for (exps, I), c in terms.items():
        row = C[rows[I]]
        nz = [(J, row[b]) for b, J in enumerate(cols) if row[b] != 0.0]
        if not nz:
            continue
        p = substitution.monomial(exps, c)
        for J, s in nz:
            for e, v in p.items():
                _accumulate(out, (e, J), v * s)
    return out


class PolyForm(object):
    """Polynomial k-form on a host simplex.

    Args:
      host:   Simplex
      k:      form degree
      terms:  dict {(exponents over t, 0-based wedge indices): coefficient}
    """

    has_trace = True
    has_d = True

    def __init__(self, host, k, terms=None):
        self.host = host
        self.k = k
        tol = TOLERANCES.prune
        self._terms = {key: float(c) for key, c in (terms or {}).items() if abs(c) > tol}
        self._dense = None

    @classmethod
    def zero(cls, host, k):
        return cls(host, k)

    @classmethod
    def constant(cls, host, value=1.0):
        return cls(host, 0, {((0,) * host.dim, ()): value})

    @classmethod
    def from_bary(cls, host, k, bary_terms):
        """Build a form from terms written over the full barycentric set.

        Args:
          bary_terms: iterable of (coefficient, alpha over lambda_0..lambda_d,
                      index sequence over 0..d naming dlambda factors in order)
        """
        d = host.dim
        lam0 = poly.constant(d)
        for i in range(d):
            lam0 = poly.add(lam0, poly.unit(d, i), -1.0)
        powers = {0: poly.constant(d)}
        out = {}
        for c, alpha, idx in bary_terms:
            alpha = tuple(alpha)
            idx = tuple(idx)
            if len(alpha) != d + 1:
                raise ValueError("exponents {} do not match a {}-simplex".format(alpha, d))
            if len(idx) != k:
                raise DegreeMismatch("term of degree {} in a {}-form".format(len(idx), k))
            if alpha[0] not in powers:
                powers[alpha[0]] = poly.power(lam0, alpha[0], d)
            shift = alpha[1:]
            p = {tuple(a + b for a, b in zip(e, shift)): c * v for e, v in powers[alpha[0]].items()}

            forms = {(): 1.0}
            for j in idx:
                new = {}
                for I, s in forms.items():
                    for cj, i in _dlambda(j, d):
                        sign, J = permutation_sign(I + (i,))
                        if sign:
                            _accumulate(new, J, s * cj * sign)
                forms = new
            for I, s in forms.items():
                for e, v in p.items():
                    _accumulate(out, (e, I), v * s)
        return cls(host, k, out)

    @classmethod
    def from_cartesian(cls, host, k, terms, origin=None, scale=1.0):
        """Pull a Cartesian polynomial form back onto host.

        Args:
          terms:  dict {(beta over x_1..x_n, increasing 0-based K): coeff}
                  for sum coeff * xs**beta dx_K, with xs = (x - origin) / scale
        """
        n = host.ambient_dim
        origin = np.zeros(n) if origin is None else np.asarray(origin, dtype=float)
        J = host.jacobian
        sub = poly.Substitution(J / scale, (host.coords[0] - origin) / scale)
        return cls(host, k, _pullback_terms(terms, k, sub, J))

    @property
    def dim(self):
        return self.host.dim

    @property
    def raw_terms(self):
        return self._terms

    @property
    def terms(self):
        out = []
        for (e, I), c in sorted(self._terms.items()):
            out.append((c, BaryMonomial((0,) + e), WedgeIndex(i + 1 for i in I)))
        return out

    @property
    def degree(self):
        return max((sum(e) for e, I in self._terms), default=0)

    def on(self, host):
        """The same barycentric expression on another simplex of equal dimension."""
        if host.dim != self.host.dim:
            raise HostMismatch("cannot move a form from dim {} to dim {}".format(self.host.dim, host.dim))
        out = PolyForm(host, self.k)
        out._terms = self._terms
        return out

    def _check(self, other):
        if not self.host.same(other.host):
            raise HostMismatch("{} vs {}".format(self.host, other.host))
        if self.k != other.k:
            raise DegreeMismatch("degree {} vs {}".format(self.k, other.k))

    def __add__(self, other):
        self._check(other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            _accumulate(out, key, c)
        return PolyForm(self.host, self.k, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, s):
        return PolyForm(self.host, self.k, {key: s * c for key, c in self._terms.items()})

    __rmul__ = __mul__

    def coefficient_norm(self):
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_zero(self, tol=None):
        return self.coefficient_norm() <= (TOLERANCES.trace if tol is None else tol)

    def __repr__(self):
        return "PolyForm(k={}, host={}, {} terms)".format(self.k, self.host.vertex_ids, len(self._terms))

    def _dense_form(self):
        if self._dense is None:
            d = self.host.dim
            index = _index_of(d, self.k)
            keys = sorted({e for e, I in self._terms})
            row = {e: a for a, e in enumerate(keys)}
            C = np.zeros((len(keys), len(index)))
            for (e, I), c in self._terms.items():
                C[row[e], index[I]] += c
            exps = np.array(keys, dtype=int).reshape(len(keys), d)
            self._dense = (exps, C)
        return self._dense

    def evaluate(self, bary):
        """Coefficients in the dlambda_I frame at reduced barycentric points.

        Returns:
          (N, C(d, k)) array.
        """
        bary = np.atleast_2d(np.asarray(bary, dtype=float))
        exps, C = self._dense_form()
        if C.shape[0] == 0:
            return np.zeros((bary.shape[0], C.shape[1]))
        return poly.monomial_values(bary, exps).dot(C)

    def cartesian(self, cell, bary):
        """Cartesian dx_K coefficients at reduced barycentric points of cell."""
        if not self.host.same(cell):
            raise HostMismatch("form on {} evaluated on {}".format(self.host, cell))
        return self.evaluate(bary).dot(self.host.form_to_cartesian(self.k))

    def values(self, x, cell=None):
        return self.cartesian(self.host, self.host.barycentric(x))

    def d(self):
        return exterior_derivative(self)


def coefficient_matrix(forms):
    """Stack canonical coefficients of forms as columns.

    Returns:
      (keys, M) with M[a, j] the coefficient of keys[a] in forms[j].
    """
    keys = sorted({key for f in forms for key in f.raw_terms})
    row = {key: a for a, key in enumerate(keys)}
    M = np.zeros((len(keys), len(forms)))
    for j, f in enumerate(forms):
        for key, c in f.raw_terms.items():
            M[row[key], j] = c
    return keys, M


def combine(forms, coeffs, host=None):
    """Linear combination sum_j coeffs[j] * forms[j] of forms of equal degree."""
    if host is None:
        host = forms[0].host
    k = forms[0].k
    out = {}
    for f, c in zip(forms, coeffs):
        if c == 0.0:
            continue
        for key, v in f.raw_terms.items():
            _accumulate(out, key, c * v)
    return PolyForm(host, k, out)


def wedge(omega, eta):
    """omega ^ eta on a common host."""
    if not omega.host.same(eta.host):
        raise HostMismatch("{} vs {}".format(omega.host, eta.host))
    k = omega.k + eta.k
    if k > omega.host.dim:
        raise DegreeOverflow("degree {} exceeds dimension {}".format(k, omega.host.dim))
    out = {}
    for (e1, I1), c1 in omega.raw_terms.items():
        for (e2, I2), c2 in eta.raw_terms.items():
            sign, I = permutation_sign(I1 + I2)
            if sign:
                e = tuple(a + b for a, b in zip(e1, e2))
                _accumulate(out, (e, I), sign * c1 * c2)
    return PolyForm(omega.host, k, out)


def exterior_derivative(omega):
    d = omega.host.dim
    out = {}
    for (e, I), c in omega.raw_terms.items():
        for j in range(d):
            if e[j] == 0 or j in I:
                continue
            sign, J = permutation_sign((j,) + I)
            e2 = e[:j] + (e[j] - 1,) + e[j + 1:]
            _accumulate(out, (e2, J), sign * e[j] * c)
    return PolyForm(omega.host, omega.k + 1, out)


def koszul(omega, base=None):
    """Contraction of omega with the position field x - base.

    Realized in an orthonormal frame y of the host's affine hull, where the
    contraction is sum_j (-1)^j y_{I_j} f dy_{I without j}.
    """
    host = omega.host
    d, k = host.dim, omega.k
    if k == 0:
        raise DegreeMismatch("the Koszul operator lowers degree; got a 0-form")
    base = host.barycenter if base is None else np.asarray(base, dtype=float)
    Q, R = qr(host.jacobian, mode='economic')
    c = Q.T.dot(host.coords[0] - base)
    Rinv = solve_triangular(R, np.identity(d))

    to_y = _pullback_terms(omega.raw_terms, k, poly.Substitution(Rinv, -Rinv.dot(c)), Rinv)
    contracted = {}
    for (e, I), v in to_y.items():
        for j, idx in enumerate(I):
            e2 = e[:idx] + (e[idx] + 1,) + e[idx + 1:]
            _accumulate(contracted, (e2, I[:j] + I[j + 1:]), (-1) ** j * v)
    back = _pullback_terms(contracted, k - 1, poly.Substitution(R, c), R)
    return PolyForm(host, k - 1, back)


@lru_cache(maxsize=None)
def _trace_map(d, positions):
    m = len(positions) - 1
    A = np.zeros((d, m))
    b = np.zeros(d)
    for i in range(1, d + 1):
        if i == positions[0]:
            A[i - 1, :] = -1.0
            b[i - 1] = 1.0
        elif i in positions:
            A[i - 1, positions.index(i) - 1] = 1.0
    return poly.Substitution(A, b), A


def trace(omega, F):
    """Pullback of omega onto a subsimplex F of its host."""
    host = omega.host
    positions = host.positions_of(F)
    if positions is None or F.dim > host.dim:
        raise NotASubsimplex("{} is not a face of {}".format(F, host))
    if omega.k > F.dim:
        return PolyForm(F, omega.k)
    sub, A = _trace_map(host.dim, positions)
    return PolyForm(F, omega.k, _pullback_terms(omega.raw_terms, omega.k, sub, A))


def integrate_poly(omega):
    """Exact integral of a top-degree form over its (oriented) host."""
    d = omega.host.dim
    if omega.k != d:
        raise DegreeMismatch("integrating a {}-form over a {}-simplex".format(omega.k, d))
    total = 0.0
    for (e, I), c in omega.raw_terms.items():
        total += c * poly.multi_factorial(e) / factorial(sum(e) + d)
    return omega.host.orientation_sign * total


def whitney_form(host, sigma):
    """Whitney form phi_sigma for local vertex positions sigma of host."""
    sigma = tuple(sigma)
    k = len(sigma) - 1
    d = host.dim
    terms = []
    for i, v in enumerate(sigma):
        alpha = [0] * (d + 1)
        alpha[v] += 1
        terms.append(((-1) ** i, alpha, sigma[:i] + sigma[i + 1:]))
    return PolyForm.from_bary(host, k, terms)


def random_polyform(host, k, degree, rng):
    """Dense random form of polynomial degree <= degree (property tests)."""
    d = host.dim
    terms = {}
    for e in poly.multi_indices_upto(d, degree):
        for I in combinations(d, k):
            terms[(e, I)] = rng.standard_normal()
    return PolyForm(host, k, terms)


def quadrature(host, integrand, order):
    """Integrate a top-degree integrand over host with a Grundmann-Moeller rule.

    Args:
      integrand:  callable taking (N, d) reduced barycentric points, returning
                  the (N,) coefficient of dlambda_1 ^ ... ^ dlambda_d

    Returns:
      The oriented integral.
    """
    pts, w = simplex_rule(host.dim, order)
    vals = np.asarray(integrand(pts)).reshape(len(w))
    return host.orientation_sign * w.dot(vals)


def integrate_function(S, f, order):
    """Integral of a scalar function f(x) against the volume of S."""
    pts, w = simplex_rule(S.dim, order)
    return S.volume * factorial(S.dim) * w.dot(f(S.to_cartesian(pts)))


def _as_columns(vals, n, k):
    vals = np.asarray(vals, dtype=float)
    width = len(combinations(n, k))
    if vals.ndim == 1:
        vals = vals[:, None]
    if vals.shape[1] != width:
        raise ValueError("expected {} coefficient columns, got {}".format(width, vals.shape[1]))
    return vals


class SampledForm(object):
    """A k-form on R^n given by coefficient callables in Cartesian frame.

    Args:
      n:          ambient dimension
      k:          form degree
      coeffs:     callable (N, n) -> (N, C(n, k)) coefficients of dx_K
      d_coeffs:   optional callable for the coefficients of d(omega)
      has_trace:  False marks rough forms whose traces are not defined
      piecewise:  PiecewiseForm backing this form exactly, if any
    """

    def __init__(self, n, k, coeffs, d_coeffs=None, has_trace=True, piecewise=None, name='form'):
        self.n = n
        self.k = k
        self.coeffs = coeffs
        self.d_coeffs = d_coeffs
        self.has_trace = has_trace
        self.piecewise = piecewise
        self.name = name

    def __repr__(self):
        return "SampledForm({}, n={}, k={})".format(self.name, self.n, self.k)

    @property
    def has_d(self):
        return self.d_coeffs is not None or self.piecewise is not None or self.k == self.n

    def values(self, x, cell=None):
        if self.piecewise is not None:
            return self.piecewise.values(x, cell)
        return _as_columns(self.coeffs(np.atleast_2d(x)), self.n, self.k)

    __call__ = values

    def cartesian(self, cell, bary):
        if self.piecewise is not None:
            return self.piecewise.cartesian(cell, bary)
        return self.values(cell.to_cartesian(bary), cell)

    def d(self):
        if self.k == self.n:
            width = len(combinations(self.n, self.k + 1))
            return SampledForm(self.n, self.k + 1, lambda x: np.zeros((len(np.atleast_2d(x)), width)),
                               name='d' + self.name)
        if self.piecewise is not None:
            return self.piecewise.d().as_sampled()
        if self.d_coeffs is None:
            raise MissingExteriorDerivative("{} carries no exterior derivative".format(self))
        width = len(combinations(self.n, self.k + 2))
        return SampledForm(self.n, self.k + 1, self.d_coeffs,
                           d_coeffs=lambda x: np.zeros((len(np.atleast_2d(x)), width)),
                           has_trace=self.has_trace, name='d' + self.name)

    def scaled(self, s):
        d_coeffs = None if self.d_coeffs is None else (lambda x: s * self.d_coeffs(x))
        piecewise = None if self.piecewise is None else self.piecewise.scaled(s)
        return SampledForm(self.n, self.k, lambda x: s * self.values(x), d_coeffs,
                           self.has_trace, piecewise, self.name)

    def check_derivative(self, points, step=1e-5):
        """Max deviation of the supplied d(omega) from central differences."""
        points = np.atleast_2d(points)
        n, k = self.n, self.k
        grads = []
        for j in range(n):
            e = np.zeros(n)
            e[j] = step
            grads.append((self.values(points + e) - self.values(points - e)) / (2.0 * step))
        fd = np.zeros((len(points), len(combinations(n, k + 1))))
        target = _index_of(n, k + 1)
        for a, K in enumerate(combinations(n, k)):
            for j in range(n):
                sign, J = permutation_sign((j,) + K)
                if sign:
                    fd[:, target[J]] += sign * grads[j][:, a]
        return np.abs(fd - self.d().values(points)).max()

    def validate_derivative(self, points, tol=None):
        """Raise InconsistentDerivative if the supplied d(omega) disagrees with omega.

        Only forms carrying their own d_coeffs are checked; piecewise-backed
        forms and top-degree forms have an exact derivative.
        """
        if self.d_coeffs is None or self.piecewise is not None or self.k == self.n:
            return 0.0
        tol = TOLERANCES.derivative if tol is None else tol
        points = np.atleast_2d(points)
        deviation = self.check_derivative(points)
        scale = max(1.0, np.abs(self.d().values(points)).max(initial=0.0),
                    np.abs(self.values(points)).max(initial=0.0))
        if deviation > tol * scale:
            raise InconsistentDerivative("{}: supplied exterior derivative deviates from finite differences "
                                         "by {:.3e}".format(self, deviation))
        logger.debug("{}: derivative consistent to {:.3e}".format(self, deviation))
        return deviation


class PiecewiseForm(object):
    """Per-cell PolyForms over a complex, evaluated like a SampledForm."""

    def __init__(self, complex, k, forms):
        self.complex = complex
        self.n = complex.n
        self.k = k
        self.forms = forms

    def cell_form(self, T):
        return self.forms[T.id]

    def scaled(self, s):
        return PiecewiseForm(self.complex, self.k, {i: s * f for i, f in self.forms.items()})

    def d(self):
        return PiecewiseForm(self.complex, self.k + 1,
                             {i: exterior_derivative(f) for i, f in self.forms.items()})

    def as_sampled(self, name='piecewise'):
        return SampledForm(self.n, self.k, self.values, has_trace=True, piecewise=self, name=name)

    def _host_for(self, cell):
        if self.complex.member(cell) and cell.dim == self.n:
            return cell
        idx = self.complex.locate(cell.barycenter[None, :])[0]
        return self.complex.cells[idx]

    def values(self, x, cell=None):
        x = np.atleast_2d(x)
        if cell is not None:
            T = self._host_for(cell)
            return self.forms[T.id].cartesian(T, T.barycentric(x))
        out = np.zeros((len(x), len(combinations(self.n, self.k))))
        where = self.complex.locate(x)
        for idx in np.unique(where):
            T = self.complex.cells[idx]
            rows = where == idx
            out[rows] = self.forms[T.id].cartesian(T, T.barycentric(x[rows]))
        return out

    def cartesian(self, cell, bary):
        if self.complex.member(cell) and cell.dim == self.n:
            return self.forms[cell.id].cartesian(cell, bary)
        return self.values(cell.to_cartesian(bary), cell)


class FormDifference(object):
    """a - b, evaluated cellwise."""

    def __init__(self, a, b):
        self.a = a
        self.b = b
        self.k = a.k

    def cartesian(self, cell, bary):
        return self.a.cartesian(cell, bary) - self.b.cartesian(cell, bary)


def difference(a, b):
    return FormDifference(a, b)


def cell_lp_norms(form, cells, p=2, order=8):
    """L^p norms of form over each cell, pointwise Euclidean in Cartesian frame."""
    out = np.zeros(len(cells))
    for a, T in enumerate(cells):
        pts, w = simplex_rule(T.dim, order)
        mag = norm(np.atleast_2d(form.cartesian(T, pts)), axis=1)
        if p == np.inf:
            out[a] = mag.max()
        else:
            out[a] = max(T.volume * factorial(T.dim) * w.dot(mag ** p), 0.0) ** (1.0 / p)
    return out


def lp_norm(form, cells=None, p=2, order=None):
    """L^p norm over a set of cells, p in {1, 2, inf}."""
    if p not in (1, 2, np.inf):
        raise ValueError("p must be 1, 2 or inf, got {}".format(p))
    if cells is None:
        if not isinstance(form, PolyForm):
            raise ValueError("a cell set is required for sampled forms")
        cells = [form.host]
    if order is None:
        order = 2 * form.degree + (0 if p == 2 else 4) if isinstance(form, PolyForm) else 8
    per_cell = cell_lp_norms(form, cells, p, max(order, 1))
    if p == np.inf:
        return per_cell.max() if len(per_cell) else 0.0
    return (per_cell ** p).sum() ** (1.0 / p)
