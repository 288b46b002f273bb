"""Facet representations of the degrees of freedom.

Every functional phi*_{S,i} on a subsimplex S of a facet F is rewritten as a
facet moment against a form xi on F that vanishes on the boundary of F,

    int_F xi ^ tr_F omega = phi*_{S,i}(omega)    for omega in P_r Lambda^k,

and xi is extended into a cell T containing F by a form Xi whose trace is xi on
F and zero on the other facets of T. Stokes then turns the facet moment into
cell integrals of omega and d(omega),

    o(F, T) int_F xi ^ tr omega = int_T dXi ^ omega + (-1)^(n-k-1) Xi ^ d omega,

which stay meaningful for forms without traces. Both xi and Xi are polynomial
and computed on reference simplices.
"""

import logging
from functools import lru_cache
from math import factorial

import attrs
import numpy as np
from scipy.linalg import lstsq, norm

from mesh import Simplex, incidence_sign, scale_length
from exterior import (TOLERANCES, MissingExteriorDerivative, PiecewiseForm, PolyForm, combine,
                      exterior_derivative, integrate_poly, trace, wedge, wedge_values)
from exterior.quadrature import simplex_rule
from spaces import Family, NotABubble, _reference_local_basis, relabel_terms
from dofs import apply_dof, dof_space, dual_pair

logger = logging.getLogger(__name__)


class MomentSystemRankDeficient(ValueError):
    pass


class FacetDualForm(object):
    """xi_{F,S,i} on a facet F.

    Attributes:
      xi:          PolyForm of degree n-k-1 on F
      bary_terms:  the same form written as sum c lambda^alpha dlambda_I with a
                   factor lambda_v for every vertex v of F, over F's vertices
      degree:      candidate degree R at which the moment system was solved
      residual:    moment system residual
    """

    def __init__(self, F, S, index, xi, bary_terms, degree, residual):
        self.F = F
        self.S = S
        self.index = index
        self.xi = xi
        self.bary_terms = bary_terms
        self.degree = degree
        self.residual = residual

    def on(self, F, S=None):
        return FacetDualForm(F, S, self.index, self.xi.on(F), self.bary_terms, self.degree,
                             self.residual)


def _bubble_candidates(F, R, j):
    """Barycentric terms of b_F psi for a basis psi of P_R Lambda^j(F)."""
    out = []
    for psi in _reference_local_basis(Family.FULL, R, j, F.dim).forms:
        out.append([(c, tuple(a + 1 for a in alpha), tuple(idx)) for c, alpha, idx in psi.terms])
    return out


@lru_cache(maxsize=None)
def _reference_xi(family, r, k, n, positions, i, tol):
    F = Simplex.reference(n - 1)
    S = F.face(positions)
    m = S.dim
    weight = dual_pair(family, r, k, m).weights[i].on(S)
    rho = _reference_local_basis(Family.FULL, r, k, n - 1).forms
    targets = np.array([integrate_poly(wedge(weight, trace(f, S))) for f in rho])
    scale = max(1.0, np.abs(targets).max(initial=0.0))

    j = n - 1 - k
    for R in range(r, r + n + 3):
        terms = _bubble_candidates(F, R, j)
        cands = [PolyForm.from_bary(F, j, t) for t in terms]
        A = np.array([[integrate_poly(wedge(c, f)) for c in cands] for f in rho])
        x = lstsq(A, targets)[0]
        residual = np.abs(A.dot(x) - targets).max(initial=0.0)
        if residual <= tol * scale:
            bary = [(x[a] * c, alpha, idx) for a, t in enumerate(terms) for c, alpha, idx in t
                    if x[a] != 0.0]
            logger.debug("xi {} r={} k={} n={} S={} i={}: R={}, {} candidates, residual {:.2e}"
                         .format(family.value, r, k, n, positions, i, R, len(cands), residual))
            return FacetDualForm(F, S, i, combine(cands, x, F), bary, R, residual)
        logger.debug("moment system at R={} leaves residual {:.2e}".format(R, residual))
    raise MomentSystemRankDeficient(
        "no facet form of degree <= {} reproduces the functional {} r={} k={} on positions {} "
        "({} moments, {} candidates, residual {:.2e})".format(
            r + n + 2, family.value, r, k, positions, len(rho), len(cands), residual))


def build_xi(F, S, i, family, r, k, tol=None):
    """Facet form xi_{F,S,i} on the (n-1)-simplex F."""
    family = Family.parse(family)
    n = F.dim + 1
    if k > n - 1:
        raise ValueError("facet forms need k <= n - 1, got k={} with n={}".format(k, n))
    positions = F.positions_of(S)
    if positions is None:
        raise ValueError("{} is not a face of {}".format(S, F))
    if i >= len(dof_space(S, family, r, k)):
        return None
    tol = TOLERANCES.moment if tol is None else tol
    return _reference_xi(family, r, k, n, positions, i, tol).on(F, S)


class CellExtension(object):
    """Xi_{T,F,S,i}: extension of xi from F into the cell T.

    Attributes:
      incidence:        o(F, T)
      trace_residual:   |tr_F Xi - xi| relative to max(1, |xi|)
      other_residual:   max |tr_F' Xi| over the other facets F' of T, from the
                        barycentric terms, relative to max(1, |xi|)
      reduced_residual: the same traces of the reduced-coordinate Xi, relative
                        to max(1, |xi|, |Xi|)
    """

    def __init__(self, T, F, xi, Xi, dXi, incidence, trace_residual, other_residual, reduced_residual=0.0):
        self.T = T
        self.F = F
        self.xi = xi
        self.Xi = Xi
        self.dXi = dXi
        self.incidence = incidence
        self.trace_residual = trace_residual
        self.other_residual = other_residual
        self.reduced_residual = reduced_residual


def build_Xi(T, F, xi, tol=None):
    """Extend xi from F into T.

    Every barycentric term of xi carries lambda_v for each vertex v of F, so the
    lifted terms vanish identically on the other facets of T. other_residual
    is measured on the terms lacking such a factor (none for a bubble) and the
    reduced-coordinate form is checked against the same traces relative to its
    own coefficient size.
    """
    tol = TOLERANCES.trace if tol is None else tol
    positions = T.positions_of(F)
    if positions is None or F.dim != T.dim - 1:
        raise ValueError("{} is not a facet of {}".format(F, T))
    j = xi.xi.k
    lifted = relabel_terms(tuple(xi.bary_terms), positions, T.dim)
    Xi = _lift_xi(tuple(xi.bary_terms), positions, T.dim, j).on(T)

    scale = max(1.0, xi.xi.coefficient_norm())
    trace_residual = (trace(Xi, F) - xi.xi.on(F)).coefficient_norm() / scale
    other_residual = 0.0
    numeric = 0.0
    for skip in positions:
        G = T.face([p for p in range(T.dim + 1) if p != skip])
        surviving = [(c, alpha, idx) for c, alpha, idx in lifted if alpha[skip] == 0 and skip not in idx]
        if surviving:
            rest = PolyForm.from_bary(T, j, surviving)
            other_residual = max(other_residual, trace(rest, G).coefficient_norm())
        numeric = max(numeric, trace(Xi, G).coefficient_norm())
    other_residual /= scale
    numeric /= max(scale, Xi.coefficient_norm())
    if trace_residual > tol or other_residual > tol or numeric > tol:
        raise NotABubble("extension of xi into {} has relative trace residual {:.2e} on F and {:.2e} "
                         "elsewhere ({:.2e} in reduced coordinates)".format(T, trace_residual, other_residual,
                                                                           numeric))
    return CellExtension(T, F, xi, Xi, exterior_derivative(Xi), incidence_sign(T, F),
                         trace_residual, other_residual, numeric)


@lru_cache(maxsize=None)
def _lift_xi(bary_terms, positions, n, j):
    return PolyForm.from_bary(Simplex.reference(n), j, relabel_terms(bary_terms, positions, n))


def _cell_polyform(form, T):
    """The exact polynomial restriction of form to the cell T, if it has one."""
    if isinstance(form, PolyForm):
        return form if form.host.same(T) else None
    piecewise = form if isinstance(form, PiecewiseForm) else getattr(form, 'piecewise', None)
    if piecewise is not None and piecewise.complex.member(T):
        return piecewise.cell_form(T)
    return None


def _frame_values(form, T, pts, k):
    """Values at reduced barycentric points of T, in T's dlambda frame."""
    vals = np.atleast_2d(form.values(T.to_cartesian(pts), T))
    return vals.dot(T.form_from_cartesian(k))


def ibp_check(ext, omega, order=None):
    """|o(F,T) int_F xi ^ tr omega - int_T (dXi ^ omega + (-1)^(n-k-1) Xi ^ d omega)|."""
    T, F = ext.T, ext.F
    n = T.dim
    j = ext.Xi.k
    k = n - 1 - j
    sign = (-1) ** (n - k - 1)
    exact = _cell_polyform(omega, T)
    if exact is not None:
        lhs = ext.incidence * integrate_poly(wedge(ext.xi.xi, trace(exact, F)))
        rhs = integrate_poly(wedge(ext.dXi, exact))
        rhs += sign * integrate_poly(wedge(ext.Xi, exterior_derivative(exact)))
        return abs(lhs - rhs)

    order = 2 * ext.Xi.degree + 8 if order is None else order
    pts, w = simplex_rule(n - 1, order)
    on_facet = wedge_values(ext.xi.xi.evaluate(pts), j, _frame_values(omega, F, pts, k), k, n - 1)
    lhs = ext.incidence * F.orientation_sign * w.dot(on_facet[:, 0])

    pts, w = simplex_rule(n, order)
    vals = wedge_values(ext.dXi.evaluate(pts), j + 1, _frame_values(omega, T, pts, k), k, n)
    vals += sign * wedge_values(ext.Xi.evaluate(pts), j, _frame_values(omega.d(), T, pts, k + 1), k + 1, n)
    rhs = T.orientation_sign * w.dot(vals[:, 0])
    return abs(lhs - rhs)


def moment_residual(family, r, k, n, positions, i):
    """max over a basis omega of P_r Lambda^k of the reference cell of
    |int_F xi ^ tr_F omega - phi*_{S,i}(omega)|, with F the facet opposite the
    last vertex and S at the given positions in F."""
    family = Family.parse(family)
    T = Simplex.reference(n)
    F = T.face(range(n))
    S = F.face(positions)
    xi = build_xi(F, S, i, family, r, k)
    dof = dof_space(S, family, r, k)[i]
    worst = 0.0
    for omega in _reference_local_basis(Family.FULL, r, k, n).forms:
        lhs = integrate_poly(wedge(xi.xi, trace(omega, F)))
        worst = max(worst, abs(lhs - apply_dof(dof, omega)))
    return worst


class FacetDuals(object):
    """The functionals K_{S,i} of a mesh, built from anchored facet duals.

    For a simplex S of dimension below n with anchors (F_S, T_S),

        K_{S,i}(omega) = o(F_S, T_S) int_{T_S} dXi ^ omega + (-1)^(n-k+1) Xi ^ d omega,

    and cells use their plain degrees of freedom.
    """

    def __init__(self, space, anchors):
        self.space = space
        self.complex = space.complex
        self.anchors = anchors
        self.selector = space.selector
        self._ext = {}
        self._values = {}

    def extension(self, S, i):
        key = (S.id, i)
        if key not in self._ext:
            family, r, k, n = self.selector.key
            F, T = self.anchors[S]
            self._ext[key] = build_Xi(T, F, build_xi(F, S, i, family, r, k))
        return self._ext[key]

    def _reference_values(self, ext, order):
        """(Xi, dXi) at the order's quadrature nodes; intrinsic, so shared by
        every cell with the same local configuration."""
        key = (ext.T.positions_of(ext.F), ext.F.positions_of(ext.xi.S), ext.xi.index, order)
        if key not in self._values:
            pts, w = simplex_rule(ext.T.dim, order)
            self._values[key] = (ext.Xi.evaluate(pts), ext.dXi.evaluate(pts))
        return self._values[key]

    def K(self, S, i, omega, order=None, cache=None):
        family, r, k, n = self.selector.key
        if S.dim == n:
            exact = _cell_polyform(omega, S)
            dof = dof_space(S, family, r, k)[i]
            return apply_dof(dof, exact if exact is not None else omega, S, order)

        ext = self.extension(S, i)
        T = ext.T
        sign = (-1) ** (n - k + 1)
        exact = _cell_polyform(omega, T)
        if exact is not None:
            total = integrate_poly(wedge(ext.dXi, exact))
            total += sign * integrate_poly(wedge(ext.Xi, exterior_derivative(exact)))
            return ext.incidence * total

        if not getattr(omega, 'has_d', False):
            raise MissingExteriorDerivative("{} has no exterior derivative for K on {}".format(omega, S))
        order = 2 * r + 6 if order is None else order
        pts, w = simplex_rule(n, order)
        cache = {} if cache is None else cache
        if T.id not in cache:
            cache[T.id] = (_frame_values(omega, T, pts, k), _frame_values(omega.d(), T, pts, k + 1))
        om, dom = cache[T.id]
        Xi, dXi = self._reference_values(ext, order)
        vals = wedge_values(dXi, n - k, om, k, n) + sign * wedge_values(Xi, n - k - 1, dom, k + 1, n)
        return ext.incidence * T.orientation_sign * w.dot(vals[:, 0])

    def values(self, omega, order=None):
        """K_{S,i}(omega) for every dof of the space, in space order."""
        out = np.zeros(self.space.dim)
        cache = {}
        for j, (S, i) in enumerate(self.space.dofs):
            out[j] = self.K(S, i, omega, order, cache)
        return out


def K_functional(S, i, omega, anchors, space, order=None):
    return FacetDuals(space, anchors).K(S, i, omega, order)


@attrs.frozen
class XiScaling(object):
    """max h_S^(n-k-1-n/q) ||Xi||_{L^q(T_S)} and max h_S^(n-k-n/q) ||dXi||_{L^q(T_S)}."""
    q: float
    xi: float
    dxi: float
    count: int


def measure_scaling(duals, q=2, order=None):
    family, r, k, n = duals.selector.key
    if k > n - 1:
        return XiScaling(q=float(q), xi=0.0, dxi=0.0, count=0)
    order = 2 * r + 2 * n + 4 if order is None else order
    pts, w = simplex_rule(n, order)
    nq = n / q if q != np.inf else 0.0
    worst_xi = 0.0
    worst_dxi = 0.0
    count = 0
    for S, i in duals.space.dofs:
        if S.dim == n:
            continue
        ext = duals.extension(S, i)
        T = ext.T
        Xi, dXi = duals._reference_values(ext, order)
        a = norm(Xi.dot(T.form_to_cartesian(n - k - 1)), axis=1)
        b = norm(dXi.dot(T.form_to_cartesian(n - k)), axis=1)
        if q == np.inf:
            na, nb = a.max(), b.max()
        else:
            vol = T.volume * factorial(n)
            na = (vol * w.dot(a ** q)) ** (1.0 / q)
            nb = (vol * w.dot(b ** q)) ** (1.0 / q)
        h = scale_length(S, T)
        worst_xi = max(worst_xi, h ** (n - k - 1 - nq) * na)
        worst_dxi = max(worst_dxi, h ** (n - k - nq) * nb)
        count += 1
    return XiScaling(q=float(q), xi=float(worst_xi), dxi=float(worst_dxi), count=count)
