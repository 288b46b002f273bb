"""Quasi-interpolants onto finite element spaces of differential forms.

Clement:      sum_{S,i} phi*_{S,i}(P_S omega) phi_{S,i}
Clement (U):  the same sum over S outside a boundary subcomplex U
Scott-Zhang:  sum_{S,i} K_{S,i}(omega) phi_{S,i}, with K the facet-dual
              functionals anchored so that simplices of U use facets of U

Each result keeps its coefficients over the biorthogonal basis together with
the geometric decomposition coefficients used for evaluation.
"""

import logging
from math import factorial

import numpy as np

from mesh import BoundarySubcomplex, choose_anchors
from exterior.quadrature import simplex_rule
from dofs import apply_dof
from facetdual import FacetDuals
from interp.smoothers import (CellProjection, LocalSmoother, SmoothedForm, Smoothers,
                              averaged_taylor, cell_projection)

logger = logging.getLogger(__name__)


class InterpolantResult(object):
    """Output of a quasi-interpolant.

    Attributes:
      coefficients:  values over the biorthogonal basis, in space dof order
      ext:           the same form in geometric decomposition coordinates
      zeroed:        dof indices forced to zero (simplices of U)
      raw:           functional values before zeroing, where they were computed
    """

    def __init__(self, system, coefficients, zeroed=(), raw=None, name='interpolant'):
        self.system = system
        self.space = system.space
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.ext = system.to_ext(self.coefficients)
        self.zeroed = np.asarray(zeroed, dtype=int)
        self.raw = raw
        self.name = name

    def __repr__(self):
        return "InterpolantResult({}, dim={}, zeroed={})".format(self.name, len(self.coefficients),
                                                                 len(self.zeroed))

    def cell_form(self, T):
        return self.space.cell_form(self.ext, T)

    def cell_values(self, T, order):
        return self.space.cell_values(self.ext, T, order)

    def piecewise(self):
        return self.space.piecewise(self.ext)

    def as_sampled(self):
        return self.piecewise().as_sampled(self.name)


def _boundary_indices(space, boundary):
    if not boundary:
        return np.zeros(0, dtype=int)
    return np.array([j for j, (S, i) in enumerate(space.dofs) if S in boundary], dtype=int)


def validate_input(omega, complex, samples=4):
    """Check a supplied exterior derivative against finite differences inside a few cells."""
    check = getattr(omega, 'validate_derivative', None)
    if check is None:
        return
    cells = complex.cells
    picks = np.unique(np.linspace(0, len(cells) - 1, min(samples, len(cells))).astype(int))
    bary = np.array([[0.25] * (complex.n + 1), [0.4] + [0.6 / complex.n] * complex.n])
    check(np.vstack([cells[a].to_cartesian(bary[:, 1:]) for a in picks]))


def clement(omega, system, smoothers=None, boundary=None, name='clement'):
    """Clement interpolant; dofs of simplices in boundary are left at zero."""
    validate_input(omega, system.complex)
    family, r, k, n = system.selector.key
    smoothers = Smoothers(system.complex, r) if smoothers is None else smoothers
    space = system.space
    zeroed = _boundary_indices(space, boundary)
    skip = set(zeroed.tolist())

    c = np.zeros(space.dim)
    smoothed = {}
    for j, (S, i) in enumerate(space.dofs):
        if j in skip:
            continue
        if S.id not in smoothed:
            smoothed[S.id] = smoothers[S].apply(omega).on(S)
        c[j] = apply_dof(system.functional(j), smoothed[S.id])
    logger.info("{}: {} coefficients, {} on the boundary subcomplex".format(name, space.dim, len(zeroed)))
    return InterpolantResult(system, c, zeroed, name=name)


def clement_bc(omega, system, boundary, smoothers=None):
    return clement(omega, system, smoothers, boundary, name='clement_bc')


def scott_zhang(omega, system, anchors=None, boundary=None, bc_data=True, order=None, duals=None):
    """Scott-Zhang interpolant.

    Args:
      anchors:  AnchorChoice; chosen against boundary when omitted
      bc_data:  omega satisfies the boundary conditions of U, so the
                functionals of U simplices are set to exactly zero
      duals:    FacetDuals to reuse across several inputs
    """
    validate_input(omega, system.complex)
    boundary = BoundarySubcomplex.empty(system.complex) if boundary is None else boundary
    if duals is None:
        anchors = choose_anchors(system.complex, boundary) if anchors is None else anchors
        duals = FacetDuals(system.space, anchors)
    raw = duals.values(omega, order)
    c = raw.copy()
    zeroed = _boundary_indices(system.space, boundary) if bc_data else np.zeros(0, dtype=int)
    if len(zeroed):
        logger.debug("largest functional on U before zeroing: {:.3e}".format(np.abs(raw[zeroed]).max()))
        c[zeroed] = 0.0
    logger.info("scott_zhang: {} coefficients, {} zeroed".format(system.space.dim, len(zeroed)))
    return InterpolantResult(system, c, zeroed, raw, name='scott_zhang')


def interpolate(name, omega, system, boundary=None, **kwargs):
    if name == 'clement':
        return clement(omega, system, kwargs.get('smoothers'))
    if name == 'clement_bc':
        return clement_bc(omega, system, boundary, kwargs.get('smoothers'))
    if name == 'scott_zhang':
        return scott_zhang(omega, system, boundary=boundary, order=kwargs.get('order'),
                           duals=kwargs.get('duals'))
    raise ValueError("unknown interpolant '{}'".format(name))


def cell_norms(form, cells, order, p=2):
    """L^p norms of a form over each cell (pointwise Euclidean in Cartesian frame)."""
    out = np.zeros(len(cells))
    for a, T in enumerate(cells):
        pts, w = simplex_rule(T.dim, order)
        mag = np.linalg.norm(np.atleast_2d(form.values(T.to_cartesian(pts), T)), axis=1)
        out[a] = _lp(mag, T.volume * factorial(T.dim) * w, p)
    return out


def _lp(mag, weights, p):
    if p == np.inf:
        return mag.max(initial=0.0)
    return max(weights.dot(mag ** p), 0.0) ** (1.0 / p)


def cell_errors(result, target, order, p=2):
    """||target - result||_{L^p(T)} for every cell."""
    cells = result.space.complex.cells
    out = np.zeros(len(cells))
    for a, T in enumerate(cells):
        pts, w = simplex_rule(T.dim, order)
        diff = np.atleast_2d(target.values(T.to_cartesian(pts), T)) - result.cell_values(T, order)
        out[a] = _lp(np.linalg.norm(diff, axis=1), T.volume * factorial(T.dim) * w, p)
    return out


def cell_derivative_errors(result, target, order, p=2):
    """||d target - d result||_{L^p(T)} for every cell."""
    cells = result.space.complex.cells
    dresult = result.piecewise().d()
    dtarget = target.d()
    out = np.zeros(len(cells))
    for a, T in enumerate(cells):
        pts, w = simplex_rule(T.dim, order)
        diff = np.atleast_2d(dtarget.values(T.to_cartesian(pts), T)) - dresult.cartesian(T, pts)
        out[a] = _lp(np.linalg.norm(diff, axis=1), T.volume * factorial(T.dim) * w, p)
    return out


def combine_cells(per_cell, p=2):
    if p == np.inf:
        return float(per_cell.max(initial=0.0))
    return float((per_cell ** p).sum() ** (1.0 / p))


def cell_result_norms(result, order, p=2):
    cells = result.space.complex.cells
    out = np.zeros(len(cells))
    for a, T in enumerate(cells):
        pts, w = simplex_rule(T.dim, order)
        out[a] = _lp(np.linalg.norm(result.cell_values(T, order), axis=1),
                     T.volume * factorial(T.dim) * w, p)
    return out


def stability_ratios(result, target, order, with_d=False, p=2):
    """||I omega||_{L^p(T)} / ||omega||_{L^p(U*_T)} per cell.

    With with_d the denominator is ||omega|| + h_T ||d omega|| over the star.
    """
    complex = result.space.complex
    cells = complex.cells
    num = cell_result_norms(result, order, p)
    den = cell_norms(target, cells, order, p)
    if with_d and target.k < complex.n:
        dden = cell_norms(target.d(), cells, order, p)
    else:
        dden = np.zeros(len(cells))
    position = {T.id: a for a, T in enumerate(cells)}
    out = np.zeros(len(cells))
    for a, T in enumerate(cells):
        star = [position[C.id] for C in complex.star_cells(T)]
        total = combine_cells(den[star], p) + T.diameter * combine_cells(dden[star], p)
        out[a] = num[a] / total if total > 0.0 else 0.0
    return out


def best_approximation(target, complex, selector, order=None):
    """Per-cell (||omega - Pi_T omega||, ||d omega - d Pi_T omega||) in L^2."""
    best = np.zeros(len(complex.cells))
    dbest = np.zeros(len(complex.cells))
    for a, T in enumerate(complex.cells):
        best[a], dbest[a] = CellProjection(T, selector, order).errors(target)
    return best, dbest


def broken_constant(errors, best, dbest, complex):
    """max_T err_T / sum_{T' in U*_T} (best_T' + h_T' dbest_T')."""
    cells = complex.cells
    position = {T.id: a for a, T in enumerate(cells)}
    h = np.array([T.diameter for T in cells])
    local = best + h * dbest
    worst = 0.0
    for a, T in enumerate(cells):
        total = sum(local[position[C.id]] for C in complex.star_cells(T))
        if total > 0.0:
            worst = max(worst, errors[a] / total)
        elif errors[a] > 0.0:
            worst = np.inf
    return worst


def trace_residual(result, boundary):
    """Max trace of the interpolant on simplices of U."""
    return result.space.boundary_residual(result.ext, boundary)
