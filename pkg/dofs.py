"""Degrees of freedom: moment functionals against polynomial weights on
subsimplices, normalized on reference simplices to be dual to the ring bases.

A functional on an m-simplex S pairs the trace of a k-form with a weight of
degree m - k,

    phi*(omega) = int_S eta ^ tr_S omega,

with eta taken from P^-_{r+k-m} Lambda^{m-k}(S) for the full family and from
P_{r+k-m-1} Lambda^{m-k}(S) for the trimmed family. Weights are adjusted on
the reference m-simplex so that the pairing with the reference ring basis is
the identity, and carried to physical simplices by their barycentric
expression. Cells carry the orientation sign in the weight so that the
pairing never depends on how a cell is oriented in space.
"""

import logging
from functools import lru_cache

import numpy as np
from scipy.linalg import inv

from mesh import Simplex
from exterior import (TraceUnavailable, PolyForm, combine, integrate_poly, quadrature,
                      trace, wedge, wedge_values)
from exterior.quadrature import simplex_rule
from spaces import Family, _reference_local_basis, _reference_ring

logger = logging.getLogger(__name__)


class SingularPairing(ValueError):
    pass


def weight_family(family, r, k, m):
    """(family, degree, form degree) of the weight space on an m-simplex, or
    None when the weight space is empty."""
    family = Family.parse(family)
    j = m - k
    if j < 0:
        return None
    if family is Family.FULL:
        s = r + k - m
        if s < 1:
            return None
        # P^-_s Lambda^0 is P_s
        return (Family.FULL, s, 0) if j == 0 else (Family.TRIMMED, s, j)
    s = r + k - m - 1
    if s < 0:
        return None
    return Family.FULL, s, j


def weight_basis(family, r, k, m):
    """Candidate weights on the reference m-simplex."""
    wf = weight_family(family, r, k, m)
    if wf is None:
        return []
    return list(_reference_local_basis(wf[0], wf[1], wf[2], m).forms)


class DualPair(object):
    """Reference ring basis of an m-simplex with the weights dual to it.

    Attributes:
      ring:       RingBasis on the reference m-simplex
      weights:    adjusted weights, int eta_i ^ ring_j = delta_ij
      gram:       pairing matrix of the unadjusted candidates
      condition:  condition number of gram
    """

    def __init__(self, ring, weights, gram, condition):
        self.ring = ring
        self.weights = weights
        self.gram = gram
        self.condition = condition

    @property
    def dim(self):
        return len(self.weights)

    def pairing(self):
        """Pairing matrix of the adjusted weights with the ring basis."""
        P = np.zeros((self.dim, self.ring.dim))
        for i, eta in enumerate(self.weights):
            for j, f in enumerate(self.ring.forms):
                P[i, j] = integrate_poly(wedge(eta, f))
        return P


@lru_cache(maxsize=None)
def dual_pair(family, r, k, m, max_condition=1e12):
    family = Family.parse(family)
    ring = _reference_ring(family, r, k, m)
    candidates = weight_basis(family, r, k, m)
    if len(candidates) != ring.dim:
        raise SingularPairing("{} weights against a ring space of dimension {} ({} r={} k={} m={})"
                              .format(len(candidates), ring.dim, family.value, r, k, m))
    if ring.dim == 0:
        return DualPair(ring, [], np.zeros((0, 0)), 1.0)

    G = np.zeros((ring.dim, ring.dim))
    for i, eta in enumerate(candidates):
        for j, f in enumerate(ring.forms):
            G[i, j] = integrate_poly(wedge(eta, f))
    kappa = np.linalg.cond(G)
    if not np.isfinite(kappa) or kappa > max_condition:
        raise SingularPairing("reference pairing {} r={} k={} m={} has condition number {:.3e}"
                              .format(family.value, r, k, m, kappa))
    A = inv(G)
    weights = [combine(candidates, A[i], ring.host) for i in range(ring.dim)]
    logger.debug("dual pair {} r={} k={} m={}: dim {}, cond {:.3e}".format(
        family.value, r, k, m, ring.dim, kappa))
    return DualPair(ring, weights, G, kappa)


def build_dual_pairs(family, r, k, n):
    """DualPair tables for every reference dimension k..n."""
    family = Family.parse(family)
    return {m: dual_pair(family, r, k, m) for m in range(k, n + 1)}


class DofFunctional(object):
    """omega -> int_S weight ^ tr_S omega.

    Args:
      simplex:  S, the simplex carrying the functional
      weight:   PolyForm of degree dim(S) - k on S
      index:    position i within the dofs of S
      k:        degree of the forms it acts on
    """

    def __init__(self, simplex, weight, index, k):
        self.simplex = simplex
        self.weight = weight
        self.index = index
        self.k = k

    def __repr__(self):
        return "DofFunctional({}, i={}, k={})".format(self.simplex.vertex_ids, self.index, self.k)

    def __call__(self, form, cell=None, order=None):
        return apply_dof(self, form, cell, order)


def dof_space(S, family, r, k):
    """The functionals of (family, r, k) carried by S."""
    family = Family.parse(family)
    if k == 0 and family is Family.TRIMMED:
        family = Family.FULL
    if k > S.dim:
        return []
    pair = dual_pair(family, r, k, S.dim)
    return [DofFunctional(S, S.orientation_sign * eta.on(S), i, k)
            for i, eta in enumerate(pair.weights)]


def apply_dof(dof, form, cell=None, order=None):
    """Value of a functional on a form.

    PolyForms whose host contains S are traced and integrated exactly. Any
    other form is sampled on S through ``values(x, cell)`` and integrated by
    quadrature of the given order (by default high enough for the weight
    against a form of degree k + 3).
    """
    S = dof.simplex
    if isinstance(form, PolyForm):
        if form.k != dof.k:
            raise ValueError("functional on {}-forms applied to a {}-form".format(dof.k, form.k))
        return integrate_poly(wedge(dof.weight, trace(form, S)))

    if not getattr(form, 'has_trace', True):
        raise TraceUnavailable("{} has no trace on {}".format(form, S))
    if order is None:
        order = 2 * dof.weight.degree + 2 * dof.k + 6
    pts, w = simplex_rule(S.dim, order)
    x = S.to_cartesian(pts)
    pulled = np.atleast_2d(form.values(x, cell)).dot(S.form_from_cartesian(dof.k))
    m = S.dim
    integrand = wedge_values(dof.weight.evaluate(pts), m - dof.k, pulled, dof.k, m)[:, 0]
    return quadrature(S, lambda bary: integrand, order)


def dof_count(family, r, k, m):
    return dual_pair(Family.parse(family), r, k, m).dim


def reference_functional(family, r, k, m, i):
    """The i-th functional on the reference m-simplex."""
    return dof_space(Simplex.reference(m), family, r, k)[i]
