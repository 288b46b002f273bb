"""Polynomial form spaces P_r and P_r^- on simplices, their ring (bubble)
subspaces, and global finite element spaces built by geometric decomposition.

Everything local is computed once on reference simplices and transported to
physical simplices by keeping the barycentric expression (``PolyForm.on``).
Ring forms are additionally expressed through cover generators, barycentric
monomial/Whitney products that involve every vertex of their simplex, so that
relabelling a generator onto a larger simplex is an extension operator: its
trace returns the generator and it vanishes on every face missing a vertex.
"""

import enum
import logging
from functools import lru_cache
from math import comb, factorial

import numpy as np
from scipy.linalg import lstsq, null_space, orth, qr, svd

from mesh import BoundarySubcomplex, Simplex, combinations
from exterior import (TOLERANCES, PiecewiseForm, PolyForm, coefficient_matrix, combine,
                      exterior_derivative, koszul, trace)
from exterior import polynomial as poly
from exterior.quadrature import simplex_rule

logger = logging.getLogger(__name__)


class NotABubble(ValueError):
    pass


class Family(enum.Enum):
    FULL = 'full'
    TRIMMED = 'trimmed'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class FamilySelector(object):
    """Family, degree and form degree of an element, normalized.

    P_r^- of 0-forms is P_r and P_r of n-forms is P_{r+1}^-, so k = 0 always
    reads FULL and k = n always reads TRIMMED.
    """

    def __init__(self, family, r, k, n):
        family = Family.parse(family)
        if r < 1:
            raise ValueError("polynomial degree r must be >= 1, got {}".format(r))
        if not 0 <= k <= n:
            raise ValueError("form degree k={} outside [0, {}]".format(k, n))
        if k == 0 and family is Family.TRIMMED:
            family = Family.FULL
        elif k == n and n > 0 and family is Family.FULL:
            logger.debug("P_{}Lambda^{} is read as the trimmed space of degree {}".format(r, n, r + 1))
            family, r = Family.TRIMMED, r + 1
        self.family = family
        self.r = r
        self.k = k
        self.n = n

    @property
    def key(self):
        return (self.family, self.r, self.k, self.n)

    def __eq__(self, other):
        return isinstance(other, FamilySelector) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        sign = '-' if self.family is Family.TRIMMED else ''
        return "P{}{}Lambda^{}(n={})".format(self.r, sign, self.k, self.n)


def space_dimension(family, r, k, d):
    """Closed-form dimension of P_r Lambda^k or P_r^- Lambda^k on R^d."""
    family = Family.parse(family)
    if k < 0 or k > d or r < 0:
        return 0
    if family is Family.FULL:
        return comb(r + d, r + k) * comb(r + k, k)
    if r == 0:
        return 0
    return comb(r + d, r + k) * comb(r + k - 1, k)


def whitney_terms(alpha, sigma):
    """Barycentric terms of lambda^alpha * phi_sigma."""
    terms = []
    for i, v in enumerate(sigma):
        a = list(alpha)
        a[v] += 1
        terms.append(((-1.0) ** i, a, sigma[:i] + sigma[i + 1:]))
    return terms


def spanning_set(host, family, r, k):
    """Redundant spanning set of the local space, over the full barycentric set."""
    d = host.dim
    family = Family.parse(family)
    forms = []
    if family is Family.FULL:
        for alpha in poly.multi_indices_upto(d + 1, r):
            for sigma in combinations(d + 1, k):
                forms.append(PolyForm.from_bary(host, k, [(1.0, alpha, sigma)]))
        return forms
    if r >= 1:
        forms.extend(spanning_set(host, Family.FULL, r - 1, k))
        if k + 1 <= d + 1:
            for alpha in poly.multi_indices(d + 1, r - 1):
                for sigma in combinations(d + 1, k + 1):
                    forms.append(PolyForm.from_bary(host, k, whitney_terms(alpha, sigma)))
    return forms


def _numerical_rank(M, tol):
    if M.size == 0:
        return 0
    s = svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def independent_subset(forms, tol=None):
    """Rank-revealing selection of linearly independent forms, order kept."""
    tol = TOLERANCES.rank if tol is None else tol
    if not forms:
        return []
    keys, M = coefficient_matrix(forms)
    rank = _numerical_rank(M, tol)
    if rank == 0:
        return []
    Q, R, P = qr(M, pivoting=True, mode='economic')
    return [forms[j] for j in sorted(P[:rank])]


class LocalBasis(object):
    def __init__(self, host, family, r, k, forms):
        self.host = host
        self.family = Family.parse(family)
        self.r = r
        self.k = k
        self.forms = forms
        self._gram = None

    @property
    def dim(self):
        return len(self.forms)

    @property
    def gram(self):
        """L^2(host) Gram matrix with the Euclidean coefficient inner product."""
        if self._gram is None:
            S = self.host
            pts, w = simplex_rule(S.dim, 2 * max(self.r, 0) + 2)
            vals = np.array([f.cartesian(S, pts) for f in self.forms])
            scale = S.volume * factorial(S.dim)
            self._gram = scale * np.einsum('aqc,bqc,q->ab', vals, vals, w)
        return self._gram

    def on(self, host):
        return LocalBasis(host, self.family, self.r, self.k, [f.on(host) for f in self.forms])


@lru_cache(maxsize=None)
def _reference_local_basis(family, r, k, d):
    ref = Simplex.reference(d)
    forms = independent_subset(spanning_set(ref, family, r, k))
    logger.debug("local basis {} r={} k={} d={}: dim {}".format(family.value, r, k, d, len(forms)))
    return LocalBasis(ref, family, r, k, forms)


def local_basis(S, family, r, k):
    family = Family.parse(family)
    if not 0 <= k <= S.dim:
        raise ValueError("form degree {} on a {}-simplex".format(k, S.dim))
    return _reference_local_basis(family, r, k, S.dim).on(S)


def projection_residual(A, B):
    """Largest relative residual of projecting the forms A onto span(B)."""
    if not A:
        return 0.0
    keys, M = coefficient_matrix(list(A) + list(B))
    MA, MB = M[:, :len(A)], M[:, len(A):]
    scale = np.linalg.norm(MA, axis=0)
    scale[scale == 0.0] = 1.0
    if MB.shape[1] == 0 or not MB.any():
        return float((np.linalg.norm(MA, axis=0) / scale).max())
    Q = orth(MB, rcond=TOLERANCES.rank)
    res = MA - Q.dot(Q.T.dot(MA))
    return float((np.linalg.norm(res, axis=0) / scale).max())


def mutual_residual(A, B):
    return max(projection_residual(A, B), projection_residual(B, A))


def koszul_space_equivalence(S, r, k):
    """Compare P_{r-1}Lambda^k + kappa P_{r-1}Lambda^{k+1} with the Whitney-built
    trimmed space; returns the mutual projection residual."""
    built = []
    if r - 1 >= 0:
        built.extend(local_basis(S, Family.FULL, r - 1, k).forms)
        if k + 1 <= S.dim:
            built.extend(koszul(f) for f in local_basis(S, Family.FULL, r - 1, k + 1).forms)
    trimmed = local_basis(S, Family.TRIMMED, r, k).forms if k > 0 else \
        local_basis(S, Family.FULL, r, k).forms
    return mutual_residual(built, trimmed)


def cover_generators(d, family, r, k):
    """Barycentric generators of the ring space that involve every vertex.

    FULL: lambda^alpha dlambda_sigma with |alpha| = r, |sigma| = k.
    TRIMMED: lambda^alpha phi_sigma with |alpha| = r - 1, |sigma| = k + 1.
    """
    family = Family.parse(family)
    every = set(range(d + 1))
    out = []
    if family is Family.FULL:
        for alpha in poly.multi_indices(d + 1, r):
            for sigma in combinations(d + 1, k):
                if {i for i, a in enumerate(alpha) if a} | set(sigma) == every:
                    out.append([(1.0, alpha, sigma)])
    else:
        for alpha in poly.multi_indices(d + 1, r - 1):
            for sigma in combinations(d + 1, k + 1):
                if {i for i, a in enumerate(alpha) if a} | set(sigma) == every:
                    out.append(whitney_terms(alpha, sigma))
    return out


def relabel_terms(terms, positions, dim):
    """Barycentric terms on a face, rewritten over the vertices of a dim-simplex."""
    out = []
    for c, alpha, idx in terms:
        a = [0] * (dim + 1)
        for l, e in enumerate(alpha):
            a[positions[l]] += e
        out.append((c, a, tuple(positions[l] for l in idx)))
    return out


class RingBasis(object):
    """Basis of the ring space on host, with generator coefficients for lifting.

    Args:
      forms:         ring basis forms on host
      generators:    barycentric term lists of the cover generators
      coefficients:  (len(generators), dim) with forms[j] = sum_g X[g, j] gen_g
    """

    def __init__(self, host, family, r, k, forms, generators, coefficients):
        self.host = host
        self.family = family
        self.r = r
        self.k = k
        self.forms = forms
        self.generators = generators
        self.coefficients = coefficients

    @property
    def dim(self):
        return len(self.forms)

    def on(self, host):
        return RingBasis(host, self.family, self.r, self.k, [f.on(host) for f in self.forms],
                         self.generators, self.coefficients)

    def lift(self, positions, target):
        """Extensions of the ring forms to target, where the host's vertex j
        sits at local position positions[j] of target."""
        lifted = _lifted_ring(self.family, self.r, self.k, self.host.dim, tuple(positions), target.dim)
        return [f.on(target) for f in lifted]


@lru_cache(maxsize=None)
def _reference_ring(family, r, k, m):
    ref = Simplex.reference(m)
    if k > m:
        return RingBasis(ref, family, r, k, [], [], np.zeros((0, 0)))
    L = _reference_local_basis(family, r, k, m).forms
    blocks = []
    for dd in range(k, m):
        for pos in combinations(m + 1, dd + 1):
            F = ref.face(pos)
            keys, M = coefficient_matrix([trace(f, F) for f in L])
            if M.shape[0]:
                blocks.append(M)
    if blocks:
        N = null_space(np.vstack(blocks), rcond=TOLERANCES.rank)
    else:
        N = np.identity(len(L))
    forms = [combine(L, N[:, j], ref) for j in range(N.shape[1])]

    generators = cover_generators(m, family, r, k)
    X = np.zeros((len(generators), len(forms)))
    if forms:
        gen_forms = [PolyForm.from_bary(ref, k, g) for g in generators]
        keys, M = coefficient_matrix(gen_forms + forms)
        G, R = M[:, :len(gen_forms)], M[:, len(gen_forms):]
        if _numerical_rank(G, TOLERANCES.rank) != len(forms):
            raise ValueError("cover generators of {} r={} k={} m={} span {} dimensions, ring has {}"
                             .format(family.value, r, k, m, _numerical_rank(G, TOLERANCES.rank), len(forms)))
        X = lstsq(G, R)[0]
        resid = np.abs(G.dot(X) - R).max()
        if resid > TOLERANCES.moment:
            raise ValueError("ring forms not representable by cover generators (residual {})".format(resid))
    logger.debug("ring {} r={} k={} m={}: dim {}".format(family.value, r, k, m, len(forms)))
    return RingBasis(ref, family, r, k, forms, generators, X)


@lru_cache(maxsize=None)
def _lifted_ring(family, r, k, m, positions, dim):
    ring = _reference_ring(family, r, k, m)
    target = Simplex.reference(dim)
    gens = [PolyForm.from_bary(target, k, relabel_terms(g, positions, dim)) for g in ring.generators]
    return [combine(gens, ring.coefficients[:, j], target) if gens else PolyForm(target, k)
            for j in range(ring.dim)]


def ring_basis(S, family, r, k):
    return _reference_ring(Family.parse(family), r, k, S.dim).on(S)


def ring_dimension(family, r, k, m):
    return _reference_ring(Family.parse(family), r, k, m).dim


def ring_coordinates(bubble, family, r, k, tol=None):
    """Coordinates of a form in the ring basis of its host."""
    tol = TOLERANCES.trace if tol is None else tol
    ring = ring_basis(bubble.host, family, r, k)
    if ring.dim == 0:
        if not bubble.is_zero(tol):
            raise NotABubble("{} has no ring space for this family".format(bubble.host))
        return np.zeros(0)
    keys, M = coefficient_matrix(ring.forms + [bubble])
    c = lstsq(M[:, :-1], M[:, -1])[0]
    resid = np.abs(M[:, :-1].dot(c) - M[:, -1]).max()
    if resid > tol * max(1.0, bubble.coefficient_norm()):
        raise NotABubble("form on {} has nonvanishing traces (residual {})".format(bubble.host, resid))
    return c


def extend_to_cell(F, bubble, T, family, r, k):
    """Barycentric extension of a ring form on F to the cell T containing F."""
    positions = T.positions_of(F)
    if positions is None:
        return PolyForm(T, k)
    c = ring_coordinates(bubble, family, r, k)
    ring = _reference_ring(Family.parse(family), r, k, F.dim)
    return combine(ring.lift(positions, T), c, T) if ring.dim else PolyForm(T, k)


def extend(F, bubble, space):
    """Coefficient vector of the extension of a ring form on F in space."""
    sel = space.selector
    c = ring_coordinates(bubble, sel.family, sel.r, sel.k)
    u = np.zeros(space.dim)
    for i, value in enumerate(c):
        if (F.id, i) not in space.index:
            raise ValueError("{} carries no degrees of freedom in this space".format(F))
        u[space.index[(F.id, i)]] = value
    return u


class ReferenceElement(object):
    """Extended ring forms of every face of the reference n-cell.

    local_dofs[a] = (positions of the face, ring index) labels forms[a].
    """

    def __init__(self, selector):
        self.selector = selector
        family, r, k, n = selector.key
        self.cell = Simplex.reference(n)
        self.local_dofs = []
        self.forms = []
        for m in range(k, n + 1):
            ring = _reference_ring(family, r, k, m)
            if ring.dim == 0:
                continue
            for pos in combinations(n + 1, m + 1):
                for i, f in enumerate(ring.lift(pos, self.cell)):
                    self.local_dofs.append((pos, i))
                    self.forms.append(f)
        self.index = {dof: a for a, dof in enumerate(self.local_dofs)}
        self._values = {}
        self._dforms = None

    @property
    def size(self):
        return len(self.forms)

    @property
    def dforms(self):
        if self._dforms is None:
            self._dforms = [exterior_derivative(f) for f in self.forms]
        return self._dforms

    def values(self, order):
        """(points, weights, values (Q, nloc, C(n,k)) in the dlambda frame)."""
        if order not in self._values:
            pts, w = simplex_rule(self.selector.n, order)
            vals = np.stack([f.evaluate(pts) for f in self.forms], axis=1) if self.forms else \
                np.zeros((len(w), 0, len(combinations(self.selector.n, self.selector.k))))
            self._values[order] = (pts, w, vals)
        return self._values[order]


@lru_cache(maxsize=None)
def reference_element(selector):
    return ReferenceElement(selector)


class GlobalFESpace(object):
    """Global space spanned by extended ring forms of simplices outside U.

    Args:
      complex:   SimplicialComplex
      boundary:  BoundarySubcomplex whose simplices carry no dofs
      selector:  FamilySelector
    """

    def __init__(self, complex, boundary, selector):
        self.complex = complex
        self.boundary = BoundarySubcomplex.empty(complex) if boundary is None else boundary
        self.selector = selector
        self.reference = reference_element(selector)
        family, r, k, n = selector.key

        self.dofs = []
        self.index = {}
        for m in range(k, n + 1):
            count = ring_dimension(family, r, k, m)
            for S in complex.simplices[m]:
                if S in self.boundary:
                    continue
                for i in range(count):
                    self.index[(S.id, i)] = len(self.dofs)
                    self.dofs.append((S, i))

        self.cell_maps = {}
        for T in complex.cells:
            row = []
            for pos, i in self.reference.local_dofs:
                S = complex.simplex([T.vertex_ids[p] for p in pos])
                row.append(self.index.get((S.id, i), -1))
            self.cell_maps[T.id] = np.array(row, dtype=int)
        logger.info("assembled {} on {} cells: dim {}".format(selector, len(complex.cells), self.dim))

    @property
    def dim(self):
        return len(self.dofs)

    @property
    def k(self):
        return self.selector.k

    def dofs_on(self, S):
        count = ring_dimension(self.selector.family, self.selector.r, self.selector.k, S.dim)
        return [self.index[(S.id, i)] for i in range(count) if (S.id, i) in self.index]

    def local_coefficients(self, coeffs, T):
        cmap = self.cell_maps[T.id]
        u = np.zeros(len(cmap))
        mask = cmap >= 0
        u[mask] = np.asarray(coeffs)[cmap[mask]]
        return u

    def cell_form(self, coeffs, T):
        return combine(self.reference.forms, self.local_coefficients(coeffs, T), T) \
            if self.reference.forms else PolyForm(T, self.k)

    def basis_form(self, j, T):
        u = np.zeros(self.dim)
        u[j] = 1.0
        return self.cell_form(u, T)

    def cell_values(self, coeffs, T, order):
        """Cartesian values of the FE form on T at the order's quadrature nodes."""
        pts, w, vals = self.reference.values(order)
        local = np.einsum('qac,a->qc', vals, self.local_coefficients(coeffs, T))
        return local.dot(T.form_to_cartesian(self.k))

    def piecewise(self, coeffs):
        return PiecewiseForm(self.complex, self.k,
                             {T.id: self.cell_form(coeffs, T) for T in self.complex.cells})

    def continuity_residual(self, coeffs):
        """Max disagreement of traces across interior facets."""
        worst = 0.0
        for F in self.complex.facets:
            cells = self.complex.containing[F.id]
            if len(cells) < 2:
                continue
            a = trace(self.cell_form(coeffs, cells[0]), F)
            b = trace(self.cell_form(coeffs, cells[1]), F)
            worst = max(worst, (a - b).coefficient_norm())
        return worst

    def boundary_residual(self, coeffs, boundary=None):
        """Max trace of the FE form on simplices of U."""
        boundary = self.boundary if boundary is None else boundary
        worst = 0.0
        for S in self.complex.by_id:
            if S.dim < self.k or S not in boundary:
                continue
            T = self.complex.containing[S.id][0]
            worst = max(worst, trace(self.cell_form(coeffs, T), S).coefficient_norm())
        return worst


def assemble_global(complex, boundary, family, r, k):
    return GlobalFESpace(complex, boundary, FamilySelector(family, r, k, complex.n))


def inclusion_residuals(d, r, k):
    """Membership residuals of the chain P_r in P_{r+1}^- in P_{r+1} and of
    dP_{r+1} = dP_{r+1}^- inside P_r Lambda^{k+1} on the reference d-simplex."""
    ref = Simplex.reference(d)
    full_r = local_basis(ref, Family.FULL, r, k).forms
    trimmed = local_basis(ref, Family.TRIMMED, r + 1, k).forms if k > 0 else \
        local_basis(ref, Family.FULL, r + 1, k).forms
    full_next = local_basis(ref, Family.FULL, r + 1, k).forms
    out = {
        'full_in_trimmed': projection_residual(full_r, trimmed),
        'trimmed_in_full': projection_residual(trimmed, full_next),
    }
    if k + 1 <= d:
        d_full = [exterior_derivative(f) for f in full_next]
        d_trim = [exterior_derivative(f) for f in trimmed]
        d_full = [f for f in d_full if not f.is_zero()]
        d_trim = [f for f in d_trim if not f.is_zero()]
        out['d_equal'] = mutual_residual(d_full, d_trim)
        out['d_in_full'] = projection_residual(d_full, local_basis(ref, Family.FULL, r, k + 1).forms)
    return out
