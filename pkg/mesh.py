"""Simplicial complexes: subsimplex lattice, orientation, patches, anchors and
uniform refinement.

Vertex ids of every simplex are kept in ascending global order; that order
fixes the reference orientation of every simplex of dimension below n. Cells
(n-simplices) carry an orientation sign relative to the ambient space so that
induced facet orientations from neighbouring cells cancel.
"""

import itertools
import json
import logging
from collections import deque
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.linalg import det, norm, pinv
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)


class DegenerateSimplex(ValueError):
    pass


class NonconformingMesh(ValueError):
    pass


class UnknownSimplex(ValueError):
    pass


class NotFaceConnected(ValueError):
    pass


class NoAdmissibleAnchor(ValueError):
    pass


@lru_cache(maxsize=None)
def combinations(n, k):
    return tuple(itertools.combinations(range(n), k))


def compound_matrix(M, k):
    """Matrix of k x k minors, C[I, J] = det(M[I, J]) over sorted index sets.

    The k-th compound carries a linear map on covectors over to k-forms, which
    is how every pullback and frame change of a k-form is realized here.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows = combinations(M.shape[0], k)
    cols = combinations(M.shape[1], k)
    if k == 0:
        return np.ones((1, 1))
    C = np.empty((len(rows), len(cols)))
    for a, I in enumerate(rows):
        sub = M[list(I), :]
        for b, J in enumerate(cols):
            C[a, b] = np.linalg.det(sub[:, list(J)]) if k > 1 else sub[0, J[0]]
    return C


def incidence_sign(T, F):
    """Induced orientation o(F, T) of a facet F of T.

    The facet obtained by dropping the vertex at position j of T has sign
    (-1)**j relative to the ascending orientations, times the orientation sign
    of T and of F.
    """
    missing = [j for j, v in enumerate(T.vertex_ids) if v not in F.vertex_ids]
    if len(missing) != 1 or F.dim != T.dim - 1:
        raise ValueError("{} is not a facet of {}".format(F, T))
    return (-1) ** missing[0] * T.orientation_sign * F.orientation_sign


class Simplex(object):
    """A d-simplex with its vertex coordinates.

    Args:
      id:               global handle (None for reference simplices)
      vertex_ids:       strictly increasing vertex handles
      coords:           (d+1, n) vertex coordinates, rows in vertex_ids order
      orientation_sign: +1 or -1 relative to the ascending vertex order
    """

    def __init__(self, id, vertex_ids, coords, orientation_sign=1):
        self.id = id
        self.vertex_ids = tuple(int(v) for v in vertex_ids)
        self.coords = np.atleast_2d(np.asarray(coords, dtype=float))
        self.orientation_sign = orientation_sign
        self._cache = {}
        if any(a >= b for a, b in zip(self.vertex_ids, self.vertex_ids[1:])):
            raise ValueError("vertex ids must be strictly increasing: {}".format(self.vertex_ids))

    @classmethod
    def reference(cls, dim):
        """The unit simplex with vertices 0, e_1, ..., e_d in R^d."""
        coords = np.vstack((np.zeros((1, dim)), np.identity(dim))) if dim else np.zeros((1, 0))
        return cls(None, range(dim + 1), coords)

    @property
    def dim(self):
        return len(self.vertex_ids) - 1

    @property
    def ambient_dim(self):
        return self.coords.shape[1]

    def __repr__(self):
        return "Simplex(id={}, vertices={})".format(self.id, self.vertex_ids)

    def same(self, other):
        if self is other:
            return True
        return (self.vertex_ids == other.vertex_ids
                and self.coords.shape == other.coords.shape
                and np.allclose(self.coords, other.coords, rtol=0.0, atol=1e-14))

    def positions_of(self, F):
        """Positions of F's vertices within this simplex, or None."""
        try:
            return tuple(self.vertex_ids.index(v) for v in F.vertex_ids)
        except ValueError:
            return None

    def contains(self, F):
        return set(F.vertex_ids) <= set(self.vertex_ids)

    def face(self, positions, id=None):
        """Sub-simplex spanned by the vertices at the given local positions."""
        positions = tuple(sorted(positions))
        return Simplex(id, [self.vertex_ids[p] for p in positions], self.coords[list(positions)])

    @property
    def jacobian(self):
        """(n, d) edge matrix: x = v0 + J t in reduced barycentric coordinates."""
        if 'J' not in self._cache:
            self._cache['J'] = (self.coords[1:] - self.coords[0]).T
        return self._cache['J']

    @property
    def gradients(self):
        """(d, n) tangential gradients of lambda_1, ..., lambda_d."""
        if 'G' not in self._cache:
            if self.dim == 0:
                self._cache['G'] = np.zeros((0, self.ambient_dim))
            else:
                self._cache['G'] = pinv(self.jacobian)
        return self._cache['G']

    def form_to_cartesian(self, k):
        """Maps dlambda_I coefficients to Cartesian dx_K coefficients."""
        key = ('cart', k)
        if key not in self._cache:
            self._cache[key] = compound_matrix(self.gradients, k)
        return self._cache[key]

    def form_from_cartesian(self, k):
        """Maps Cartesian dx_K coefficients to pulled-back dlambda_I coefficients."""
        key = ('pull', k)
        if key not in self._cache:
            self._cache[key] = compound_matrix(self.jacobian, k)
        return self._cache[key]

    @property
    def volume(self):
        if 'vol' not in self._cache:
            if self.dim == 0:
                self._cache['vol'] = 1.0
            else:
                J = self.jacobian
                self._cache['vol'] = np.sqrt(max(det(J.T.dot(J)), 0.0)) / factorial(self.dim)
        return self._cache['vol']

    @property
    def diameter(self):
        if 'h' not in self._cache:
            X = self.coords
            self._cache['h'] = max((norm(X[i] - X[j]) for i in range(len(X)) for j in range(i)),
                                   default=0.0)
        return self._cache['h']

    @property
    def barycenter(self):
        return self.coords.mean(axis=0)

    def to_cartesian(self, bary):
        """Cartesian points from reduced barycentric coordinates (N, d)."""
        bary = np.atleast_2d(bary)
        if self.dim == 0:
            return np.repeat(self.coords[:1], bary.shape[0], axis=0)
        return self.coords[0] + bary.dot(self.jacobian.T)

    def barycentric(self, x):
        """Reduced barycentric coordinates (N, d) of Cartesian points."""
        x = np.atleast_2d(x)
        return (x - self.coords[0]).dot(self.gradients.T)

    def inscribed_ball(self):
        """Center and radius of the inscribed ball of a cell."""
        d = self.dim
        areas = np.array([self.face([j for j in range(d + 1) if j != i]).volume
                          for i in range(d + 1)])
        center = areas.dot(self.coords) / areas.sum()
        return center, d * self.volume / areas.sum()


def shape_measure(S):
    """mu(S) = h_S^d / vol(S)."""
    if S.dim < 1:
        raise DegenerateSimplex("shape measure is defined for dim >= 1, got a vertex")
    vol = S.volume
    if vol <= 0.0:
        raise DegenerateSimplex("{} has zero volume".format(S))
    return S.diameter ** S.dim / vol


def scale_length(S, cell):
    """Length scale h_S used in scaling constants; vertices borrow the cell's."""
    return S.diameter if S.dim >= 1 else cell.diameter


class Patch(object):
    def __init__(self, anchor, star_cells, containing_cells):
        self.anchor = anchor
        self.star_cells = star_cells
        self.containing_cells = containing_cells

    def __repr__(self):
        return "Patch({}, star={}, containing={})".format(
            self.anchor, [T.id for T in self.star_cells], [T.id for T in self.containing_cells])


class AnchorChoice(object):
    """Facet F_S and cell T_S for every simplex of dimension below n."""

    def __init__(self, facet, cell):
        self.facet = facet
        self.cell = cell

    def __getitem__(self, S):
        return self.facet[S.id], self.cell[S.id]

    def __contains__(self, S):
        return S.id in self.facet


class SimplicialComplex(object):
    """Conforming simplicial complex of n-cells in R^n.

    Construction enumerates every subsimplex once, assigns global ids in
    (dimension, vertex tuple) order, computes induced facet orientations and
    verifies conformity and face-connectedness.

    Args:
      vertices:  (N, n) vertex coordinates
      cells:     list of n+1 vertex ids per cell; the given order is kept as the
                 refinement order of the cell
      tol:       relative volume tolerance for degeneracy
    """

    def __init__(self, vertices, cells, tol=1e-12):
        self.vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
        self.n = self.vertices.shape[1]
        n = self.n
        self.midpoints = None
        self.parent = None

        orders = [tuple(int(v) for v in c) for c in cells]
        for c in orders:
            if len(c) != n + 1 or len(set(c)) != n + 1:
                raise NonconformingMesh("cell {} is not an {}-simplex".format(c, n))
            if min(c) < 0 or max(c) >= len(self.vertices):
                raise NonconformingMesh("cell {} references unknown vertices".format(c))
        keys = [tuple(sorted(c)) for c in orders]
        if len(set(keys)) != len(keys):
            raise NonconformingMesh("duplicate cells")

        tuples = [set() for d in range(n + 1)]
        for key in keys:
            for d in range(n + 1):
                tuples[d].update(itertools.combinations(key, d + 1))

        self.simplices = [[] for d in range(n + 1)]
        self.by_id = []
        self._by_vertices = {}
        cell_sign = {}
        for key in keys:
            J = (self.vertices[list(key[1:])] - self.vertices[key[0]]).T
            vol = det(J) if n else 1.0
            h = max(norm(J, axis=0)) if n else 1.0
            if abs(vol) <= tol * h ** n:
                raise DegenerateSimplex("cell {} has zero volume".format(key))
            cell_sign[key] = 1 if vol > 0 else -1

        for d in range(n + 1):
            for key in sorted(tuples[d]):
                sign = cell_sign[key] if d == n else 1
                S = Simplex(len(self.by_id), key, self.vertices[list(key)], sign)
                self.simplices[d].append(S)
                self.by_id.append(S)
                self._by_vertices[key] = S

        self.cell_orders = {self._by_vertices[key].id: order for key, order in zip(keys, orders)}

        self.containing = {S.id: [] for S in self.by_id}
        self.facet_incidence = {}
        for T in self.cells:
            for d in range(n + 1):
                for sub in itertools.combinations(T.vertex_ids, d + 1):
                    self.containing[self._by_vertices[sub].id].append(T)
            for F in self.faces(T, n - 1):
                self.facet_incidence[(T.id, F.id)] = incidence_sign(T, F)

        if n >= 1:
            for F in self.facets:
                if len(self.containing[F.id]) > 2:
                    raise NonconformingMesh("facet {} is shared by more than two cells".format(F))
        self._check_hanging_vertices()
        self._check_overlaps()
        self._check_face_connected()

        self.h_vertex = np.full(len(self.vertices), np.inf)
        for e in self.simplices[1] if n >= 1 else []:
            for v in e.vertex_ids:
                self.h_vertex[v] = min(self.h_vertex[v], e.diameter)

        self._stack = None
        logger.info("built complex: n={}, counts={}".format(n, [len(s) for s in self.simplices]))

    @property
    def cells(self):
        return self.simplices[self.n]

    @property
    def facets(self):
        return self.simplices[self.n - 1]

    def simplex(self, vertex_ids):
        key = tuple(sorted(int(v) for v in vertex_ids))
        try:
            return self._by_vertices[key]
        except KeyError:
            raise UnknownSimplex("no simplex with vertices {}".format(key))

    def __contains__(self, S):
        return self._by_vertices.get(S.vertex_ids) is S

    def faces(self, T, dim):
        """Sub-simplices of T of the given dimension."""
        return [self._by_vertices[sub] for sub in itertools.combinations(T.vertex_ids, dim + 1)]

    def subsimplices(self, T):
        return [S for d in range(T.dim + 1) for S in self.faces(T, d)]

    def member(self, S):
        return self._by_vertices.get(S.vertex_ids) is S

    def containing_cells(self, S):
        if self._by_vertices.get(S.vertex_ids) is not S:
            raise UnknownSimplex("{} is not in this complex".format(S))
        return self.containing[S.id]

    def supersets(self, S):
        """All simplices strictly containing S, ordered by id."""
        found = {}
        for T in self.containing_cells(S):
            for sub in self.subsimplices(T):
                if sub.dim > S.dim and sub.contains(S):
                    found[sub.id] = sub
        return [found[i] for i in sorted(found)]

    def neighbor(self, T, F):
        """Cell across facet F from T, or None on the boundary."""
        for other in self.containing[F.id]:
            if other is not T:
                return other
        return None

    def boundary_facets(self):
        return [F for F in self.facets if len(self.containing[F.id]) == 1]

    def patches(self, S):
        containing = self.containing_cells(S)
        star = {}
        for v in S.vertex_ids:
            for T in self.containing[self._by_vertices[(v,)].id]:
                star[T.id] = T
        return Patch(S, [star[i] for i in sorted(star)], list(containing))

    def star_cells(self, T):
        return self.patches(T).star_cells

    def face_path(self, T0, T, S):
        """Cells T_1, ..., T_N from T0 to T across facets containing S.

        Returns:
          A list of (cell, crossing facet) pairs; empty when T0 is T.
        """
        if not (T0.contains(S) and T.contains(S)):
            raise ValueError("{} is not shared by both cells".format(S))
        if T0 is T:
            return []
        parent = {T0.id: None}
        queue = deque([T0])
        while queue:
            C = queue.popleft()
            for F in self.faces(C, self.n - 1):
                if not F.contains(S):
                    continue
                other = self.neighbor(C, F)
                if other is None or other.id in parent:
                    continue
                parent[other.id] = (C, F)
                if other is T:
                    path = []
                    node = T
                    while parent[node.id] is not None:
                        prev, facet = parent[node.id]
                        path.append((node, facet))
                        node = prev
                    return path[::-1]
                queue.append(other)
        raise NotFaceConnected("no face-connected path from {} to {} around {}".format(T0, T, S))

    def h_max(self):
        return max(T.diameter for T in self.cells)

    def shape_measure(self):
        """mu(T) over all non-vertex simplices."""
        return max(shape_measure(S) for d in range(1, self.n + 1) for S in self.simplices[d])

    def total_volume(self):
        return sum(T.volume for T in self.cells)

    def locate(self, x, tol=1e-10):
        """Index into self.cells of a cell containing each point."""
        x = np.atleast_2d(x)
        if self._stack is None:
            self._stack = (np.array([T.coords[0] for T in self.cells]),
                           np.array([T.gradients for T in self.cells]))
        v0, G = self._stack
        out = np.empty(len(x), dtype=int)
        for a, point in enumerate(x):
            lam = np.einsum('cij,cj->ci', G, point - v0)
            lam0 = 1.0 - lam.sum(axis=1)
            worst = np.minimum(lam.min(axis=1), lam0)
            out[a] = int(np.argmax(worst))
            if worst[out[a]] < -tol:
                raise ValueError("point {} lies outside the mesh".format(point))
        return out

    def _check_hanging_vertices(self):
        if self.n == 0:
            return
        X = self.vertices
        for T in self.cells:
            lam = T.barycentric(X)
            lam0 = 1.0 - lam.sum(axis=1)
            inside = (lam.min(axis=1) >= -1e-12) & (lam0 >= -1e-12)
            inside[list(T.vertex_ids)] = False
            if inside.any():
                raise NonconformingMesh("vertex {} lies on cell {} without being one of its vertices"
                                        .format(int(np.nonzero(inside)[0][0]), T.vertex_ids))

    def _check_overlaps(self, tol=1e-10, chunk=20000):
        """Separating-axis test on every pair of cells close enough to meet.

        Two simplices with disjoint interiors are separated along a facet normal
        of one of them or, for n = 3, along the cross product of two of their
        edges.
        """
        cells = self.cells
        if not 1 <= self.n <= 3 or len(cells) < 2:
            return
        coords = np.array([T.coords for T in cells])
        reach = max(T.diameter for T in cells)
        pairs = cKDTree(coords.mean(axis=1)).query_pairs(reach, output_type='ndarray')
        for start in range(0, len(pairs), chunk):
            block = pairs[start:start + chunk]
            hit = _overlapping(coords[block[:, 0]], coords[block[:, 1]], tol, reach)
            if hit.any():
                a, b = block[np.nonzero(hit)[0][0]]
                raise NonconformingMesh("cells {} and {} overlap".format(cells[a].vertex_ids,
                                                                         cells[b].vertex_ids))

    def _check_face_connected(self):
        n = self.n
        for S in self.by_id:
            cells = self.containing[S.id]
            if len(cells) <= 1:
                continue
            seen = {cells[0].id}
            queue = deque([cells[0]])
            while queue:
                C = queue.popleft()
                for F in self.faces(C, n - 1):
                    if not F.contains(S):
                        continue
                    other = self.neighbor(C, F)
                    if other is not None and other.id not in seen:
                        seen.add(other.id)
                        queue.append(other)
            if len(seen) != len(cells):
                raise NotFaceConnected("cells around {} are not face-connected".format(S))


def _overlapping(A, B, tol, reach):
    """Mask of simplex pairs (P, n+1, n) whose interiors intersect."""
    n = A.shape[2]
    axes = np.concatenate([_separating_axes(A), _separating_axes(B)], axis=1)
    if n == 3:
        crossed = np.cross(_edges(A)[:, :, None], _edges(B)[:, None, :])
        axes = np.concatenate([axes, crossed.reshape(len(A), -1, 3)], axis=1)
    length = norm(axes, axis=2)
    usable = length > tol * reach ** max(n - 1, 1)
    axes = axes / np.where(usable, length, 1.0)[:, :, None]
    pa = np.einsum('pvi,pai->pav', A, axes)
    pb = np.einsum('pvi,pai->pav', B, axes)
    gap = tol * reach
    apart = (pa.max(axis=2) <= pb.min(axis=2) + gap) | (pb.max(axis=2) <= pa.min(axis=2) + gap)
    return ~(apart & usable).any(axis=1)


def _edges(X):
    """Edge vectors (P, C(n+1, 2), n) of stacked simplices (P, n+1, n)."""
    pairs = list(itertools.combinations(range(X.shape[1]), 2))
    return np.stack([X[:, j] - X[:, i] for i, j in pairs], axis=1)


def _separating_axes(X):
    """Facet normals (P, n+1, n) of stacked simplices (P, n+1, n), unnormalized."""
    P, m, n = X.shape
    if n == 1:
        return np.ones((P, 1, 1))
    out = np.empty((P, m, n))
    for skip in range(m):
        facet = [v for v in range(m) if v != skip]
        E = X[:, facet[1:]] - X[:, facet[:1]]
        if n == 2:
            out[:, skip] = np.stack([-E[:, 0, 1], E[:, 0, 0]], axis=1)
        else:
            out[:, skip] = np.cross(E[:, 0], E[:, 1])
    return out


def build_complex(vertex_coords, top_cells):
    return SimplicialComplex(vertex_coords, top_cells)


def patches(complex, S):
    return complex.patches(S)


def face_path(complex, T0, T, S):
    return complex.face_path(T0, T, S)


class BoundarySubcomplex(object):
    """Subcomplex U generated by a set of facets through subsimplex closure."""

    def __init__(self, complex, facets=()):
        self.complex = complex
        self.facets = sorted(facets, key=lambda F: F.id)
        self.members = set()
        for F in self.facets:
            if complex.simplex(F.vertex_ids) is not F or F.dim != complex.n - 1:
                raise ValueError("{} is not a facet of the complex".format(F))
            for S in complex.subsimplices(F):
                self.members.add(S.id)

    @classmethod
    def empty(cls, complex):
        return cls(complex, ())

    @classmethod
    def full_boundary(cls, complex):
        return cls(complex, complex.boundary_facets())

    @classmethod
    def from_facets(cls, complex, vertex_lists):
        return cls(complex, [complex.simplex(v) for v in vertex_lists])

    @classmethod
    def from_predicate(cls, complex, predicate):
        """Boundary facets all of whose vertices satisfy predicate(x) -> bool."""
        chosen = [F for F in complex.boundary_facets() if all(predicate(x) for x in F.coords)]
        return cls(complex, chosen)

    def __contains__(self, S):
        return S.id in self.members and self.complex._by_vertices.get(S.vertex_ids) is S

    def __len__(self):
        return len(self.members)

    def __bool__(self):
        return bool(self.members)

    def refined(self, child):
        """Carry U onto a complex produced by refine_uniform."""
        if child.midpoints is None:
            raise ValueError("complex was not produced by refine_uniform")
        chosen = []
        allowed = []
        for F in self.facets:
            ids = set(F.vertex_ids)
            for e in itertools.combinations(F.vertex_ids, 2):
                ids.add(child.midpoints[e])
            allowed.append(ids)
        for f in child.boundary_facets():
            vs = set(f.vertex_ids)
            if any(vs <= ids for ids in allowed):
                chosen.append(f)
        return BoundarySubcomplex(child, chosen)


def choose_anchors(complex, boundary=None):
    """Lowest-id facet F_S containing S (in U when S is in U) and lowest-id
    cell T_S containing F_S."""
    if boundary is None:
        boundary = BoundarySubcomplex.empty(complex)
    best = {}
    best_bc = {}
    for F in complex.facets:
        in_bc = F in boundary
        for S in complex.subsimplices(F):
            if S.id not in best or F.id < best[S.id].id:
                best[S.id] = F
            if in_bc and (S.id not in best_bc or F.id < best_bc[S.id].id):
                best_bc[S.id] = F
    facet = {}
    cell = {}
    for d in range(complex.n):
        for S in complex.simplices[d]:
            if S in boundary:
                if S.id not in best_bc:
                    raise NoAdmissibleAnchor("{} lies in the boundary subcomplex but no boundary "
                                             "facet contains it".format(S))
                F = best_bc[S.id]
            else:
                F = best[S.id]
            facet[S.id] = F
            cell[S.id] = min(complex.containing[F.id], key=lambda T: T.id)
    return AnchorChoice(facet, cell)


# Children of a tetrahedron (x0, x1, x2, x3) in Bey's ordering; entries are
# vertex positions or edge pairs standing for their midpoints.
_RED_3D = (
    (0, (0, 1), (0, 2), (0, 3)),
    ((0, 1), 1, (1, 2), (1, 3)),
    ((0, 2), (1, 2), 2, (2, 3)),
    ((0, 3), (1, 3), (2, 3), 3),
    ((0, 1), (0, 2), (0, 3), (1, 3)),
    ((0, 1), (0, 2), (1, 2), (1, 3)),
    ((0, 2), (0, 3), (1, 3), (2, 3)),
    ((0, 2), (1, 2), (1, 3), (2, 3)),
)

_RED_2D = (
    (0, (0, 1), (0, 2)),
    ((0, 1), 1, (1, 2)),
    ((0, 2), (1, 2), 2),
    ((0, 1), (1, 2), (0, 2)),
)

_RED_1D = ((0, (0, 1)), ((0, 1), 1))


def refine_uniform(complex):
    """Split every cell into 2^n children through edge midpoints."""
    n = complex.n
    rules = {1: _RED_1D, 2: _RED_2D, 3: _RED_3D}
    if n not in rules:
        raise ValueError("uniform refinement is implemented for n <= 3")

    vertices = [complex.vertices]
    midpoints = {}
    next_id = len(complex.vertices)
    for e in complex.simplices[1]:
        midpoints[e.vertex_ids] = next_id
        vertices.append(e.coords.mean(axis=0)[None, :])
        next_id += 1

    cells = []
    for T in complex.cells:
        order = complex.cell_orders[T.id]
        for rule in rules[n]:
            child = []
            for entry in rule:
                if isinstance(entry, tuple):
                    a, b = sorted((order[entry[0]], order[entry[1]]))
                    child.append(midpoints[(a, b)])
                else:
                    child.append(order[entry])
            cells.append(child)

    fine = SimplicialComplex(np.vstack(vertices), cells)
    fine.midpoints = midpoints
    fine.parent = complex
    return fine


def refine(complex, levels):
    for level in range(levels):
        complex = refine_uniform(complex)
    return complex


def unit_square(levels=0):
    """Unit square split along the (0,0)-(1,1) diagonal, refined levels times."""
    vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    return refine(SimplicialComplex(vertices, [[0, 1, 3], [0, 2, 3]]), levels)


def unit_cube(levels=0):
    """Unit cube split into the six Kuhn tetrahedra, refined levels times."""
    vertices = [[x, y, z] for z in (0.0, 1.0) for y in (0.0, 1.0) for x in (0.0, 1.0)]
    cells = []
    for perm in itertools.permutations(range(3)):
        corner = np.zeros(3, dtype=int)
        path = [0]
        for axis in perm:
            corner[axis] = 1
            path.append(int(corner[0] + 2 * corner[1] + 4 * corner[2]))
        cells.append(path)
    return refine(SimplicialComplex(vertices, cells), levels)


def unit_interval(levels=0):
    return refine(SimplicialComplex([[0.0], [1.0]], [[0, 1]]), levels)


def load_mesh(path):
    """Read the JSON mesh format.

    Returns:
      (complex, boundary subcomplex generated by boundary_facets)
    """
    with open(path) as f:
        data = json.load(f)
    complex = SimplicialComplex(data['vertices'], data['cells'])
    if complex.n != int(data.get('dim', complex.n)):
        raise ValueError("declared dim {} does not match vertex coordinates".format(data['dim']))
    boundary = BoundarySubcomplex.from_facets(complex, data.get('boundary_facets', []))
    return complex, boundary


def mesh_to_dict(complex, boundary=None):
    return {
        'dim': complex.n,
        'vertices': complex.vertices.tolist(),
        'cells': [list(complex.cell_orders[T.id]) for T in complex.cells],
        'boundary_facets': [list(F.vertex_ids) for F in boundary.facets] if boundary else [],
    }


def save_mesh(complex, path, boundary=None):
    with open(path, 'w') as f:
        json.dump(mesh_to_dict(complex, boundary), f)
