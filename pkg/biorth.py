"""Localised biorthogonal bases of global finite element spaces.

Starting from the geometric decomposition basis (extended ring forms, one
block per simplex), the construction sweeps simplices by decreasing
dimension and subtracts from every extended ring form its projections onto
the already finished basis forms of strictly larger simplices:

    phi_{S,i} = Ext phi_{S,i,0} - sum_{T > S, l} phi*_{T,l}(Ext phi_{S,i,0}) phi_{T,l}

The result is stored as a sparse change-of-basis matrix B whose column j holds
phi_j in geometric decomposition coordinates. Every pairing involved is a
reference-element quantity, so nothing here integrates on physical cells
except the norm measurements.
"""

import csv
import logging
from functools import lru_cache
from math import factorial

import attrs
import numpy as np
import scipy.sparse as sp
from scipy.linalg import norm, solve

from mesh import combinations, scale_length
from exterior import coefficient_matrix, integrate_poly, trace, wedge
from spaces import FamilySelector, GlobalFESpace, reference_element, ring_dimension
from dofs import dof_space, dual_pair

logger = logging.getLogger(__name__)


class ElementTables(object):
    """Reference-cell tables shared by every cell of a mesh.

    Attributes:
      element:   spaces.ReferenceElement
      dofs:      D[b, a] = phi*_b(form_a) for local functionals b and local
                 extended ring forms a
      traces:    {positions: coefficient matrix of the traces of all local
                 forms onto that face}
      masks:     bit mask of the positions of the simplex of every local dof
    """

    def __init__(self, element):
        self.element = element
        family, r, k, n = element.selector.key
        cell = element.cell
        forms = element.forms
        size = len(forms)
        self.masks = np.array([sum(1 << p for p in pos) for pos, i in element.local_dofs], dtype=int)

        self.dofs = np.zeros((size, size))
        faces = {}
        for b, (pos, l) in enumerate(element.local_dofs):
            if pos not in faces:
                faces[pos] = cell.face(pos)
            face = faces[pos]
            weight = dual_pair(family, r, k, face.dim).weights[l].on(face)
            for a, f in enumerate(forms):
                if self.masks[a] & ~self.masks[b]:
                    continue
                self.dofs[b, a] = integrate_poly(wedge(weight, trace(f, face)))

        self.traces = {}
        for m in range(k, n):
            for pos in combinations(n + 1, m + 1):
                face = cell.face(pos)
                keys, M = coefficient_matrix([trace(f, face) for f in forms]) if forms else ([], None)
                if M is not None and M.shape[0]:
                    self.traces[pos] = M
        logger.debug("element tables for {}: {} local dofs".format(element.selector, size))

    @property
    def size(self):
        return len(self.element.forms)


@lru_cache(maxsize=None)
def element_tables(selector):
    return ElementTables(reference_element(selector))


class BiorthogonalSystem(object):
    """phi_{S,i} as columns of B over a GlobalFESpace without boundary
    conditions, with their dual functionals phi*_{S,i}."""

    def __init__(self, space, B):
        self.space = space
        self.complex = space.complex
        self.selector = space.selector
        self.B = B.tocsc()
        self.tables = element_tables(space.selector)
        self._csr = None

    @property
    def dim(self):
        return self.space.dim

    @property
    def rows(self):
        if self._csr is None:
            self._csr = self.B.tocsr()
        return self._csr

    def functional(self, j):
        S, i = self.space.dofs[j]
        family, r, k, n = self.selector.key
        return dof_space(S, family, r, k)[i]

    def column(self, j):
        return self.B[:, j].toarray().ravel()

    def basis_form(self, j, T):
        return self.space.cell_form(self.column(j), T)

    def to_ext(self, c):
        """Geometric decomposition coefficients of sum_j c[j] phi_j."""
        return self.B.dot(np.asarray(c, dtype=float))

    def cell_blocks(self, cells=None):
        """Yield (cell, local-to-global map, global columns, local coefficient
        block) for the basis forms supported on each cell."""
        cells = self.complex.cells if cells is None else cells
        rows = self.rows
        for T in cells:
            cmap = self.space.cell_maps[T.id]
            sub = rows[cmap]
            cols = np.unique(sub.indices)
            yield T, cmap, cols, sub[:, cols].toarray()


def build_biorthogonal(complex, family, r, k):
    """Localised biorthogonal system of P Lambda^k on complex (no boundary
    conditions)."""
    selector = FamilySelector(family, r, k, complex.n)
    space = GlobalFESpace(complex, None, selector)
    family, r, k, n = selector.key
    tables = element_tables(selector)
    local = tables.element.index

    phis = {}
    for m in range(n, k - 1, -1):
        count = ring_dimension(family, r, k, m)
        if count == 0:
            continue
        corrections = 0
        for S in complex.simplices[m]:
            above = complex.supersets(S)
            for i in range(count):
                j = space.index[(S.id, i)]
                col = {j: 1.0}
                for T in above:
                    C = complex.containing[T.id][0]
                    a = local[(C.positions_of(S), i)]
                    posT = C.positions_of(T)
                    for l in range(ring_dimension(family, r, k, T.dim)):
                        g = tables.dofs[local[(posT, l)], a]
                        if g == 0.0:
                            continue
                        corrections += 1
                        for row, v in phis[space.index[(T.id, l)]].items():
                            col[row] = col.get(row, 0.0) - g * v
                phis[j] = col
        logger.debug("dimension {}: {} simplices, {} corrections".format(
            m, len(complex.simplices[m]), corrections))

    rows, cols, vals = [], [], []
    for j, col in phis.items():
        for row, v in col.items():
            if v != 0.0:
                rows.append(row)
                cols.append(j)
                vals.append(v)
    B = sp.csc_matrix((vals, (rows, cols)), shape=(space.dim, space.dim))
    logger.info("biorthogonal system {}: dim {}, nnz {}".format(selector, space.dim, B.nnz))
    return BiorthogonalSystem(space, B)


def duality_matrix(system, cells=None):
    """[phi*_{S',j}(phi_{S,i})] as a sparse matrix, assembled from cells.

    Pairs that share no cell are zero and are not stored.
    """
    D = system.tables.dofs
    entries = {}
    for T, cmap, cols, U in system.cell_blocks(cells):
        R = D.dot(U)
        for b, row in enumerate(cmap):
            for c, col in enumerate(cols):
                entries[(int(row), int(col))] = R[b, c]
    M = sp.dok_matrix((system.dim, system.dim))
    for key, v in entries.items():
        M[key] = v
    return M.tocsr()


def duality_residual(system, cells=None):
    """max |[phi*(phi)] - I| over the cells given."""
    D = system.tables.dofs
    worst = 0.0
    for T, cmap, cols, U in system.cell_blocks(cells):
        E = (cmap[:, None] == cols[None, :]).astype(float)
        worst = max(worst, np.abs(D.dot(U) - E).max(initial=0.0))
    return worst


def locality_residual(system, cells=None):
    """max |tr_{S'} phi_{S,i}| over faces S' of the cells given with S not in S'."""
    tables = system.tables
    dofs = system.space.dofs
    worst = 0.0
    for T, cmap, cols, U in system.cell_blocks(cells):
        col_masks = np.array([sum(1 << p for p in T.positions_of(dofs[j][0])) for j in cols], dtype=int)
        for pos, M in tables.traces.items():
            face_mask = sum(1 << p for p in pos)
            outside = (col_masks & ~face_mask) != 0
            if outside.any():
                worst = max(worst, np.abs(M.dot(U[:, outside])).max())
    return worst


def basis_residual(system):
    """Deviation of B from a unit upper-triangular matrix in the
    dimension-descending order: (max |diag - 1|, count of entries whose row
    simplex is not of larger dimension than the column simplex)."""
    B = system.B.tocoo()
    dims = np.array([S.dim for S, i in system.space.dofs])
    diag = B.diagonal()
    off = B.row != B.col
    bad = int(np.sum(off & (dims[B.row] <= dims[B.col]) & (np.abs(B.data) > 0.0)))
    return float(np.abs(diag - 1.0).max(initial=0.0)), bad


class BoundaryRestriction(object):
    """The members phi_{S,i} with S outside U, written over the space with
    boundary conditions.

    Attributes:
      space:    GlobalFESpace with U excluded
      columns:  indices of the kept members in the unrestricted system
      B:        sparse (space.dim, len(columns)) coefficients
      leak:     max coefficient of a kept member on a dof of U (zero by locality)
    """

    def __init__(self, space, columns, B, leak):
        self.space = space
        self.columns = columns
        self.B = B
        self.leak = leak

    @property
    def dim(self):
        return len(self.columns)


def restrict_bc(system, boundary):
    space = system.space
    bc_space = GlobalFESpace(system.complex, boundary, system.selector)
    columns = np.array([j for j, (S, i) in enumerate(space.dofs) if S not in boundary], dtype=int)
    inside = np.array([j for j, (S, i) in enumerate(space.dofs) if S in boundary], dtype=int)
    kept = system.rows[:, columns] if len(columns) else sp.csr_matrix((space.dim, 0))
    leak = float(np.abs(kept[inside].toarray()).max(initial=0.0)) if len(inside) else 0.0

    select = sp.lil_matrix((bc_space.dim, space.dim))
    for j, (S, i) in enumerate(space.dofs):
        if (S.id, i) in bc_space.index:
            select[bc_space.index[(S.id, i)], j] = 1.0
    B = select.tocsr().dot(kept)
    logger.info("boundary restriction keeps {} of {} basis forms".format(len(columns), space.dim))
    return BoundaryRestriction(bc_space, columns, B.tocsc(), leak)


@attrs.frozen
class BiorthConstants(object):
    """Scale-free bounds of the biorthogonal system on one mesh.

    basis:     max over (S, i, T containing S) of h_S^(k - n/p) ||phi_{S,i}||_{L^p(T)}
    operator:  max over (S, i, T) and FE forms omega on T of
               |phi*_{S,i}(omega)| ||phi_{S,i}||_{L^p(T)} / ||omega||_{L^p(T)}
    """
    p: float
    basis: float
    operator: float
    cells: int


def _lp(mag, w, scale, p):
    if p == np.inf:
        return mag.max(axis=0)
    return (scale * w.dot(mag ** p)) ** (1.0 / p)


def measure_constants(system, p=2, cells=None, samples=32, seed=0, order=None):
    """Measure the two scaling constants of the system.

    For p = 2 the operator bound is the exact supremum over the local FE
    space, sqrt(d_b M^-1 d_b^T) ||phi_b||; other p use seeded random forms.
    """
    if p not in (1, 2, np.inf):
        raise ValueError("p must be 1, 2 or inf, got {}".format(p))
    family, r, k, n = system.selector.key
    order = 2 * r + (2 if p == 2 else 6) if order is None else order
    element = system.tables.element
    pts, w, vals = element.values(order)
    D = system.tables.dofs
    dofs = system.space.dofs
    rng = np.random.default_rng(seed)
    exponent = k - (n / p if p != np.inf else 0.0)

    basis = 0.0
    operator = 0.0
    count = 0
    for T, cmap, cols, U in system.cell_blocks(cells):
        count += 1
        cart = vals.dot(T.form_to_cartesian(k))
        scale = T.volume * factorial(n)
        fields = np.einsum('qac,aj->qjc', cart, U)
        col_norms = _lp(norm(fields, axis=2), w, scale, p)
        h = np.array([scale_length(dofs[j][0], T) for j in cols])
        basis = max(basis, (h ** exponent * col_norms).max(initial=0.0))

        where = {int(j): c for c, j in enumerate(cols)}
        phi_norms = np.array([col_norms[where[int(j)]] for j in cmap])
        if p == 2:
            M = scale * np.einsum('qac,qbc,q->ab', cart, cart, w)
            sup = np.sqrt(np.maximum(np.einsum('ba,ba->b', D, solve(M, D.T, assume_a='pos').T), 0.0))
        else:
            V = rng.standard_normal((D.shape[1], samples))
            omega = _lp(norm(np.einsum('qac,as->qsc', cart, V), axis=2), w, scale, p)
            sup = (np.abs(D.dot(V)) / omega[None, :]).max(axis=1)
        operator = max(operator, (sup * phi_norms).max(initial=0.0))
    return BiorthConstants(p=float(p), basis=float(basis), operator=float(operator), cells=count)


def dump_duality_csv(system, path, cells=None, tol=1e-14):
    """Write the nonzero entries of [phi*(phi)] as row,col,row simplex,col simplex,value."""
    M = duality_matrix(system, cells).tocoo()
    dofs = system.space.dofs
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['row', 'col', 'row_simplex', 'row_index', 'col_simplex', 'col_index', 'value'])
        order = np.lexsort((M.col, M.row))
        for a in order:
            if abs(M.data[a]) <= tol:
                continue
            S, i = dofs[M.row[a]]
            S2, i2 = dofs[M.col[a]]
            writer.writerow([int(M.row[a]), int(M.col[a]), '-'.join(map(str, S.vertex_ids)), i,
                             '-'.join(map(str, S2.vertex_ids)), i2, repr(float(M.data[a]))])
    logger.info("wrote duality matrix ({} entries) to {}".format(M.nnz, path))
