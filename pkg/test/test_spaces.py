import unittest

from .context import *


class Test_LocalSpaces(unittest.TestCase):

    def test_dimension_formulas(self):
        """Rank of the spanning sets should match the closed-form dimensions"""
        for n in (1, 2, 3):
            ref = Simplex.reference(n)
            for r in (1, 2, 3):
                for k in range(n + 1):
                    self.assertEqual(local_basis(ref, Family.FULL, r, k).dim,
                                     space_dimension(Family.FULL, r, k, n))
                    if k > 0:
                        self.assertEqual(local_basis(ref, Family.TRIMMED, r, k).dim,
                                         space_dimension(Family.TRIMMED, r, k, n))

    def test_known_dimensions(self):
        """Lowest-order Nedelec, Raviart-Thomas and BDM dimensions on a tetrahedron"""
        self.assertEqual(space_dimension('trimmed', 1, 1, 3), 6)
        self.assertEqual(space_dimension('trimmed', 1, 2, 3), 4)
        self.assertEqual(space_dimension('full', 1, 2, 3), 12)
        self.assertEqual(space_dimension('full', 1, 1, 2), 6)
        self.assertEqual(space_dimension('trimmed', 1, 1, 2), 3)

    def test_inclusion_chain(self):
        """P_r in P_{r+1}^- in P_{r+1} and dP_{r+1} = dP_{r+1}^- in P_r"""
        for n in (2, 3):
            for r in (0, 1, 2):
                for k in range(n + 1):
                    for key, value in inclusion_residuals(n, r, k).items():
                        self.assertLess(value, 1e-9, "{} r={} k={} n={}".format(key, r, k, n))

    def test_koszul_description(self):
        """P_r^- = P_{r-1} + kappa P_{r-1}Lambda^{k+1}"""
        for n in (2, 3):
            ref = Simplex.reference(n)
            for r in (1, 2):
                for k in range(1, n + 1):
                    self.assertLess(koszul_space_equivalence(ref, r, k), 1e-9)

    def test_ring_dimensions(self):
        """Ring dimensions should add up to the local space over all faces"""
        for family in Family:
            for n in (2, 3):
                for r in (1, 2):
                    for k in range(1 if family is Family.TRIMMED else 0, n + 1):
                        total = sum(ring_dimension(family, r, k, m) * len(combinations(n + 1, m + 1))
                                    for m in range(k, n + 1))
                        self.assertEqual(total, space_dimension(family, r, k, n))

    def test_ring_forms_are_bubbles(self):
        """Ring forms should have vanishing traces on every proper face"""
        T = Simplex.reference(2)
        for family, r, k in ((Family.FULL, 3, 0), (Family.TRIMMED, 2, 1), (Family.FULL, 2, 1)):
            ring = ring_basis(T, family, r, k)
            self.assertGreater(ring.dim, 0)
            for f in ring.forms:
                for e in ((0, 1), (0, 2), (1, 2)):
                    self.assertLess(trace(f, T.face(e)).coefficient_norm(), 1e-10)

    def test_extension_is_local(self):
        """An extended edge bubble should vanish on the faces not containing the edge"""
        T = Simplex.reference(3)
        F = T.face((0, 1))
        for f in ring_basis(F, Family.FULL, 2, 1).forms:
            ext = extend_to_cell(F, f, T, Family.FULL, 2, 1)
            np.testing.assert_allclose(trace(ext, F).evaluate(np.array([[0.3]])), f.evaluate(np.array([[0.3]])),
                                       atol=1e-12)
            self.assertLess(trace(ext, T.face((1, 2, 3))).coefficient_norm(), 1e-10)
            self.assertLess(trace(ext, T.face((0, 2, 3))).coefficient_norm(), 1e-10)

    def test_not_a_bubble(self):
        """Extending a form with a nonzero boundary trace should fail"""
        T = Simplex.reference(2)
        F = T.face((0, 1))
        with self.assertRaises(NotABubble):
            extend_to_cell(F, PolyForm.constant(F), T, Family.FULL, 1, 0)

    def test_selector_normalization(self):
        self.assertEqual(FamilySelector('trimmed', 2, 0, 2).family, Family.FULL)
        selector = FamilySelector('full', 1, 2, 2)
        self.assertEqual((selector.family, selector.r), (Family.TRIMMED, 2))
        with self.assertRaises(ValueError):
            FamilySelector('full', 0, 1, 2)


class Test_GlobalFESpace(unittest.TestCase):

    def test_lagrange_dimension(self):
        """Continuous P2 on the refined square has one dof per vertex and edge"""
        c = unit_square(1)
        space = assemble_global(c, None, 'full', 2, 0)
        self.assertEqual(space.dim, len(c.simplices[0]) + len(c.simplices[1]))

    def test_nedelec_dimension(self):
        c = unit_cube(0)
        space = assemble_global(c, None, 'trimmed', 1, 1)
        self.assertEqual(space.dim, len(c.simplices[1]))

    def test_continuity(self):
        """Random FE forms should have single-valued traces across interior faces"""
        rng = np.random.default_rng(4)
        for family, r, k in ((Family.FULL, 2, 0), (Family.TRIMMED, 1, 1), (Family.FULL, 1, 1)):
            space = assemble_global(unit_square(1), None, family, r, k)
            self.assertLess(space.continuity_residual(rng.standard_normal(space.dim)), 1e-10)

    def test_boundary_conditions(self):
        """FE forms of a space with boundary conditions should vanish on U"""
        c = unit_square(1)
        U = BoundarySubcomplex.full_boundary(c)
        space = assemble_global(c, U, 'trimmed', 2, 1)
        free = assemble_global(c, None, 'trimmed', 2, 1)
        self.assertLess(space.dim, free.dim)
        coeffs = np.random.default_rng(5).standard_normal(space.dim)
        self.assertLess(space.boundary_residual(coeffs, U), 1e-10)

    def test_global_extension(self):
        """Extending an edge bubble gives an FE form with that trace on the edge, zero away from it"""
        c = unit_square(1)
        space = assemble_global(c, None, 'full', 2, 0)
        F = c.simplices[1][4]
        bubble = ring_basis(F, Family.FULL, 2, 0).forms[0]
        u = extend(F, bubble, space)
        self.assertEqual(np.count_nonzero(u), 1)
        t = np.array([[0.25], [0.5]])
        for T in c.cells:
            form = space.cell_form(u, T)
            if T.contains(F):
                np.testing.assert_allclose(trace(form, F).evaluate(t), bubble.evaluate(t), atol=1e-12)
            else:
                self.assertLess(form.coefficient_norm(), 1e-12)

    def test_build_complex(self):
        """Two triangles sharing an edge see it with opposite orientations"""
        c = build_complex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [[0, 1, 2], [1, 3, 2]])
        self.assertEqual([len(s) for s in c.simplices], [4, 5, 2])
        e = c.simplex([1, 2])
        T0, T1 = c.containing[e.id]
        self.assertEqual(c.facet_incidence[(T0.id, e.id)], -c.facet_incidence[(T1.id, e.id)])
