import unittest

from .context import *


class Test_FacetForms(unittest.TestCase):

    def test_moments_reproduce_dofs(self):
        """Facet moments against xi should equal the degrees of freedom on P_r Lambda^k"""
        cases = [('full', 1, 0, 2, (0,)), ('full', 2, 0, 2, (0, 1)), ('full', 2, 1, 2, (0, 1)),
                 ('trimmed', 1, 1, 2, (0, 1)), ('trimmed', 2, 1, 3, (0, 2)), ('full', 2, 2, 3, (0, 1, 2)),
                 ('full', 2, 0, 3, (2,))]
        for family, r, k, n, positions in cases:
            count = dof_count(family, r, k, len(positions) - 1)
            for i in range(count):
                self.assertLess(moment_residual(family, r, k, n, positions, i), 1e-9,
                                "{} r={} k={} n={} {}".format(family, r, k, n, positions))

    def test_xi_rejects_cell_degree(self):
        T = Simplex.reference(2)
        F = T.face((0, 1))
        with self.assertRaises(ValueError):
            build_xi(F, F, 0, 'full', 1, 2)

    def test_extension_traces(self):
        """Xi should trace to xi on F and vanish on the other facets"""
        T = Simplex.reference(3)
        F = T.face((0, 1, 3))
        for S in (F.face((1, 2)), F):
            xi = build_xi(F, S, 0, 'full', 2, 1)
            ext = build_Xi(T, F, xi)
            self.assertLess(ext.trace_residual, 1e-10)
            self.assertLess(ext.other_residual, 1e-10)
            self.assertEqual(ext.incidence, incidence_sign(T, F))

    def test_extension_vanishes_exactly(self):
        """Every lifted term carries a vanishing factor, so traces on the other facets are exactly zero"""
        T = Simplex.reference(3)
        for family, r, k in (('full', 2, 1), ('full', 2, 0), ('trimmed', 2, 1), ('full', 1, 2)):
            for positions in ((0, 1, 3), (1, 2, 3)):
                F = T.face(positions)
                for S in (F.face((0, 1)), F.face((1, 2)), F):
                    for i in range(len(dof_space(S, family, r, k))):
                        ext = build_Xi(T, F, build_xi(F, S, i, family, r, k))
                        self.assertEqual(ext.other_residual, 0.0)
                        self.assertLessEqual(ext.reduced_residual, TOLERANCES.trace)
                        self.assertLessEqual(ext.trace_residual, TOLERANCES.trace)

    def test_extension_needs_facet(self):
        T = Simplex.reference(3)
        F = T.face((0, 1, 2))
        xi = build_xi(F, F.face((0, 1)), 0, 'trimmed', 1, 1)
        with self.assertRaises(ValueError):
            build_Xi(T, T.face((0, 1)), xi)


class Test_IntegrationByParts(unittest.TestCase):

    def setUp(self):
        self.c = unit_square(1)
        self.space = assemble_global(self.c, None, 'full', 2, 1)
        self.duals = FacetDuals(self.space, choose_anchors(self.c, BoundarySubcomplex.empty(self.c)))

    def test_polynomial(self):
        """Stokes identity for xi and Xi should hold exactly for polynomials"""
        rng = np.random.default_rng(6)
        for S, i in self.space.dofs:
            if S.dim == self.c.n:
                continue
            ext = self.duals.extension(S, i)
            omega = random_polyform(ext.T, 1, 3, rng)
            self.assertLess(ibp_check(ext, omega), 1e-9)

    def test_smooth(self):
        """Stokes identity should hold up to quadrature error for smooth forms"""
        omega = trig(2, 1)
        for S, i in self.space.dofs[:12]:
            if S.dim == self.c.n:
                continue
            self.assertLess(ibp_check(self.duals.extension(S, i), omega, order=16), 1e-6)

    def test_smooth_at_rule_order(self):
        """At order 2r+6 the smooth identity should hold to 1e-6 once the mesh resolves the target"""
        for family, k in ((Family.FULL, 0), (Family.TRIMMED, 1), (Family.FULL, 1)):
            check = verify.smooth_ibp_check(family, 1, k, trig(2, k))
            self.assertTrue(check.passed, str(check))

    def test_duality(self):
        """K applied to sum_j c_j phi_j should return c"""
        system = build_biorthogonal(self.c, 'full', 2, 1)
        duals = FacetDuals(system.space, choose_anchors(self.c, BoundarySubcomplex.empty(self.c)))
        c = np.random.default_rng(7).standard_normal(system.dim)
        form = system.space.piecewise(system.to_ext(c))
        np.testing.assert_allclose(duals.values(form), c, atol=1e-9)

    def test_sampled_agrees_with_exact(self):
        """Quadrature values of K on samples of an FE form should match the exact values"""
        system = build_biorthogonal(self.c, 'full', 1, 1)
        duals = FacetDuals(system.space, choose_anchors(self.c, BoundarySubcomplex.empty(self.c)))
        form = system.space.piecewise(np.random.default_rng(3).standard_normal(system.dim))
        sampled = SampledForm(2, 1, form.values, lambda x: form.d().values(x))
        np.testing.assert_allclose(duals.values(sampled, order=8), duals.values(form), atol=1e-9)

    def test_needs_derivative(self):
        rough = SampledForm(2, 1, lambda x: np.ones((len(x), 2)))
        with self.assertRaises(MissingExteriorDerivative):
            self.duals.values(rough)

    def test_scaling(self):
        scaling = measure_scaling(self.duals)
        self.assertGreater(scaling.count, 0)
        self.assertGreater(scaling.xi, 0.0)
        self.assertGreater(scaling.dxi, 0.0)
