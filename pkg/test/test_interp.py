import unittest

from .context import *
from interp.smoothers import _kernel_weights, bump_exponent


class Test_Smoothers(unittest.TestCase):

    def test_reproduces_polynomials(self):
        """Averaged Taylor polynomials of degree r should reproduce polynomials of degree r"""
        c = unit_square(1)
        omega = polynomial(2, 1, 2, seed=3)
        for S in (c.simplices[0][4], c.simplices[1][2], c.cells[5]):
            P = averaged_taylor(omega, S, c, 2)
            x = c.cells[0].to_cartesian(np.array([[0.2, 0.3], [0.6, 0.1]]))
            np.testing.assert_allclose(P.values(x), omega.values(x), atol=1e-10)

    def test_commutes_with_d(self):
        """d P^r omega = P^(r-1) d omega"""
        c = unit_cube(0)
        omega = polynomial(3, 1, 3, seed=5)
        smoother = LocalSmoother(c.simplices[1][3], c, 2)
        x = smoother.cell.to_cartesian(np.array([[0.1, 0.2, 0.3], [0.25, 0.25, 0.25]]))
        self.assertLess(smoother.derivative_residual(omega, x), 1e-9)

    def test_ball_inside_patch(self):
        c = unit_square(2)
        for S in c.simplices[0]:
            smoother = LocalSmoother(S, c, 1)
            self.assertTrue(smoother.cell.contains(S))
            bary = smoother.cell.barycentric(smoother.center[None, :])
            self.assertGreater(bary.min(), 0.0)

    def test_bump_exponent(self):
        """The averaging bump is (1 - |z|^2)^4 for every supported degree"""
        for r in range(5):
            self.assertEqual(bump_exponent(r), 4)
        with self.assertRaises(ValueError):
            bump_exponent(5)

    def test_kernel_normalization(self):
        """The constant kernel should integrate to one over the unit ball"""
        for n in (2, 3):
            z, W, betas = _kernel_weights(n, 0)
            self.assertAlmostEqual(W[:, 0].sum(), 1.0, places=10)


class Test_CellProjection(unittest.TestCase):

    def test_projects_onto_space(self):
        """Forms of the local space should be fixed by the cell projection"""
        T = verify.random_cell(2, np.random.default_rng(4))
        selector = FamilySelector('trimmed', 2, 1, 2)
        omega = local_basis(T, Family.TRIMMED, 2, 1).forms[3]
        projection = CellProjection(T, selector)
        best, dbest = projection.errors(omega)
        self.assertLess(best, 1e-10)
        self.assertLess(dbest, 1e-10)
        self.assertLess((projection(omega) - omega).coefficient_norm(), 1e-9)

    def test_rejects_inconsistent_derivative(self):
        T = verify.random_cell(2, np.random.default_rng(8))
        good = trig(2, 1)
        bad = SampledForm(2, 1, good.values, lambda x: good.d().values(x) - 3.0)
        with self.assertRaises(InconsistentDerivative):
            CellProjection(T, FamilySelector('full', 1, 1, 2)).errors(bad)

    def test_best_approximation(self):
        """Smooth targets should have small but positive best approximation errors"""
        c = unit_square(1)
        best, dbest = best_approximation(trig(2, 1), c, FamilySelector('full', 1, 1, 2))
        self.assertTrue((best > 0.0).all())
        self.assertTrue((dbest > 0.0).all())


class Test_Interpolants(unittest.TestCase):

    def test_scott_zhang_reproduces_fe_forms(self):
        """Scott-Zhang should return the coefficients of an FE form"""
        c = unit_square(1)
        for family, r, k in ((Family.FULL, 2, 0), (Family.TRIMMED, 1, 1), (Family.FULL, 1, 1)):
            system = build_biorthogonal(c, family, r, k)
            coeffs = np.random.default_rng(9).standard_normal(system.dim)
            omega = system.space.piecewise(system.to_ext(coeffs)).as_sampled()
            np.testing.assert_allclose(scott_zhang(omega, system).coefficients, coeffs, atol=1e-9)

    def test_scott_zhang_reproduces_polynomials(self):
        c = unit_cube(0)
        system = build_biorthogonal(c, Family.FULL, 1, 1)
        omega = polynomial(3, 1, 1, seed=2)
        result = scott_zhang(omega, system, order=8)
        self.assertLess(combine_cells(cell_errors(result, omega, 6)), 1e-8)

    def test_clement_reproduces_polynomials(self):
        """Clement should reproduce global polynomials of degree r for the full family"""
        c = unit_square(1)
        for family, r, k, degree in ((Family.FULL, 1, 0, 1), (Family.FULL, 2, 1, 2), (Family.TRIMMED, 2, 1, 1)):
            system = build_biorthogonal(c, family, r, k)
            omega = polynomial(2, k, degree, seed=r)
            result = clement(omega, system)
            self.assertLess(combine_cells(cell_errors(result, omega, 2 * r + 4)), 1e-8)

    def test_clement_reproduces_fe_forms(self):
        """Clement should return the coefficients of every global FE form"""
        c = unit_square(2)
        rng = np.random.default_rng(17)
        for family, r, k in ((Family.FULL, 1, 0), (Family.FULL, 2, 0), (Family.TRIMMED, 1, 1),
                             (Family.TRIMMED, 2, 1), (Family.FULL, 2, 1)):
            system = build_biorthogonal(c, family, r, k)
            coeffs = rng.standard_normal(system.dim)
            omega = system.space.piecewise(system.to_ext(coeffs)).as_sampled()
            result = clement(omega, system)
            self.assertLess(np.abs(result.coefficients - coeffs).max(), 1e-8, msg=str((family, r, k)))

    def test_rejects_inconsistent_derivative(self):
        """A supplied exterior derivative that does not match the form should be refused"""
        system = build_biorthogonal(unit_square(1), Family.TRIMMED, 1, 1)
        good = trig(2, 1)
        bad = SampledForm(2, 1, good.values, lambda x: 2.0 * good.d().values(x) + 1.0)
        with self.assertRaises(InconsistentDerivative):
            scott_zhang(bad, system)
        with self.assertRaises(InconsistentDerivative):
            clement(bad, system)
        self.assertLess(good.validate_derivative(np.array([[0.3, 0.4]])), 1e-5)

    def test_clement_converges(self):
        """Clement errors for a smooth target should drop under refinement"""
        omega = trig(2, 1)
        errors = []
        for level in (2, 3):
            system = build_biorthogonal(unit_square(level), Family.TRIMMED, 1, 1)
            errors.append(combine_cells(cell_errors(clement(omega, system), omega, 8)))
        self.assertLess(errors[1], 0.75 * errors[0])

    def test_clement_bc(self):
        """The boundary variant should have vanishing traces on U"""
        c = unit_square(1)
        U = BoundarySubcomplex.full_boundary(c)
        system = build_biorthogonal(c, Family.FULL, 1, 0)
        result = clement_bc(trig(2, 0), system, U)
        self.assertLess(trace_residual(result, U), 1e-12)
        self.assertEqual(len(result.zeroed), 8)

    def test_scott_zhang_bc(self):
        """With boundary data the functionals of U vanish and the traces on U are zero"""
        c = unit_square(2)
        U = BoundarySubcomplex.full_boundary(c)
        system = build_biorthogonal(c, Family.TRIMMED, 1, 1)
        result = scott_zhang(bc_trig(2, 1), system, boundary=U, order=16)
        self.assertLess(trace_residual(result, U), 1e-9)
        self.assertLess(np.abs(result.raw[result.zeroed]).max(), 1e-6)

    def test_interpolate_by_name(self):
        system = build_biorthogonal(unit_square(0), Family.FULL, 1, 0)
        omega = trig(2, 0)
        np.testing.assert_allclose(interpolate('clement', omega, system).coefficients,
                                   clement(omega, system).coefficients)
        with self.assertRaises(ValueError):
            interpolate('nodal', omega, system)

    def test_stability(self):
        system = build_biorthogonal(unit_square(1), Family.FULL, 1, 1)
        omega = trig(2, 1)
        ratios = stability_ratios(scott_zhang(omega, system), omega, 8, with_d=True)
        self.assertTrue(np.isfinite(ratios).all())
        self.assertGreater(ratios.max(), 0.0)

    def test_constants_level_independent(self):
        """Stability and broken_fe constants should vary by less than a factor of two over three levels"""
        for check in verify.constant_checks():
            self.assertTrue(check.passed, str(check))

    def test_broken_constant(self):
        """Errors bounded by local best approximation should give a finite constant"""
        c = unit_square(1)
        selector = FamilySelector('full', 1, 1, 2)
        system = build_biorthogonal(c, 'full', 1, 1)
        omega = trig(2, 1)
        errors = cell_errors(scott_zhang(omega, system), omega, 8)
        best, dbest = best_approximation(omega, c, selector)
        constant = broken_constant(errors, best, dbest, c)
        self.assertTrue(np.isfinite(constant))
        self.assertGreater(constant, 0.0)
