import csv
import os
import tempfile
import unittest

from .context import *


class Test_BiorthogonalSystem(unittest.TestCase):

    def test_duality_and_locality_2d(self):
        """phi*(phi) should be the identity and traces should vanish off the owning faces"""
        c = unit_square(1)
        for family, r, k in ((Family.FULL, 1, 0), (Family.FULL, 2, 0), (Family.TRIMMED, 1, 1),
                             (Family.FULL, 1, 1), (Family.TRIMMED, 2, 2)):
            system = build_biorthogonal(c, family, r, k)
            self.assertLess(duality_residual(system), 1e-9, "{} {} {}".format(family, r, k))
            self.assertLess(locality_residual(system), 1e-9, "{} {} {}".format(family, r, k))

    def test_duality_and_locality_3d(self):
        c = unit_cube(0)
        for family, r, k in ((Family.TRIMMED, 1, 1), (Family.FULL, 1, 2), (Family.FULL, 2, 0)):
            system = build_biorthogonal(c, family, r, k)
            self.assertLess(duality_residual(system), 1e-9)
            self.assertLess(locality_residual(system), 1e-9)

    def test_unit_triangular(self):
        """B should be unit upper triangular with respect to decreasing face dimension"""
        system = build_biorthogonal(unit_square(1), Family.FULL, 2, 1)
        diag, bad = basis_residual(system)
        self.assertLess(diag, 1e-12)
        self.assertEqual(bad, 0)

    def test_whitney_basis_is_identity(self):
        """Lowest-order trimmed spaces need no corrections"""
        system = build_biorthogonal(unit_square(1), Family.TRIMMED, 1, 1)
        self.assertEqual(system.B.nnz, system.dim)

    def test_to_ext(self):
        system = build_biorthogonal(unit_square(0), Family.FULL, 2, 0)
        c = np.random.default_rng(1).standard_normal(system.dim)
        np.testing.assert_allclose(system.to_ext(c), system.B.dot(c))

    def test_boundary_restriction(self):
        """Members outside U should have no component on dofs of U"""
        c = unit_square(1)
        U = BoundarySubcomplex.full_boundary(c)
        system = build_biorthogonal(c, Family.FULL, 2, 1)
        restricted = restrict_bc(system, U)
        self.assertLess(restricted.leak, 1e-12)
        self.assertEqual(restricted.dim, restricted.space.dim)
        self.assertEqual(restricted.B.shape, (restricted.space.dim, restricted.dim))

    def test_constants(self):
        """Constants should be positive and the exact L2 operator bound at least one"""
        system = build_biorthogonal(unit_square(1), Family.FULL, 1, 0)
        for p in (1, 2, np.inf):
            constants = measure_constants(system, p)
            self.assertEqual(constants.cells, 8)
            self.assertGreater(constants.basis, 0.0)
            self.assertGreater(constants.operator, 0.0)
        self.assertGreaterEqual(measure_constants(system, 2).operator, 1.0 - 1e-9)
        with self.assertRaises(ValueError):
            measure_constants(system, 3)

    def test_constants_scale_free(self):
        """Measured constants should not grow under uniform refinement"""
        coarse = measure_constants(build_biorthogonal(unit_square(1), Family.TRIMMED, 1, 1))
        fine = measure_constants(build_biorthogonal(unit_square(2), Family.TRIMMED, 1, 1))
        self.assertLess(fine.basis, 1.5 * coarse.basis)
        self.assertLess(fine.operator, 1.5 * coarse.operator)

    def test_constants_scale_free_3d(self):
        """On three cube refinements the constants should vary by less than five percent"""
        for family, k in ((Family.FULL, 1), (Family.TRIMMED, 2)):
            constants = [measure_constants(build_biorthogonal(unit_cube(level), family, 1, k))
                         for level in range(3)]
            for values in ([c.basis for c in constants], [c.operator for c in constants]):
                self.assertLess(max(values), 1.05 * min(values))

    def test_dump_duality_csv(self):
        system = build_biorthogonal(unit_square(0), Family.TRIMMED, 1, 1)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'duality.csv')
            dump_duality_csv(system, path)
            with open(path) as f:
                rows = list(csv.reader(f))
        self.assertEqual(rows[0], ['row', 'col', 'row_simplex', 'row_index', 'col_simplex', 'col_index', 'value'])
        self.assertEqual(len(rows) - 1, system.dim)
        for row in rows[1:]:
            self.assertEqual(row[0], row[1])
            self.assertAlmostEqual(float(row[6]), 1.0, places=12)
