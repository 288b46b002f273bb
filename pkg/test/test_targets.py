import unittest

from .context import *


class Test_Targets(unittest.TestCase):

    def setUp(self):
        self.points = np.random.default_rng(21).random((12, 3))

    def test_derivatives(self):
        """Supplied exterior derivatives should match finite differences"""
        for n in (2, 3):
            x = self.points[:, :n]
            for k in range(n):
                self.assertLess(trig(n, k).check_derivative(x), 1e-5)
                self.assertLess(bc_trig(n, k).check_derivative(x), 1e-5)
                self.assertLess(polynomial(n, k, 3, seed=k).check_derivative(x), 1e-5)

    def test_bc_trig_vanishes_on_sides(self):
        x = np.array([[0.0, 0.3], [0.6, 1.0], [1.0, 0.2], [0.4, 0.0]])
        np.testing.assert_allclose(bc_trig(2, 1).values(x), 0.0, atol=1e-14)
        left = bc_trig(2, 0, sides=['left'])
        self.assertAlmostEqual(float(left.values(x[:1])[0, 0]), 0.0, places=14)
        self.assertNotAlmostEqual(float(left.values(x[2:3])[0, 0]), 0.0, places=6)

    def test_unknown_side(self):
        with self.assertRaises(ValueError):
            boundary_factor(2, ['front'])
        with self.assertRaises(ValueError):
            boundary_factor(2, ['nowhere'])

    def test_zero(self):
        form = zero(3, 2)
        self.assertEqual(form.values(self.points).shape, (12, 3))
        self.assertEqual(np.abs(form.values(self.points)).max(), 0.0)

    def test_broken_fe(self):
        """The broken FE target is exactly piecewise polynomial on the coarse mesh"""
        coarse = unit_square(0)
        form = manufactured_target('broken_fe', 2, 1, coarse=coarse, r=1)
        self.assertIsNotNone(form.piecewise)
        self.assertTrue(form.has_d)

    def test_named_targets(self):
        self.assertEqual(manufactured_target('trig', 2, 1).name, 'trig')
        with self.assertRaises(UnknownTarget):
            manufactured_target('gaussian', 2, 1)
        with self.assertRaises(ValueError):
            manufactured_target('broken_fe', 2, 1)
