import unittest

from .context import *


class Test_DualPairs(unittest.TestCase):

    def test_weight_families(self):
        """Weights of P_r Lambda^k on an m-simplex live in P^-_{r+k-m} Lambda^{m-k} and vice versa"""
        self.assertEqual(weight_family('full', 2, 1, 2), (Family.TRIMMED, 1, 1))
        self.assertEqual(weight_family('full', 2, 1, 1), (Family.FULL, 2, 0))
        self.assertIsNone(weight_family('full', 1, 0, 2))
        self.assertEqual(weight_family('trimmed', 2, 1, 2), (Family.FULL, 0, 1))
        self.assertIsNone(weight_family('trimmed', 1, 1, 2))

    def test_counts_match_rings(self):
        """Each simplex should carry as many functionals as its ring space has forms"""
        for family in Family:
            for n in (2, 3):
                for r in (1, 2, 3):
                    for k in range(1 if family is Family.TRIMMED else 0, n + 1):
                        for m in range(k, n + 1):
                            self.assertEqual(dof_count(family, r, k, m), ring_dimension(family, r, k, m))

    def test_pairing_is_identity(self):
        """Adjusted weights should pair to the identity with the ring basis"""
        for family, r, k, m in ((Family.FULL, 3, 0, 2), (Family.TRIMMED, 2, 1, 2), (Family.FULL, 3, 1, 3),
                                (Family.TRIMMED, 2, 2, 3)):
            pair = dual_pair(family, r, k, m)
            np.testing.assert_allclose(pair.pairing(), np.identity(pair.dim), atol=1e-10)
            self.assertLess(pair.condition, 1e12)

    def test_build_dual_pairs(self):
        pairs = build_dual_pairs('trimmed', 1, 1, 3)
        self.assertEqual(sorted(pairs), [1, 2, 3])
        self.assertEqual(pairs[1].dim, 1)
        self.assertEqual(pairs[2].dim, 0)


class Test_DofFunctional(unittest.TestCase):

    def test_whitney_edge_dofs(self):
        """Lowest-order edge functionals are edge integrals"""
        T = Simplex.reference(2)
        for sigma in ((0, 1), (0, 2), (1, 2)):
            dof = dof_space(T.face(sigma), 'trimmed', 1, 1)[0]
            self.assertAlmostEqual(abs(dof(whitney_form(T, sigma))), 1.0, places=12)

    def test_exact_and_sampled_agree(self):
        """Quadrature on samples should agree with the exact trace integral for polynomials"""
        rng = np.random.default_rng(8)
        T = verify.random_cell(2, rng)
        omega = random_polyform(T, 1, 3, rng)
        sampled = SampledForm(2, 1, omega.values)
        for dof in dof_space(T.face((0, 2)), 'full', 3, 1) + dof_space(T, 'full', 3, 1):
            self.assertAlmostEqual(apply_dof(dof, omega), apply_dof(dof, sampled, T), places=10)

    def test_trace_unavailable(self):
        rough = SampledForm(2, 0, lambda x: np.ones(len(x)), has_trace=False)
        dof = reference_functional('full', 1, 0, 0, 0)
        with self.assertRaises(TraceUnavailable):
            apply_dof(dof, rough)

    def test_cell_dofs_unisolvent(self):
        """Functionals of all faces should be unisolvent on the local space"""
        T = Simplex.reference(2)
        for family, r, k in ((Family.FULL, 2, 0), (Family.TRIMMED, 2, 1), (Family.FULL, 1, 1)):
            dofs = [d for m in range(k, 3) for pos in combinations(3, m + 1)
                    for d in dof_space(T.face(pos), family, r, k)]
            basis = local_basis(T, family, r, k).forms
            self.assertEqual(len(dofs), len(basis))
            M = np.array([[d(f) for f in basis] for d in dofs])
            self.assertEqual(np.linalg.matrix_rank(M), len(basis))
