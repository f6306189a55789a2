from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose

from qhmr.channels import (MAX_COMPOSED_KRAUS, Superoperator, adjoint, check_cptp, choi,
                           compose, compose_all, from_kraus, from_transfer,
                           kraus_from_choi, tp_residual, unitary_channel, validate_cptp,
                           with_kraus)
from qhmr.errors import CptpError, DimensionError
from qhmr.linalg import hs_inner
from qhmr.tests.common import X, Z, random_channel, random_ops, random_states


class SuperoperatorTC(TestCase):
    def test_kraus_application(self):
        S = random_channel(3, 3, seed=1)
        rho = random_states(3, 1)[0]
        expected = sum(K @ rho @ K.conj().T for K in S.kraus)
        assert_allclose(S.apply(rho), expected, atol=1e-12)
        assert_allclose(S(rho), expected, atol=1e-12)

    def test_identity(self):
        S = Superoperator.identity(3)
        rho = random_states(3, 1)[0]
        assert_allclose(S.apply(rho), rho)
        self.assertEqual(repr(S), "Superoperator(3 -> 3, 1 Kraus)")

    def test_power_apply(self):
        S = unitary_channel(X)
        traj = S.power_apply(np.diag([1.0, 0.0]), 2)
        self.assertEqual(len(traj), 3)
        assert_allclose(traj[1], np.diag([0.0, 1.0]))
        assert_allclose(traj[2], np.diag([1.0, 0.0]))

    def test_bad_shapes(self):
        self.assertRaises(DimensionError, from_kraus, [])
        self.assertRaises(DimensionError, from_kraus, [np.eye(2), np.eye(3)])
        self.assertRaises(DimensionError, Superoperator, np.eye(4), 3, 3)

    def test_rectangular(self):
        S = random_channel(3, 2, seed=2, n_out=2)
        self.assertEqual((S.in_dim, S.out_dim), (3, 2))
        self.assertFalse(S.is_square)
        self.assertAlmostEqual(np.trace(S.apply(random_states(3, 1)[0])).real, 1.0)


class AdjointTC(TestCase):
    def test_duality(self):
        S = random_channel(3, 2, seed=3)
        A = random_ops(3, 1, seed=4)[0]
        rho = random_states(3, 1, seed=5)[0]
        self.assertAlmostEqual(hs_inner(A, S.apply(rho)), hs_inner(adjoint(S).apply(A), rho))

    def test_adjoint_is_unital(self):
        S = random_channel(4, 3, seed=6)
        assert_allclose(S.adjoint().apply(np.eye(4)), np.eye(4), atol=1e-12)


class ComposeTC(TestCase):
    def test_order(self):
        S = compose(unitary_channel(Z), from_kraus([np.diag([1.0, 0.0]),
                                                    np.array([[0, 1.0], [0, 0]])]))
        rho = np.array([[0.5, 0.5], [0.5, 0.5]])
        assert_allclose(S.apply(rho), np.diag([1.0, 0.0]), atol=1e-12)

    def test_kraus_kept_and_dropped(self):
        A = random_channel(2, 2, seed=1)
        B = random_channel(2, 2, seed=2)
        self.assertEqual(len(compose(A, B).kraus), 4)
        big = from_kraus([np.eye(2) / np.sqrt(MAX_COMPOSED_KRAUS)] * MAX_COMPOSED_KRAUS)
        self.assertIsNone(compose(big, A).kraus)
        assert_allclose(compose(big, A).transfer, A.transfer, atol=1e-12)

    def test_compose_all(self):
        A, B, C = (random_channel(2, 2, seed=s) for s in (1, 2, 3))
        rho = random_states(2, 1)[0]
        assert_allclose(compose_all(C, B, A).apply(rho), C(B(A(rho))), atol=1e-12)

    def test_dimension_mismatch(self):
        self.assertRaises(DimensionError, compose, random_channel(2), random_channel(3))


class CptpTC(TestCase):
    def test_random_channel_is_cptp(self):
        report = validate_cptp(random_channel(4, 3, seed=7))
        self.assertTrue(report.is_cptp)
        self.assertLess(report.tp_residual, 1e-12)
        self.assertGreater(report.min_choi_eig, -1e-12)

    def test_transpose_is_not_cp(self):
        swap = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                swap[i * 2 + j, j * 2 + i] = 1.0
        report = validate_cptp(from_transfer(swap))
        self.assertFalse(report.is_cp)
        self.assertTrue(report.is_tp)
        self.assertRaises(CptpError, check_cptp, from_transfer(swap))

    def test_not_trace_preserving(self):
        S = from_kraus([np.diag([1.0, 0.0])])
        report = validate_cptp(S)
        self.assertTrue(report.is_cp)
        self.assertFalse(report.is_tp)
        self.assertAlmostEqual(tp_residual(S), 1.0)

    def test_choi_of_identity(self):
        C = choi(Superoperator.identity(2))
        omega = np.zeros(4)
        omega[[0, 3]] = 1.0
        assert_allclose(C, np.outer(omega, omega))


class KrausFromChoiTC(TestCase):
    def test_recovers_map(self):
        S = random_channel(3, 2, seed=8)
        plain = from_transfer(S.transfer)
        ops = kraus_from_choi(plain)
        self.assertEqual(len(ops), 2)
        assert_allclose(from_kraus(ops).transfer, S.transfer, atol=1e-10)
        assert_allclose(with_kraus(plain).transfer, S.transfer)

    def test_unitary_has_choi_rank_one(self):
        U = np.array([[0, 1], [1j, 0]]) @ np.diag([1, np.exp(0.3j)])
        self.assertEqual(len(kraus_from_choi(from_transfer(unitary_channel(U).transfer))), 1)

    def test_rejects_non_cp(self):
        swap = np.eye(4)[[0, 2, 1, 3]]
        self.assertRaises(CptpError, kraus_from_choi, from_transfer(swap))
