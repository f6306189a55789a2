from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose

from qhmr.channels import from_kraus, kraus_from_choi
from qhmr.config import Settings
from qhmr.errors import CertificateMismatchError
from qhmr.generators import (appendix_model, example3_model, fixed_point_model,
                             grover_model, identity_model, interface_model)
from qhmr.reduction import (ReductionCertificate, ReductionStep, certificate_cptp_reports,
                            reduce, reduce_iterative, reduce_observable,
                            reduce_reachable, trajectory_average, verify_equivalence)
from qhmr.subspace import QhmModel
from qhmr.tests.common import random_channel, random_states


def grover_populations(N, M, horizon):
    """|<i|psi_t>|^2 by state-vector simulation"""
    psi = np.ones(N, dtype=complex) / np.sqrt(N)
    oracle = np.eye(N)
    oracle[range(M), range(M)] = -1.0
    step = (2.0 * np.outer(psi, psi.conj()) - np.eye(N)) @ oracle
    rows = []
    for _ in range(horizon + 1):
        rows.append(np.abs(psi) ** 2)
        psi = step @ psi
    return np.array(rows)


class FixedPointTC(TestCase):
    def test_trajectory_average_is_the_fixed_point(self):
        m = fixed_point_model()
        average = trajectory_average(m)
        assert_allclose(average / np.trace(average), m.initial_states[0], atol=1e-9)

    def test_reduces_to_a_scalar(self):
        m = fixed_point_model()
        cert = reduce(m)
        self.assertEqual(cert.reduced.operator_dim, 1)
        self.assertTrue(cert.converged)
        expected = np.real(np.trace(m.output_ops[0] @ m.initial_states[0]))
        assert_allclose(cert.reduced.outputs(cert.reduced.initial_states[0], 5).real,
                        expected, atol=1e-9)
        self.assertLess(cert.max_output_deviation, 1e-8)


class GroverTC(TestCase):
    def check_grover(self, N, M):
        m = grover_model(N, M)
        cert = reduce(m)
        reduced = cert.reduced
        self.assertEqual(reduced.dim, 2)
        self.assertEqual(reduced.operator_dim, 4)
        self.assertEqual(len(kraus_from_choi(reduced.map)), 1)
        assert_allclose(reduced.outputs(reduced.initial_states[0], 100).real,
                        grover_populations(N, M, 100), atol=1e-8)

    def test_grover_8_1(self):
        self.check_grover(8, 1)

    def test_grover_16_3(self):
        self.check_grover(16, 3)

    def test_reachable_step_restricts_first(self):
        m = grover_model(8, 1)
        reduced, step = reduce_reachable(m)
        self.assertEqual(step.kind, "reachable")
        self.assertEqual(step.input_dim, 64)
        self.assertEqual(step.output_dim, 4)
        self.assertIsNotNone(step.restriction)
        self.assertEqual(step.restriction.kind, "support-restriction")
        self.assertEqual(step.restriction.diagnostics["support_rank"], 2)
        self.assertEqual(step.restriction.output_dim, 4)
        self.assertLess(step.diagnostics["state_deviation"], 1e-8)

    def test_state_equivalence(self):
        m = grover_model(8, 1)
        cert = reduce(m, "reachable")
        report = verify_equivalence(m, cert, 40)
        self.assertIsNotNone(report.max_state_deviation)
        self.assertLess(report.max_state_deviation, 1e-8)
        self.assertTrue(report.passed)

    def test_certificate_maps(self):
        cert = reduce(grover_model(8, 1))
        for name, report in certificate_cptp_reports(cert).items():
            self.assertTrue(report.is_cptp, name)
        self.assertLess(cert.projection_residual(), 1e-8)
        self.assertEqual(cert.dims[0], 64)
        self.assertEqual(cert.dims[-1], 4)


class AppendixTC(TestCase):
    def test_single_reachable_pass(self):
        cert = reduce(appendix_model(), "reachable")
        self.assertEqual(cert.reduced.operator_dim, 4)

    def test_iterative(self):
        m = appendix_model()
        cert = reduce(m)
        reduced = cert.reduced
        self.assertEqual(reduced.operator_dim, 2)
        self.assertEqual(cert.linear_lower_bound, 2)
        expected = [[0.5, 0.5], [5 / 7, 2 / 7], [0.5, 0.5]]
        for x, diag in zip(reduced.initial_states, expected):
            assert_allclose(np.diag(x).real, diag, atol=1e-9)
        self.assertLess(cert.max_output_deviation, 1e-8)


class Example3TC(TestCase):
    def test_dimension_sequence(self):
        taus = [None, np.diag([0.6, 0.4]), np.array([[0.7, 0.1j], [-0.1j, 0.3]])]
        for tau in taus:
            m = example3_model(tau)
            cert = reduce(m)
            self.assertEqual(cert.dims[:4], [16, 4, 2, 1])
            self.assertEqual(cert.reduced.operator_dim, 1)
            self.assertEqual(cert.iterations, 3)
            self.assertTrue(cert.converged)
            self.assertTrue(verify_equivalence(m, cert).passed)

    def test_observable_first(self):
        m = example3_model()
        cert = reduce_iterative(m, order="observable-first")
        self.assertEqual(cert.steps[0].kind, "observable")
        self.assertEqual(cert.reduced.operator_dim, 1)

    def test_max_iters(self):
        cert = reduce_iterative(example3_model(), max_iters=1)
        self.assertFalse(cert.converged)
        self.assertEqual(cert.iterations, 1)
        self.assertEqual(cert.reduced.operator_dim, 2)


class InterfaceTC(TestCase):
    def test_observable_blocks(self):
        m = interface_model()
        reduced, step = reduce_observable(m)
        # I_S (x) Z on the interface is never reached from the outputs
        self.assertEqual(step.diagnostics["observable_rank"], 7)
        self.assertEqual(step.diagnostics["algebra_dim"], 8)
        self.assertEqual(step.diagnostics["blocks"], [[2, 3], [2, 3]])
        self.assertEqual(reduced.dim, 4)
        self.assertEqual(reduced.operator_dim, 8)
        self.assertEqual(reduced.block_dims, [2, 2])

    def test_random_state_equivalence(self):
        m = interface_model()
        cert = reduce(m, "observable")
        report = verify_equivalence(m, cert, 40, trials=10)
        self.assertIsNotNone(report.max_trial_deviation)
        self.assertLess(report.max_trial_deviation, 1e-8)
        self.assertTrue(report.passed)


class TrivialModelsTC(TestCase):
    def test_identity_output(self):
        m = QhmModel(random_channel(3, seed=4), [np.eye(3)], random_states(3, 1, seed=4))
        reduced, step = reduce_observable(m)
        self.assertEqual(reduced.operator_dim, 1)
        assert_allclose(reduced.outputs(reduced.initial_states[0], 3).real, 1.0,
                        atol=1e-9)

    def test_nothing_to_reduce(self):
        m = identity_model(2)
        cert = reduce(m)
        self.assertEqual(cert.reduced.operator_dim, 4)
        self.assertEqual(cert.iterations, 1)
        self.assertTrue(cert.converged)

    def test_unknown_algorithm(self):
        self.assertRaises(ValueError, reduce, identity_model(2), "sideways")
        self.assertRaises(ValueError, ReductionStep, "sideways", 4, 1, None, None)


class VerificationTC(TestCase):
    def test_corrupted_certificate_fails(self):
        m = grover_model(8, 1)
        cert = reduce(m)
        reduced = cert.reduced
        shifted = [C + 0.01 * np.eye(reduced.dim) for C in reduced.output_ops]
        broken = QhmModel(reduced.map, shifted, reduced.initial_states,
                          block_dims=reduced.block_dims)
        corrupted = ReductionCertificate(cert.steps, cert.R_star, cert.J_star, broken)
        report = verify_equivalence(m, corrupted)
        self.assertFalse(report.passed)
        self.assertGreater(report.max_output_deviation, 1e-3)

    def test_certificate_of_another_model(self):
        cert = reduce(grover_model(8, 1))
        self.assertRaises(CertificateMismatchError, verify_equivalence,
                          grover_model(16, 1), cert)

    def test_custom_settings(self):
        m = grover_model(8, 1)
        cert = reduce(m, settings=Settings(horizon=12))
        self.assertEqual(cert.verified_horizon, 12)
        report = verify_equivalence(m, cert, 20, settings=Settings(residual_tol=1e-6))
        self.assertEqual(report.horizon, 20)
        self.assertEqual(report.threshold, 1e-6)

    def test_unitary_reduced_dynamics(self):
        reduced = reduce(grover_model(8, 1)).reduced
        K = kraus_from_choi(reduced.map)[0]
        assert_allclose(K.conj().T @ K, np.eye(2), atol=1e-9)
        self.assertLess(reduced.map.distance(from_kraus([K])), 1e-9)
