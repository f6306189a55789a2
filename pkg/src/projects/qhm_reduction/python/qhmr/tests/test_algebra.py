from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from qhmr.algebra import (BlockDecomposition, block_compatibility, center, commutant, distorted_closure,
                          distorted_generated_algebra, generated_algebra, is_compatible,
                          minimal_distortion_state, restrict_to_support,
                          support_restriction_maps, wedderburn)
from qhmr.channels import compose, validate_cptp
from qhmr.errors import NoPositiveElementError
from qhmr.generators import grover_model, tilted_pauli_span
from qhmr.linalg import is_density, support_projector
from qhmr.subspace import reachable_subspace
from qhmr.tests.common import I2, X, Y, Z, random_states


def local_algebra():
    """I kron B(C^2) on C^4"""
    return generated_algebra([np.kron(I2, X), np.kron(I2, Z)])


class GeneratedAlgebraTC(TestCase):
    def test_full_matrix_algebra(self):
        a = generated_algebra([X, Z])
        self.assertEqual(a.dim, 4)
        self.assertTrue(a.unital)
        self.assertLess(a.closure_residual(), 1e-9)

    def test_commutative(self):
        a = generated_algebra([np.diag([1.0, 2.0, 2.0])])
        self.assertEqual(a.dim, 2)
        self.assertTrue(a.contains(np.diag([0.0, 1.0, 1.0])))

    def test_tilted_pauli_span(self):
        gens, rho = tilted_pauli_span()
        a = generated_algebra(gens)
        self.assertEqual(a.dim, 8)
        self.assertEqual(center(a).dim, 2)
        self.assertTrue(center(a).contains(np.kron(Z, I2)))
        distorted = distorted_generated_algebra(rho, gens)
        self.assertEqual(distorted.base.dim, 4)
        self.assertTrue(distorted.base.contains(np.kron(I2, Y)))
        self.assertLess(distorted.closure_residual(), 1e-9)

    def test_weighted_closure_matches_distorted_algebra(self):
        gens, rho = tilted_pauli_span()
        direct = distorted_closure(rho, gens)
        self.assertTrue(direct.same_as(distorted_generated_algebra(rho, gens).basis))


class CommutantTC(TestCase):
    def test_local_algebra(self):
        a = local_algebra()
        self.assertEqual(a.dim, 4)
        comm = commutant(a)
        self.assertEqual(comm.dim, 4)
        self.assertTrue(comm.contains(np.kron(X, I2)))
        self.assertEqual(center(a).dim, 1)

    def test_full_and_diagonal(self):
        self.assertEqual(commutant(generated_algebra([X, Z])).dim, 1)
        diagonal = generated_algebra([np.diag([1.0, 2.0, 3.0])])
        self.assertEqual(center(diagonal).dim, 3)

    def test_scalar_algebra(self):
        self.assertEqual(commutant(generated_algebra([I2])).dim, 4)
        scalars = generated_algebra([5.0 * np.eye(3)])
        self.assertEqual(commutant(scalars).dim, 9)
        self.assertEqual(center(scalars).dim, 1)

    def test_large_generator_scale(self):
        a = generated_algebra([1e3 * np.kron(I2, X), 1e3 * np.kron(I2, Z)])
        self.assertEqual(commutant(a).dim, 4)


class WedderburnTC(TestCase):
    def test_tensor_factor(self):
        a = local_algebra()
        dec = wedderburn(a, seed=0)
        self.assertEqual(dec.blocks, [(2, 2)])
        self.assertEqual(dec.residual_dim, 0)
        self.assertLess(dec.round_trip_residual(a.basis), 1e-9)

    def test_direct_sum(self):
        gens, _ = tilted_pauli_span()
        a = generated_algebra(gens)
        dec = a.decomposition
        self.assertEqual(dec.blocks, [(2, 1), (2, 1)])
        self.assertEqual(dec.algebra_dim, 8)
        self.assertLess(dec.round_trip_residual(a.basis), 1e-9)

    def test_non_unital(self):
        E = np.zeros((3, 3))
        E[0, 0] = 1.0
        dec = wedderburn(generated_algebra([E]), seed=0)
        self.assertEqual(dec.blocks, [(1, 1)])
        self.assertEqual(dec.residual_dim, 2)

    def test_block_parts(self):
        a = local_algebra()
        dec = a.decomposition
        M = np.kron(I2, X)
        assert_allclose(dec.embed([dec.system_part(M, 0) / 2]), M, atol=1e-9)
        self.assertLess(dec.structure_residual(M), 1e-9)
        self.assertGreater(dec.structure_residual(np.kron(X, I2)), 0.5)

    def test_multiplicity_only(self):
        dec = wedderburn(generated_algebra([I2]), seed=0)
        self.assertEqual(dec.blocks, [(1, 2)])
        self.assertEqual(dec.residual_dim, 0)
        assert_allclose(dec.embed([np.eye(1)]), I2, atol=1e-9)

    def test_rotated_tensor_factor(self):
        # central element is a multiple of I up to round-off
        for seed in range(5):
            U = unitary_group.rvs(4, random_state=seed)
            a = generated_algebra([U @ np.kron(I2, X) @ U.conj().T,
                                   U @ np.kron(I2, Z) @ U.conj().T])
            dec = wedderburn(a, seed=seed)
            self.assertEqual(dec.blocks, [(2, 2)])
            self.assertLess(dec.round_trip_residual(a.basis), 1e-9)

    def test_rotated_direct_sum(self):
        gens, _ = tilted_pauli_span()
        U = unitary_group.rvs(4, random_state=7)
        a = generated_algebra([U @ g @ U.conj().T for g in gens])
        dec = a.decomposition
        self.assertEqual(dec.blocks, [(2, 1), (2, 1)])
        self.assertLess(dec.round_trip_residual(a.basis), 1e-9)

    def test_partial_traces(self):
        A = np.array([[1.0, 2.0j], [-2.0j, 3.0]])
        T = np.array([[0.5, 0.1, 0.0], [0.1, 0.3, 0.2j], [0.0, -0.2j, 0.2]])
        dec = BlockDecomposition(np.eye(6), [(2, 3)], 0)
        M = np.kron(A, T)
        self.assertEqual(dec.factor_part(M, 0).shape, (3, 3))
        assert_allclose(dec.factor_part(M, 0), np.trace(A) * T, atol=1e-12)
        assert_allclose(dec.system_part(M, 0), np.trace(T) * A, atol=1e-12)

    def test_seeded_determinism(self):
        first = wedderburn(local_algebra(), seed=3)
        second = wedderburn(local_algebra(), seed=3)
        assert_allclose(first.unitary, second.unitary)


class CompatibilityTC(TestCase):
    def test_central_state_is_compatible(self):
        gens, rho = tilted_pauli_span()
        base = distorted_generated_algebra(rho, gens).base
        self.assertTrue(is_compatible(rho, base))
        self.assertTrue(block_compatibility(rho, base))

    def test_random_state_is_not_compatible(self):
        rho = random_states(4, 1, seed=11)[0]
        a = local_algebra()
        self.assertFalse(is_compatible(rho, a))
        report = block_compatibility(rho, a)
        self.assertFalse(report)
        self.assertGreater(report.residual, 1e-6)

    def test_product_state(self):
        tau = np.diag([0.6, 0.4])
        rho = np.kron(tau, random_states(2, 1, seed=1)[0])
        self.assertTrue(is_compatible(rho, local_algebra()))
        self.assertTrue(block_compatibility(rho, local_algebra()))


class MinimalDistortionStateTC(TestCase):
    def test_positive_span(self):
        xi = 2 * I2 + Z
        gens = [np.kron(xi, I2), np.kron(xi, X)]
        sigma = minimal_distortion_state(gens, candidates=[np.kron(xi, I2)])
        self.assertTrue(is_density(sigma))
        assert_allclose(sigma, np.kron(xi, I2) / 8, atol=1e-9)
        alg = generated_algebra(gens)
        self.assertTrue(center(alg).contains(sigma))

    def test_no_positive_element(self):
        gens, _ = tilted_pauli_span()
        self.assertRaises(NoPositiveElementError, minimal_distortion_state, gens)


class SupportRestrictionTC(TestCase):
    def test_grover_restriction(self):
        m = grover_model(8, 1)
        P = support_projector(reachable_subspace(m).basis)
        R, J = support_restriction_maps(P)
        self.assertTrue(validate_cptp(R).is_cptp)
        self.assertTrue(validate_cptp(J).is_cptp)
        assert_allclose(compose(R, J).transfer, np.eye(4), atol=1e-12)
        restricted = restrict_to_support(m, P)
        self.assertEqual(restricted.dim, 2)
        self.assertAlmostEqual(np.trace(restricted.initial_states[0]).real, 1.0)

    def test_full_support_is_a_no_op(self):
        m = grover_model(8, 1)
        self.assertIs(restrict_to_support(m, np.eye(8)), m)

    def test_block_aware_restriction(self):
        P = np.diag([1.0, 0.0, 1.0]).astype(complex)
        R, J = support_restriction_maps(P, block_dims=[2, 1])
        self.assertEqual(R.out_dim, 2)
        assert_allclose(J.apply(np.diag([0.3, 0.7])), np.diag([0.3, 0.0, 0.7]), atol=1e-12)
