import numpy as np
import pytest

from dirac_darboux.dirac_core import (
    PotentialSpec,
    evaluate_potential,
    fundamental_matrix,
    integrate_stationary,
    populations,
    stationary_generator,
    stationary_rhs,
)
from dirac_darboux.errors import BadGrid, NonHermitian, OutOfDomain, ZeroState
from dirac_darboux.pauli import SIGMA1, SIGMA2, SIGMA3, expm2

from .oracles import simpson


class TestEvaluatePotential:
    def test_constant_zero(self):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        np.testing.assert_array_equal(evaluate_potential(spec, 3.3), np.zeros((2, 2)))

    def test_polynomial(self):
        spec = PotentialSpec.polynomial({1: [0, 0, 1]})
        np.testing.assert_array_equal(evaluate_potential(spec, 2.0), 4 * SIGMA1)

    def test_sampled_midpoint(self):
        spec = PotentialSpec.from_grid([0.0, 1.0], [[0, 0, 0, 0], [0, 1, 0, 0]])
        np.testing.assert_allclose(evaluate_potential(spec, 0.5), 0.5 * SIGMA1)

    def test_sampled_nodes_exact(self):
        values = np.random.default_rng(1).normal(size=(11, 4)) + 0j
        spec = PotentialSpec.sampled(0.0, 0.1, values)
        t = 0.1 * np.arange(11)
        np.testing.assert_array_equal(spec.coefficients(t), values)

    def test_sampled_out_of_domain(self):
        spec = PotentialSpec.from_grid([0.0, 1.0], [[0, 0, 0, 0], [0, 1, 0, 0]])
        with pytest.raises(OutOfDomain):
            evaluate_potential(spec, 1.5)

    def test_nonuniform_grid_rejected(self):
        with pytest.raises(BadGrid):
            PotentialSpec.from_grid([0.0, 1.0, 3.0], np.zeros((3, 4)))

    def test_sinusoidal(self):
        spec = PotentialSpec.sinusoidal({2: (2.0, 3.0, 0.5, 0.25)})
        np.testing.assert_allclose(spec.coefficients(0.7)[2], 2 * np.sin(2.1 + 0.5) + 0.25)

    def test_hermitian_flag_checked(self):
        spec = PotentialSpec.constant([0, 1j, 0, 0], hermitian=True)
        with pytest.raises(NonHermitian):
            spec.matrix(0.0)
        ok = PotentialSpec.constant([0.2, 1, 0, 0], hermitian=True)
        m = ok.matrix(0.0)
        np.testing.assert_array_equal(m, m.conj().T)

    def test_vectorized(self):
        spec = PotentialSpec.polynomial({3: [1, 2]})
        t = np.linspace(0, 1, 5)
        np.testing.assert_allclose(spec.coefficients(t)[:, 3], 1 + 2 * t)


class TestRhs:
    def test_zero(self):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        np.testing.assert_array_equal(stationary_rhs(spec, 0.0, 0.0, [0.3, 1j]), [0, 0])

    @pytest.mark.parametrize("psi, expected", [((1, 0), (-1j, 0)), ((0, 1), (0, 1j))])
    def test_free_eps_one(self, psi, expected):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        np.testing.assert_array_equal(stationary_rhs(spec, 1.0, 0.0, psi), expected)

    def test_rhs_solves_operator_equation(self):
        # i s3 psi' + V psi = eps psi
        spec = PotentialSpec.constant([0.1, 0.4, -0.2, 0.3])
        psi = np.array([0.6, 0.2 - 0.5j])
        eps = 0.8
        dpsi = stationary_rhs(spec, eps, 0.0, psi)
        np.testing.assert_allclose(1j * SIGMA3 @ dpsi + spec.matrix(0.0) @ psi, eps * psi, atol=1e-15)


class TestIntegrate:
    def test_constant_trajectory(self, backend):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        traj = integrate_stationary(spec, 0.0, (1, 0), 0.0, 10.0, 0.01)
        np.testing.assert_array_equal(traj.states, np.tile([1, 0], (1001, 1)))

    def test_free_exponential(self, backend):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        # pi/0.001 is not integral, so the closest valid grid is used
        traj = integrate_stationary(spec, 1.0, (1, 0), 0.0, np.pi, np.pi / 3000)
        assert traj.states[0, 0] == 1
        assert np.max(np.abs(traj.states[-1] - [-1, 0])) <= 1e-9

    def test_constant_sigma1_matches_expm(self, backend):
        spec = PotentialSpec.constant([0, 1, 0, 0])
        traj = integrate_stationary(spec, 0.0, (1, 0), 0.0, np.pi / 2, np.pi / 2000)
        ref = expm2(1j * SIGMA3 @ SIGMA1 * np.pi / 2) @ [1, 0]
        np.testing.assert_allclose(traj.states[-1], ref, atol=1e-12)

    @pytest.mark.parametrize("f, eps", [((0, 0.7, 0, 0.2), 0.3), ((0.1, 0, -0.5j, 0), 0.0), ((0, 0, 0.9, 0), 1.5)])
    def test_constant_equivalence(self, f, eps):
        spec = PotentialSpec.constant(f)
        traj = integrate_stationary(spec, eps, (0.6, 0.8j), 0.0, 10.0, 1e-3)
        gen = stationary_generator(spec, eps, 0.0)
        ref = expm2(gen[None] * traj.t[:, None, None]) @ np.array([0.6, 0.8j])
        scale = np.max(np.abs(ref))
        assert np.max(np.abs(traj.states - ref)) <= 1e-8 * scale

    def test_order_four(self, backend):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        errors = []
        for h in (1e-2, 5e-3, 2.5e-3):
            n = round(10 / h)
            traj = integrate_stationary(spec, 1.0, (1, 0), 0.0, n * h, h)
            errors.append(abs(traj.states[-1, 0] - np.exp(-1j * n * h)))
        ratios = [errors[0] / errors[1], errors[1] / errors[2]]
        assert all(12 <= r <= 20 for r in ratios), ratios

    def test_linearity(self):
        spec = PotentialSpec.polynomial({1: [0.2, 0.0, -0.1], 3: [0.0, 0.3]})
        a, b = 0.7 - 0.2j, -1.3j
        p, q = np.array([1, 0.5j]), np.array([-0.3, 2.0])
        lhs = integrate_stationary(spec, 0.4, a * p + b * q, 0, 3, 1e-3).states
        rhs = a * integrate_stationary(spec, 0.4, p, 0, 3, 1e-3).states + b * integrate_stationary(spec, 0.4, q, 0, 3, 1e-3).states
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))

    @pytest.mark.parametrize("t1, h", [(1.0, 0.3), (1.0, -0.1), (0.0, 0.1)])
    def test_bad_grid(self, t1, h):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        with pytest.raises(BadGrid):
            integrate_stationary(spec, 0.0, (1, 0), 0.0, t1, h)

    def test_trajectory_metadata(self):
        spec = PotentialSpec.polynomial({2: [0, 1]})
        traj = integrate_stationary(spec, 0.5, (1, 0), 1.0, 2.0, 0.1)
        assert traj.count == 11 and traj.eps == 0.5
        np.testing.assert_allclose(traj.t, 1.0 + 0.1 * np.arange(11))
        np.testing.assert_allclose(traj.potential[:, 2], traj.t)


class TestFundamentalMatrix:
    def test_identity(self):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        np.testing.assert_array_equal(fundamental_matrix(spec, 0.0, 0, 1, 0.01), np.eye(2))

    def test_free_pi(self):
        spec = PotentialSpec.constant([0, 0, 0, 0])
        phi = fundamental_matrix(spec, 1.0, 0, np.pi, np.pi / 1000)
        np.testing.assert_allclose(phi, -np.eye(2), atol=1e-9)

    def test_constant_sigma2(self):
        spec = PotentialSpec.constant([0, 0, 0.7, 0])
        phi = fundamental_matrix(spec, 0.3, 0, 2, 1e-3)
        ref = expm2(1j * SIGMA3 @ (0.7 * SIGMA2 - 0.3 * np.eye(2)) * 2)
        np.testing.assert_allclose(phi, ref, atol=1e-10)

    @pytest.mark.parametrize(
        "spec",
        [
            PotentialSpec.polynomial({3: [0.1, 0.2, -0.05], 1: [0.3]}),
            PotentialSpec.sinusoidal({3: (0.5j, 2.0, 0.1, 0.2), 2: (0.4, 1.0, 0.0, 0.0)}),
        ],
    )
    def test_liouville(self, spec):
        # tr(i s3 (V - eps)) = 2 i f3
        t0, t1, h, eps = 0.0, 4.0, 1e-3, 0.7
        phi = fundamental_matrix(spec, eps, t0, t1, h)
        t = np.linspace(t0, t1, 4001)
        integral = simpson(2j * spec.coefficients(t)[:, 3], h)
        expected = np.exp(integral)
        det = phi[0, 0] * phi[1, 1] - phi[0, 1] * phi[1, 0]
        assert abs(det - expected) <= 1e-8 * abs(expected)


class TestPopulations:
    @pytest.mark.parametrize(
        "psi, expected",
        [((1, 0), (1, 0)), ((2**-0.5, 2**-0.5), (0.5, 0.5)), ((2, 2j), (0.5, 0.5))],
    )
    def test_values(self, psi, expected):
        np.testing.assert_allclose(populations(np.array([psi])), [expected], atol=1e-15)

    def test_zero_state(self):
        with pytest.raises(ZeroState):
            populations(np.array([[0, 0]]))

    def test_sum_to_one(self):
        spec = PotentialSpec.constant([0, 0.3, 0.5j, 0])
        traj = integrate_stationary(spec, 0.2, (1, 0.3), 0, 5, 1e-2)
        p = populations(traj)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-15)
