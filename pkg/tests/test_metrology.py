import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst
from numpy.testing import assert_allclose

import corpora
from oracles import PAULI, fidelity_qfi, grid_ip, sld_qfi
from qcorr import linalg as la
from qcorr import metrology as mt
from qcorr import states as st
from qcorr.errors import InvalidParameterError, InvalidShapeError

SZ_I = np.kron(np.diag([1.0, -1.0]), np.eye(2))
# SLD Bloch-grid value for werner(0.5) with spectrum {+1, -1}, frozen from tests/oracles.py
WERNER_HALF_IP = 0.3333333333333327
seeds = hst.integers(0, 2**32 - 1)


def hermitian(d, seed):
    g = la.ginibre(d, d, seed)
    return g + g.conj().T


class TestLocalObservable:
    def test_operator(self):
        u = la.haar_unitary(3, 2)
        obs = mt.LocalObservable("A", (0, 1, 3), u)
        k = obs.operator
        assert_allclose(k, k.conj().T, atol=1e-14)
        assert_allclose(np.linalg.eigvalsh(k), [0, 1, 3], atol=1e-12)

    def test_degenerate(self):
        with pytest.raises(InvalidParameterError):
            mt.LocalObservable("A", (1, 1), np.eye(2))

    def test_default_spectrum(self):
        assert mt.default_spectrum(3) == (0.0, 1.0, 2.0)


class TestQFI:
    @pytest.mark.parametrize("k", range(30))
    def test_pure_state_variance(self, k):
        psi = la.random_pure(4, 300 + k)
        h = hermitian(4, 400 + k)
        mean = np.vdot(psi, h @ psi).real
        var = np.vdot(psi, h @ h @ psi).real - mean**2
        assert abs(mt.qfi(np.outer(psi, psi.conj()), h) - 4 * var) < 1e-8

    def test_commuting_is_zero(self):
        u = la.haar_unitary(4, 1)
        rho = u @ np.diag([0.4, 0.3, 0.2, 0.1]) @ u.conj().T
        k = u @ np.diag([1.0, -2.0, 0.5, 3.0]) @ u.conj().T
        assert mt.qfi(rho, k) < 1e-12

    def test_bell_sigma_z(self):
        assert abs(mt.qfi(st.bell(), SZ_I) - 4) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(InvalidShapeError):
            mt.qfi(np.eye(4) / 4, np.eye(2))

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_matches_sld_oracle(self, seed):
        rho = la.random_density(4, seed=seed)
        k = hermitian(4, seed + 1)
        assert abs(mt.qfi(rho, k) - sld_qfi(rho, k)) < 1e-8 * max(1.0, sld_qfi(rho, k))

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_fidelity_expansion(self, seed):
        rho = la.random_density(4, seed=seed)
        k = hermitian(4, seed + 7) / 4
        assert abs(mt.qfi(rho, k) - fidelity_qfi(rho, k)) < 1e-3

    @settings(max_examples=40, deadline=None)
    @given(seeds, hst.booleans())
    def test_zero_iff_commuting(self, seed, commuting):
        u = la.haar_unitary(4, seed)
        rng = np.random.default_rng(seed)
        rho = u @ np.diag(rng.dirichlet(np.ones(4))) @ u.conj().T
        k = u @ np.diag(rng.normal(size=4)) @ u.conj().T if commuting else hermitian(4, seed + 1)
        commutator = np.linalg.norm(rho @ k - k @ rho)
        f = mt.qfi(rho, k)
        assert f >= 0
        assert (f < 1e-9) == (commutator < 1e-9)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_convexity(self, seed):
        r1, r2 = la.random_density(4, seed=seed), la.random_density(4, 2, seed=seed + 1)
        k = hermitian(4, seed + 2)
        assert mt.qfi((r1 + r2) / 2, k) <= (mt.qfi(r1, k) + mt.qfi(r2, k)) / 2 + 1e-9


class TestInterferometricPower:
    def test_bell(self):
        assert abs(mt.interferometric_power(st.bell(), "A", [1, -1]).value - 1) < 2e-4

    def test_bell_grid_oracle(self):
        assert abs(grid_ip(st.bell().rho, 12, 24) - 1) < 1e-9

    def test_cq(self):
        assert mt.interferometric_power(st.random_cq((2, 2), seed=1), "A", [1, -1]).value < 1e-6

    def test_werner_half(self):
        v = mt.interferometric_power(st.werner(0.5), "A", [1, -1]).value
        assert v > 0
        assert abs(v - WERNER_HALF_IP) < 1e-4

    def test_werner_half_oracle_is_frozen_value(self):
        assert abs(grid_ip(st.werner(0.5).rho, 20, 40) - WERNER_HALF_IP) < 1e-9

    @pytest.mark.parametrize("k", range(4))
    def test_random_grid_oracle(self, k):
        rho = corpora.state("mixed", k).rho
        assert abs(corpora.measure("IP_A", "mixed", k) - grid_ip(rho, 60, 120)) < 5e-3
        assert corpora.measure("IP_A", "mixed", k) <= grid_ip(rho, 60, 120) + 1e-9

    def test_spectrum_errors(self):
        with pytest.raises(InvalidParameterError):
            mt.interferometric_power(st.bell(), "A", [1, 2, 3])
        with pytest.raises(InvalidParameterError):
            mt.interferometric_power(st.bell(), "A", [1, 1])

    def test_default_spectrum_scaling(self):
        # spectrum {0, 1} is {+1, -1} shifted and halved: F scales by 1/4
        s = st.random_state(seed=3)
        a = mt.interferometric_power(s, "A").value
        b = mt.interferometric_power(s, "A", [1, -1]).value
        assert abs(4 * a - b) < 1e-6
        assert mt.interferometric_power(s, "A").extras["spectrum"] == [0.0, 1.0]

    def test_qutrit_cq(self):
        s = st.random_cq((3, 2), seed=2)
        assert mt.interferometric_power(s, "A").value < 1e-6
        assert mt.interferometric_power(st.random_state((3, 2), seed=2), "A").value > 1e-4

    def test_local_unitary_invariance(self):
        err = max(abs(corpora.measure("IP_A", "mixed", k) - corpora.measure("IP_A", "mixed", k, rotated=True)) for k in range(50))
        assert err < 2e-4


class TestQubitClosedForm:
    def test_bell(self):
        assert abs(mt.interferometric_power_qubit(st.bell()).value - 1) < 1e-9

    def test_maximally_mixed_marginal(self):
        s = st.product(np.eye(2) / 2, la.random_density(2, seed=1))
        assert mt.interferometric_power_qubit(s).value < 1e-12

    def test_requires_qubit(self):
        with pytest.raises(InvalidParameterError):
            mt.interferometric_power_qubit(st.random_state((3, 2), seed=0), "A")

    @settings(max_examples=40, deadline=None)
    @given(hst.sampled_from([(2, 2), (2, 3)]), seeds)
    def test_fisher_matrix_real_symmetric(self, dims, seed):
        m = mt.qubit_fisher_matrix(st.random_state(dims, seed=seed))
        assert np.max(np.abs(m - m.T)) < 1e-10
        assert np.max(np.abs(m.imag)) < 1e-10

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_quadratic_form(self, seed):
        s = st.random_state((2, 2), seed=seed)
        n = np.random.default_rng(seed).normal(size=3)
        n /= np.linalg.norm(n)
        k = np.kron(sum(c * p for c, p in zip(n, PAULI)), np.eye(2))
        assert abs(mt.qfi(s, k) - 4 * n @ mt.qubit_fisher_matrix(s).real @ n) < 1e-10

    def test_matches_optimizer(self):
        err = max(abs(corpora.measure("IPQ_A", "mixed", k) - corpora.measure("IP_A", "mixed", k)) for k in range(50))
        assert err < 1e-4

    def test_side_b(self):
        s = st.random_state((3, 2), seed=4)
        closed = mt.interferometric_power_qubit(s, "B").value
        assert abs(closed - mt.interferometric_power(s, "B", [1, -1]).value) < 1e-4
