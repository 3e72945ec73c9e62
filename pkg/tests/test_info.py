import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from qcorr import info
from qcorr import linalg as la
from qcorr import states as st
from qcorr.errors import InvalidParameterError, PurityError


def direct_shannon(p):
    return -sum(x * math.log2(x) for x in p if x > 0)


class TestShannon:
    def test_pure(self):
        assert info.shannon([1, 0]) == 0

    def test_uniform(self):
        assert abs(info.shannon(np.full(8, 1 / 8)) - 3) < 1e-14

    def test_three_outcomes(self):
        assert abs(info.shannon([0.5, 0.25, 0.25]) - direct_shannon([0.5, 0.25, 0.25])) < 1e-15
        assert abs(info.shannon([0.5, 0.25, 0.25]) - 1.5) < 1e-15

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            info.shannon([0.5, 0.6])
        with pytest.raises(InvalidParameterError):
            info.shannon([1.2, -0.2])


class TestVonNeumann:
    def test_pure(self):
        assert info.von_neumann(np.diag([1, 0])) == 0

    @pytest.mark.parametrize("d", [2, 3, 4, 7])
    def test_maximally_mixed(self, d):
        assert abs(info.von_neumann(np.eye(d) / d) - math.log2(d)) < 1e-12

    def test_diagonal(self):
        assert abs(info.von_neumann(np.diag([0.5, 0.25, 0.25])) - 1.5) < 1e-14

    @pytest.mark.parametrize("seed", range(10))
    def test_unitary_invariance(self, seed):
        rho = la.random_density(4, seed=seed)
        u = la.haar_unitary(4, seed + 100)
        assert abs(info.von_neumann(rho) - info.von_neumann(u @ rho @ u.conj().T)) < 1e-10


class TestRelativeEntropy:
    def test_self(self):
        rho = la.random_density(3, seed=2)
        assert abs(info.relative_entropy(rho, rho)) < 1e-12

    def test_disjoint_support(self):
        assert info.relative_entropy(np.diag([1, 0]), np.diag([0, 1])) == float("inf")

    def test_qubit_value(self):
        want = 2 - 0.5 * math.log2(3) - 1
        assert abs(info.relative_entropy(np.eye(2) / 2, np.diag([0.75, 0.25])) - want) < 1e-12
        assert abs(want - 0.207519) < 1e-6

    def test_shape_mismatch(self):
        from qcorr.errors import InvalidShapeError

        with pytest.raises(InvalidShapeError):
            info.relative_entropy(np.eye(2) / 2, np.eye(3) / 3)

    def test_non_negative(self):
        for seed in range(10):
            rho, sigma = la.random_density(3, seed=seed), la.random_density(3, seed=seed + 50)
            assert info.relative_entropy(rho, sigma) >= 0


CORRELATED = st.ProbabilityTable([[0.5, 0.0], [0.0, 0.5]])


class TestClassicalMutualInformation:
    def test_product(self):
        p, q = np.array([0.3, 0.7]), np.array([0.1, 0.6, 0.3])
        t = st.ProbabilityTable(np.outer(p, q))
        assert abs(info.classical_mutual_information(t)) < 1e-12

    def test_correlated(self):
        assert abs(info.classical_mutual_information(CORRELATED) - 1) < 1e-14

    def test_pure_table(self):
        t = st.ProbabilityTable([[0, 0, 0], [0, 1, 0]])
        assert info.classical_mutual_information(t) == 0

    def test_J_correlated(self):
        assert abs(info.classical_J(CORRELATED, "A") - 1) < 1e-14
        assert abs(info.classical_J(CORRELATED, "B") - 1) < 1e-14

    def test_J_product(self):
        t = st.ProbabilityTable(np.outer([0.2, 0.8], [0.5, 0.5]))
        assert abs(info.classical_J(t)) < 1e-12

    @settings(max_examples=200, deadline=None)
    @given(hst.integers(1, 5), hst.integers(1, 5), hst.integers(0, 2**32 - 1))
    def test_J_equals_mutual_information(self, da, db, seed):
        t = st.random_table((da, db), seed)
        i = info.classical_mutual_information(t)
        assert abs(info.classical_J(t, "A") - i) < 1e-12
        assert abs(info.classical_J(t, "B") - i) < 1e-12


class TestQuantumMutualInformation:
    def test_bell(self):
        assert abs(info.quantum_mutual_information(st.bell()) - 2) < 1e-12

    def test_product(self):
        s = st.product(la.random_density(2, seed=1), la.random_density(3, seed=2))
        assert abs(info.quantum_mutual_information(s)) < 1e-12

    def test_dephased_bell(self):
        s = st.cc(np.diag([0.5, 0.5]))
        assert abs(info.quantum_mutual_information(s) - 1) < 1e-12

    @pytest.mark.parametrize("seed", range(25))
    def test_subadditivity(self, seed):
        s = st.random_state((2, 3), seed=seed)
        assert info.quantum_mutual_information(s) >= -1e-9


class TestEntropyOfEntanglement:
    def test_bell(self):
        assert abs(info.entropy_of_entanglement(st.bell()) - 1) < 1e-12

    def test_product(self):
        psi = st.PureState((2, 2), [1, 0, 0, 0])
        assert info.entropy_of_entanglement(psi) == 0

    def test_partial(self):
        psi = st.PureState((2, 2), [np.sqrt(0.9), 0, 0, np.sqrt(0.1)])
        want = -0.9 * math.log2(0.9) - 0.1 * math.log2(0.1)
        assert abs(info.entropy_of_entanglement(psi) - want) < 1e-12
        assert abs(want - 0.468996) < 1e-6

    def test_mixed_rejected(self):
        with pytest.raises(PurityError):
            info.entropy_of_entanglement(st.werner(0.9))

    @pytest.mark.parametrize("seed", range(10))
    def test_marginals_agree(self, seed):
        psi = st.random_pure_state((2, 3), seed)
        s = psi.to_state()
        assert abs(info.von_neumann(s.rho_a) - info.von_neumann(s.rho_b)) < 1e-9
