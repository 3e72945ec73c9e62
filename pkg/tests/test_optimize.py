import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcorr import linalg as la
from qcorr import states as st
from qcorr.discord import gain_objective
from qcorr.optimize import (
    OptimizerConfig,
    bloch_angles,
    bloch_unitary,
    grid_angles,
    optimize_over_bases,
)

from oracles import bloch_grid, grid_gain

DEPHASED_BELL = st.cc(np.diag([0.5, 0.5]))


def bloch_vector(u):
    v = u[:, 0]
    p = np.outer(v, v.conj())
    return np.real([p[0, 1] + p[1, 0], 1j * (p[0, 1] - p[1, 0]), p[0, 0] - p[1, 1]])


class TestChart:
    def test_bloch_unitary_is_unitary(self):
        t, p = grid_angles(7, 9)
        us = bloch_unitary(t, p)
        eye = np.einsum("nji,njk->nik", us.conj(), us)
        assert np.max(np.abs(eye - np.eye(2))) < 1e-14

    def test_scalar_matches_batched(self):
        assert_allclose(bloch_unitary(0.7, 2.1), bloch_unitary(np.array([0.7]), np.array([2.1]))[0], atol=1e-15)

    def test_north_pole(self):
        assert_allclose(bloch_unitary(0.0, 1.3), np.eye(2), atol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_angles_round_trip(self, seed):
        u = la.haar_unitary(2, seed)
        v = bloch_unitary(*bloch_angles(u))
        # same first basis vector up to phase
        assert abs(abs(np.vdot(u[:, 0], v[:, 0])) - 1) < 1e-12

    def test_grid_is_cell_centred(self):
        t, p = grid_angles(4, 8)
        assert t.size == p.size == 32
        assert_allclose(np.unique(t), (np.arange(4) + 0.5) * np.pi / 4)


class TestOptimizeOverBases:
    def test_constant_objective(self):
        res = optimize_over_bases(lambda u: np.full(u.shape[0], 0.25), 2, OptimizerConfig(starts=4))
        assert res.value == 0.25
        assert res.spread == 0.0

    def test_constant_joint_objective(self):
        res = optimize_over_bases(lambda u, v: np.full(u.shape[0], -1.5), (2, 3), OptimizerConfig(starts=3))
        assert res.value == -1.5 and res.spread == 0.0
        assert [u.shape for u in res.unitaries] == [(2, 2), (3, 3)]

    def test_dephased_bell_optimum_is_computational(self):
        # no hints: the grid and Haar starts have to find the poles themselves
        res = optimize_over_bases(gain_objective(DEPHASED_BELL), 2, maximize=True)
        n = bloch_vector(res.unitaries[0])
        angle = np.arccos(min(abs(n[2]), 1.0))
        assert angle < 1e-3
        assert abs(res.value - 1) < 1e-8

    def test_dephased_bell_dense_grid_agrees(self):
        vals = grid_gain(DEPHASED_BELL.rho, 200, 400)
        n = bloch_grid(200, 400)[np.argmax(vals)]
        assert abs(abs(n[2]) - 1) < 1e-12
        assert abs(vals.max() - 1) < 1e-12

    def test_phase_gauge(self):
        s = st.random_state((2, 2), seed=4)
        f = gain_objective(s)
        u = la.haar_unitary(2, 1)
        phases = np.diag(np.exp(1j * np.array([0.3, -2.0])))
        assert abs(f(u[None])[0] - f((u @ phases)[None])[0]) < 1e-14
        cfg = OptimizerConfig(starts=0, grid_refine=0)
        a = optimize_over_bases(f, 2, cfg, maximize=True, hints=[(u,)])
        b = optimize_over_bases(f, 2, cfg, maximize=True, hints=[(u @ phases,)])
        assert abs(a.value - b.value) < 1e-12

    def test_qutrit_chart(self):
        res = optimize_over_bases(lambda u: -np.abs(u[:, 0, 0]) ** 2, 3, OptimizerConfig(starts=3))
        assert abs(res.value + 1) < 1e-8
        assert la.is_unitary(res.unitaries[0])

    def test_maximize_sign(self):
        f = lambda u: np.abs(u[:, 0, 0]) ** 2
        lo = optimize_over_bases(f, 2, OptimizerConfig(starts=2))
        hi = optimize_over_bases(f, 2, OptimizerConfig(starts=2), maximize=True)
        assert abs(lo.value) < 1e-8 and abs(hi.value - 1) < 1e-8
        assert all(v <= hi.value for v in hi.start_values)

    def test_diagnostics(self):
        res = optimize_over_bases(gain_objective(st.random_state(seed=2)), 2, OptimizerConfig(starts=5))
        assert res.starts == 5 + 4
        assert res.evaluations > 60 * 120
        assert res.spread >= 0
        assert len(res.start_values) == res.starts

    def test_deterministic(self):
        f = gain_objective(st.random_state(seed=5))
        a = optimize_over_bases(f, 2, OptimizerConfig(seed=3), maximize=True)
        b = optimize_over_bases(f, 2, OptimizerConfig(seed=3), maximize=True)
        assert a.value == b.value
        assert np.array_equal(a.unitaries[0], b.unitaries[0])

    def test_threads_match_serial(self):
        f = gain_objective(st.random_state((2, 3), seed=6))
        serial = optimize_over_bases(f, 2, OptimizerConfig(threads=1), maximize=True)
        pooled = optimize_over_bases(f, 2, OptimizerConfig(threads=4), maximize=True)
        assert serial.value == pooled.value
        assert serial.start_values == pooled.start_values

    def test_thread_env(self, monkeypatch):
        f = gain_objective(st.random_state(seed=8))
        serial = optimize_over_bases(f, 2, OptimizerConfig(starts=4), maximize=True)
        monkeypatch.setenv("QCORR_THREADS", "3")
        pooled = optimize_over_bases(f, 2, OptimizerConfig(starts=4), maximize=True)
        assert serial.value == pooled.value

    def test_start_seeds_differ(self):
        f = gain_objective(st.random_state(seed=9))
        a = optimize_over_bases(f, 2, OptimizerConfig(starts=3, seed=0, grid_refine=0))
        b = optimize_over_bases(f, 2, OptimizerConfig(starts=3, seed=1, grid_refine=0))
        assert a.start_values != b.start_values


class TestBound:
    CQ = st.random_cq((2, 2), seed=3)

    def test_stops_at_bound(self):
        f = gain_objective(self.CQ)
        total = float(f(np.eye(2, dtype=complex)[None])[0])
        res = optimize_over_bases(f, 2, maximize=True, hints=[(np.eye(2),)], bound=total + 1e-13)
        assert res.starts == 1 and res.spread == 0.0

    def test_unreached_bound_runs_every_start(self):
        f = gain_objective(st.random_state(seed=5))
        free = optimize_over_bases(f, 2, OptimizerConfig(starts=3), maximize=True)
        bounded = optimize_over_bases(f, 2, OptimizerConfig(starts=3), maximize=True, bound=10.0)
        assert free.value == bounded.value and free.starts == bounded.starts

    @pytest.mark.parametrize("n_hints", [1, 3, 6])
    def test_threads_truncate_to_serial_prefix(self, n_hints):
        # with refinement capped, only the exact last hint reaches the bound
        target = la.haar_unitary(2, 9)[:, 0]
        f = lambda u: 1 - np.abs(u[:, :, 0].conj() @ target) ** 2
        hints = [(la.haar_unitary(2, 100 + k),) for k in range(n_hints - 1)] + [(la.haar_unitary(2, 9),)]
        cfg = OptimizerConfig(max_evals=1, max_restarts=0)
        serial = optimize_over_bases(f, 2, cfg.with_(threads=1), hints=hints, bound=0.0)
        pooled = optimize_over_bases(f, 2, cfg.with_(threads=4), hints=hints, bound=0.0)
        assert serial.starts == n_hints
        assert serial.starts == pooled.starts
        assert serial.evaluations == pooled.evaluations
        assert serial.start_values == pooled.start_values
