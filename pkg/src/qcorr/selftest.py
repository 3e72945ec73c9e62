"""Built-in invariant suite behind ``qcorr selftest``.

A reduced-size version of the test-suite properties, runnable from an
installed package without pytest.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import discord as dc
from . import info, linalg as la, metrology as mt, operational as op, states as st


def _bell_anchors(seed, n):
    b = st.bell()
    got = {
        "I": info.quantum_mutual_information(b),
        "E_S": info.entropy_of_entanglement(b),
        "Q_A": dc.quantum_discord(b, "A").value,
        "Q_B": dc.quantum_discord(b, "B").value,
        "J_A": dc.classical_correlations(b, "A").value,
        "REQ": dc.relative_entropy_of_discord(b, "A").value,
        "IP": mt.interferometric_power(b, "A", [1, -1]).value,
        "N": op.negativity(b.rho, b.dims),
        "Q_N": op.activation_measure(b).value,
    }
    want = {"I": 2, "E_S": 1, "Q_A": 1, "Q_B": 1, "J_A": 1, "REQ": 1, "IP": 1, "N": 0.5, "Q_N": 0.5}
    err = max(abs(got[k] - want[k]) for k in want)
    return err < 2e-4, f"max deviation {err:.2e}"


def _classical_points(seed, n):
    worst = 0.0
    for k in range(n):
        for make, flavor, side in ((st.random_cq, "cq", "A"), (st.random_qc, "qc", "B"), (st.random_cc, "cc", "A")):
            s = make((2, 2), seed + k)
            vals = [
                dc.quantum_discord(s, side).value,
                dc.relative_entropy_of_discord(s, side).value,
                mt.interferometric_power(s, side).value,
                op.activation_measure(s, "one", side).value,
                dc.detect_classical(s, flavor).distance,
            ]
            worst = max(worst, *vals)
    return worst < 1e-6, f"largest value {worst:.2e}"


def _mutual_j(seed, n):
    rng = np.random.default_rng(seed)
    err = 0.0
    for _ in range(n):
        t = st.random_table(tuple(rng.integers(1, 6, size=2)), rng)
        i = info.classical_mutual_information(t)
        err = max(err, abs(info.classical_J(t, "A") - i), abs(info.classical_J(t, "B") - i))
    return err < 1e-12, f"max deviation {err:.2e}"


def _decomposition(seed, n):
    err = 0.0
    for k in range(n):
        s = st.random_state((2, 2), seed=seed + k)
        q = dc.quantum_discord(s)
        err = max(err, abs(q.value + q.extras["classical_correlations"] - info.quantum_mutual_information(s)))
    return err < 2e-4, f"max deviation {err:.2e}"


def _broadcast(seed, n):
    err = 0.0
    for k in range(n):
        s = st.random_state((2, 2), seed=seed + k)
        q = dc.quantum_discord(s).value
        for frag in (1, 2, 5):
            err = max(err, abs(op.broadcast_optimal_loss(s, frag).value - q))
    return err < 2e-4, f"max deviation {err:.2e}"


def _ip_closed_form(seed, n):
    err = 0.0
    for k in range(n):
        s = st.random_state((2, 2), seed=seed + k)
        err = max(err, abs(mt.interferometric_power_qubit(s).value - mt.interferometric_power(s, "A", [1, -1]).value))
    return err < 1e-4, f"max deviation {err:.2e}"


def _qfi_variance(seed, n):
    err = 0.0
    for k in range(n):
        psi = la.random_pure(4, seed + k)
        g = la.ginibre(4, 4, seed + 1000 + k)
        h = g + g.conj().T
        mean = np.vdot(psi, h @ psi).real
        var = np.vdot(psi, h @ h @ psi).real - mean**2
        err = max(err, abs(mt.qfi(np.outer(psi, psi.conj()), h) - 4 * var))
    return err < 1e-8, f"max deviation {err:.2e}"


def _hierarchy(seed, n):
    worst = 0.0
    for k in range(n):
        s = st.random_state((2, 2), seed=seed + k)
        q2 = op.activation_measure(s, "two").value
        q1 = op.activation_measure(s, "one").value
        neg = op.negativity(s.rho, s.dims)
        worst = max(worst, q1 - q2, neg - q1)
    return worst < 2e-3, f"largest violation {worst:.2e}"


def _local_unitary(seed, n):
    err = 0.0
    for k in range(n):
        s = st.random_state((2, 2), seed=seed + k)
        t = st.apply_local_unitary(s, la.haar_unitary(2, seed + 100 + k), la.haar_unitary(2, seed + 200 + k))
        err = max(err, abs(dc.quantum_discord(s).value - dc.quantum_discord(t).value))
    return err < 2e-4, f"max deviation {err:.2e}"


CHECKS: dict[str, tuple[Callable, int, int]] = {
    # name: (check, quick corpus size, full corpus size)
    "bell_anchors": (_bell_anchors, 1, 1),
    "classical_fixed_points": (_classical_points, 2, 10),
    "mutual_information_identity": (_mutual_j, 50, 200),
    "discord_decomposition": (_decomposition, 3, 20),
    "broadcast_equals_discord": (_broadcast, 2, 5),
    "ip_closed_form": (_ip_closed_form, 3, 10),
    "qfi_pure_variance": (_qfi_variance, 10, 30),
    "activation_hierarchy": (_hierarchy, 2, 5),
    "local_unitary_invariance": (_local_unitary, 2, 5),
}


def run_selftest(seed: int = 0, quick: bool = False) -> tuple[bool, dict]:
    results = []
    for name, (check, n_quick, n_full) in CHECKS.items():
        try:
            passed, detail = check(seed, n_quick if quick else n_full)
        except Exception as exc:  # report, don't crash: the suite's job is to summarise
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append({"name": name, "passed": bool(passed), "detail": detail})
    ok = all(r["passed"] for r in results)
    return ok, {"command": "selftest", "seed": seed, "passed": ok, "checks": results}
