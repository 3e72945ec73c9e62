"""Local projective measurements and the discord-type measures built on them.

Every measure is evaluated with the measured subsystem on the left; measures
``from B`` swap the factors first. The heavy lifting is done by stacked
("batched") objective functions so the qubit seeding grid costs one
vectorised call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from . import linalg as la
from .linalg import dagger
from .errors import InvalidParameterError, InvalidShapeError
from .info import entropy_terms, quantum_mutual_information, von_neumann
from .optimize import OptimizerConfig, OptimizerResult, optimize_over_bases
from .states import BipartiteState, make_state

ZERO_TOL = 1e-6
PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Rank-one projective measurement on one side, given by a unitary's columns."""

    side: str
    unitary: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.array(self.unitary, dtype=complex)
        if u.ndim != 2 or not la.is_unitary(u, 1e-10):
            raise InvalidParameterError("measurement basis must be given by a unitary matrix")
        u.setflags(write=False)
        object.__setattr__(self, "side", la.check_side(self.side))
        object.__setattr__(self, "unitary", u)

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    @property
    def projectors(self) -> list[np.ndarray]:
        u = self.unitary
        return [np.outer(u[:, i], u[:, i].conj()) for i in range(self.dim)]

    @classmethod
    def computational(cls, side: str, d: int) -> "MeasurementBasis":
        return cls(side, np.eye(d, dtype=complex))


@dataclass(eq=False)
class MeasureReport:
    """Value of a correlation measure plus how the optimiser got there."""

    measure: str
    value: float
    side: str | None = None
    bases: tuple[MeasurementBasis, ...] = ()
    optimizer: OptimizerResult | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def basis(self) -> MeasurementBasis | None:
        return self.bases[0] if self.bases else None

    def diagnostics(self) -> dict[str, Any]:
        if self.optimizer is None:
            return {"starts": 0, "evaluations": 0, "spread": 0.0}
        o = self.optimizer
        return {"starts": o.starts, "evaluations": o.evaluations, "spread": o.spread}


def _clip_measure(x: float) -> float:
    return 0.0 if -ZERO_TOL <= x <= 0.0 else float(x)


def _check_basis(state: BipartiteState, basis: MeasurementBasis) -> None:
    d = state.dims[0] if basis.side == "A" else state.dims[1]
    if basis.dim != d:
        raise InvalidShapeError(f"basis of dimension {basis.dim} on side {basis.side}, state has {d}")


# -- batched kernels (measured side on the left) -----------------------------


def _blocks(state: BipartiteState) -> np.ndarray:
    dA, dB = state.dims
    return state.rho.reshape(dA, dB, dA, dB)


def conditional_operators(state: BipartiteState, u: np.ndarray) -> np.ndarray:
    """Unnormalised conditional states ``Tr_A[(|u_i><u_i| (x) I) rho]``.

    ``u`` holds basis unitaries with shape ``(n, dA, dA)``; the result has
    shape ``(n, dA, dB, dB)``.
    """
    y = np.einsum("abcd,nci->nabdi", _blocks(state), u)
    return np.einsum("nai,nabdi->nibd", u.conj(), y)


def rotated(state: BipartiteState, u: np.ndarray, ub: np.ndarray | None = None) -> np.ndarray:
    """``(U (x) V)^dag rho (U (x) V)`` for stacks of local unitaries."""
    dA, dB = state.dims
    n = u.shape[0]
    if ub is None:
        ub = np.broadcast_to(np.eye(dB, dtype=complex), (n, dB, dB))
    w = _kron_stack(u, ub)
    return dagger(w) @ state.rho @ w


def gain_objective(state: BipartiteState):
    """Stacked ``J_Pi`` for measurements on the left factor of ``state``."""
    s_b = von_neumann(state.rho_b)

    def objective(u: np.ndarray) -> np.ndarray:
        sig = conditional_operators(state, u)
        p = np.real(np.trace(sig, axis1=-2, axis2=-1))
        h_cond = entropy_terms(np.linalg.eigvalsh(sig)).sum(axis=-1)
        return s_b + entropy_terms(p) - h_cond

    return objective


def steering_hint(state: BipartiteState, seed: int = 0) -> np.ndarray:
    """Eigenbasis of ``Tr_B[(I (x) X) rho]`` for a fixed random Hermitian ``X``.

    For a classical-quantum state this operator is diagonal in the classical
    basis with generically distinct eigenvalues, so it recovers the basis even
    when the marginal is degenerate.
    """
    dA, dB = state.dims
    g = la.ginibre(dB, dB, np.random.default_rng([seed, 7919]))
    x = g + g.conj().T
    op = np.einsum("abcd,db->ac", _blocks(state), x)
    return np.linalg.eigh(0.5 * (op + op.conj().T))[1]


def basis_hints(state: BipartiteState, seed: int = 0) -> list[np.ndarray]:
    """Deterministic candidate bases on the left factor."""
    return [np.linalg.eigh(state.rho_a)[1], steering_hint(state, seed)]


# -- public operations --------------------------------------------------------


class LocalMeasurement(NamedTuple):
    probabilities: np.ndarray
    conditional_states: list[np.ndarray | None]
    post_state: BipartiteState


def measure_local(state: BipartiteState, basis: MeasurementBasis) -> LocalMeasurement:
    """Outcome probabilities, normalised conditional states and ``Pi[rho]``.

    Conditional states are ``None`` for outcomes with probability <= 1e-12.
    """
    _check_basis(state, basis)
    view = state.side_view(basis.side)
    u = basis.unitary
    sig = conditional_operators(view, u[None])[0]
    p = np.real(np.trace(sig, axis1=-2, axis2=-1))
    conds = [sig[i] / p[i] if p[i] > PROB_TOL else None for i in range(len(p))]
    post = sum(np.kron(np.outer(u[:, i], u[:, i].conj()), sig[i]) for i in range(len(p)))
    post_state = make_state(view.dims, post)
    if basis.side == "B":
        post_state = post_state.swapped()
    return LocalMeasurement(p / p.sum(), conds, post_state)


def conditional_gain(state: BipartiteState, basis: MeasurementBasis) -> float:
    """``J_Pi = S(rho_B) - sum_i p_i S(rho_B|i)`` for a measurement on ``basis.side``."""
    _check_basis(state, basis)
    view = state.side_view(basis.side)
    return max(0.0, float(gain_objective(view)(basis.unitary[None])[0]))


def _optimize_side(state, side, objective, config, maximize, bound=None):
    view = state.side_view(side)
    config = config or OptimizerConfig()
    hints = [(h,) for h in basis_hints(view, config.seed)]
    return view, optimize_over_bases(
        objective(view), view.dims[0], config, maximize=maximize, hints=hints, bound=bound
    )


def classical_correlations(state: BipartiteState, side: str = "A", config: OptimizerConfig | None = None) -> MeasureReport:
    """Maximal ``J_Pi`` over rank-one projective measurements on ``side``."""
    side = la.check_side(side)
    total = quantum_mutual_information(state)
    # J_Pi = I(Pi[rho]) <= I(rho): local measurement cannot add correlations
    _, res = _optimize_side(state, side, gain_objective, config, maximize=True, bound=total)
    value = min(max(0.0, res.value), total)
    return MeasureReport(
        "classical_correlations",
        value,
        side,
        (MeasurementBasis(side, res.unitaries[0]),),
        res,
        {"mutual_information": total},
    )


def quantum_discord(state: BipartiteState, side: str = "A", config: OptimizerConfig | None = None) -> MeasureReport:
    """``I(rho) - max_Pi J_Pi`` with the measurement on ``side``."""
    j = classical_correlations(state, side, config)
    total = j.extras["mutual_information"]
    return MeasureReport(
        "discord",
        _clip_measure(total - j.value),
        j.side,
        j.bases,
        j.optimizer,
        {"mutual_information": total, "classical_correlations": j.value},
    )


def _kron_stack(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    n, a, _ = u.shape
    b = v.shape[1]
    return np.einsum("nij,nkl->nikjl", u, v).reshape(n, a * b, a * b)


def _dephased_entropy_one(state: BipartiteState):
    s_rho = von_neumann(state.rho)

    def objective(u):
        sig = conditional_operators(state, u)
        return entropy_terms(np.linalg.eigvalsh(sig)).sum(axis=-1) - s_rho

    return objective


def _dephased_entropy_two(state: BipartiteState):
    s_rho = von_neumann(state.rho)

    def objective(u, v):
        w = _kron_stack(u, v)
        p = np.real(np.einsum("nxm,nxm->nm", w.conj(), state.rho @ w))
        return entropy_terms(p) - s_rho

    return objective


def _two_sided_hints(state: BipartiteState, seed: int):
    ha = basis_hints(state, seed)
    hb = basis_hints(state.swapped(), seed)
    return [(a, b) for a in ha for b in hb]


def relative_entropy_of_discord(state: BipartiteState, sides: str = "A", config: OptimizerConfig | None = None) -> MeasureReport:
    """Relative-entropy distance to the classical-quantum (or classical-classical) set.

    Evaluated as ``min_basis S(Pi[rho]) - S(rho)``; ``sides`` is ``"A"``,
    ``"B"`` or ``"both"`` (two-sided dephasing, distance to the cc set).
    """
    config = config or OptimizerConfig()
    if str(sides).lower() in ("both", "two", "ab"):
        res = optimize_over_bases(
            _dephased_entropy_two(state), state.dims, config, hints=_two_sided_hints(state, config.seed), bound=0.0
        )
        bases = (MeasurementBasis("A", res.unitaries[0]), MeasurementBasis("B", res.unitaries[1]))
        return MeasureReport("rel_entropy_discord", _clip_measure(res.value), "AB", bases, res)
    side = la.check_side(sides)
    _, res = _optimize_side(state, side, _dephased_entropy_one, config, maximize=False, bound=0.0)
    return MeasureReport(
        "rel_entropy_discord", _clip_measure(res.value), side, (MeasurementBasis(side, res.unitaries[0]),), res
    )


def dephase(state: BipartiteState, basis_a=None, basis_b=None) -> BipartiteState:
    """Apply local complete dephasing in the given basis (or bases)."""
    out = state
    if basis_a is not None:
        out = measure_local(out, basis_a).post_state
    if basis_b is not None:
        out = measure_local(out, basis_b).post_state
    return out


def _offdiag_one(state: BipartiteState):
    dA, dB = state.dims
    mask = ~np.kron(np.eye(dA, dtype=bool), np.ones((dB, dB), dtype=bool))

    def objective(u):
        r = rotated(state, u)
        return np.sqrt(np.sum(np.abs(r[:, mask]) ** 2, axis=-1))

    return objective


def _offdiag_two(state: BipartiteState):
    mask = ~np.eye(state.dim, dtype=bool)

    def objective(u, v):
        r = rotated(state, u, v)
        return np.sqrt(np.sum(np.abs(r[:, mask]) ** 2, axis=-1))

    return objective


class ClassicalityVerdict(NamedTuple):
    is_classical: bool
    distance: float
    witness: tuple[MeasurementBasis, ...]


def detect_classical(state: BipartiteState, flavor: str = "cq", tol: float = 1e-8, config: OptimizerConfig | None = None) -> ClassicalityVerdict:
    """Decide membership in the cq / qc / cc set by invariance under local dephasing.

    Minimises the Frobenius distance ``||rho - Pi[rho]||`` over bases and
    reports the minimising basis as the witness.
    """
    config = config or OptimizerConfig()
    flavor = flavor.lower()
    if flavor == "cc":
        res = optimize_over_bases(
            _offdiag_two(state), state.dims, config, hints=_two_sided_hints(state, config.seed), bound=0.0
        )
        witness = (MeasurementBasis("A", res.unitaries[0]), MeasurementBasis("B", res.unitaries[1]))
    elif flavor in ("cq", "qc"):
        side = "A" if flavor == "cq" else "B"
        _, res = _optimize_side(state, side, _offdiag_one, config, maximize=False, bound=0.0)
        witness = (MeasurementBasis(side, res.unitaries[0]),)
    else:
        raise InvalidParameterError(f"flavor must be 'cq', 'qc' or 'cc', got {flavor!r}")
    distance = max(0.0, res.value)
    return ClassicalityVerdict(bool(distance < tol), distance, witness)
