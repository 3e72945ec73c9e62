"""Broadcasting loss and entanglement activation by pre-measurement.

The activation measures use negativity as the entanglement quantifier. The
broadcasting loss is evaluated over measure-and-prepare channels only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import linalg as la
from .discord import (
    MeasureReport,
    MeasurementBasis,
    _check_basis,
    _clip_measure,
    _two_sided_hints,
    basis_hints,
    gain_objective,
    measure_local,
    rotated,
)
from .errors import InvalidParameterError, InvalidShapeError
from .info import quantum_mutual_information
from .optimize import OptimizerConfig, optimize_over_bases
from .states import BipartiteState, make_state

# Largest fragment register built explicitly by broadcast_loss.
MAX_BROADCAST_DIM = 4096


def cnot_d(d: int) -> np.ndarray:
    """Permutation unitary ``|i>|j> -> |i>|i + j mod d>`` on ``C^d (x) C^d``."""
    if d < 2:
        raise InvalidParameterError(f"generalized CNOT needs d >= 2, got {d}")
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            c[i * d + (i + j) % d, i * d + j] = 1.0
    return c


def embed_operator(op: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Lift ``op`` acting on the factors ``targets`` (in that order) to the full space."""
    dims = [int(d) for d in dims]
    k = len(dims)
    targets = list(targets)
    dt = [dims[t] for t in targets]
    rest = [i for i in range(k) if i not in targets]
    opt = np.asarray(op, dtype=complex).reshape(dt + dt)
    eye = np.eye(int(np.prod([dims[i] for i in rest])) if rest else 1).reshape(
        [dims[i] for i in rest] * 2
    )
    out_idx = list(range(k))
    in_idx = [i + k for i in range(k)]
    op_idx = [out_idx[t] for t in targets] + [in_idx[t] for t in targets]
    eye_idx = [out_idx[i] for i in rest] + [in_idx[i] for i in rest]
    full = np.einsum(opt, op_idx, eye, eye_idx, out_idx + in_idx)
    n = int(np.prod(dims))
    return full.reshape(n, n)


def measurement_unitary(u: np.ndarray) -> np.ndarray:
    """``(U (x) I) CNOT (U^dag (x) I)``: copies basis label ``i`` onto a ``|0>`` ancilla."""
    d = u.shape[0]
    big = np.kron(u, np.eye(d))
    return big @ cnot_d(d) @ big.conj().T


@dataclass(frozen=True, eq=False)
class PremeasurementState:
    """System plus ancilla register(s) after the measurement interaction.

    ``dims`` is ``(dA, dB, dA')`` or, two-sided, ``(dA, dB, dA', dB')``.
    """

    dims: tuple[int, ...]
    state: np.ndarray = field(repr=False)
    bases: tuple[MeasurementBasis, ...]

    @property
    def two_sided(self) -> bool:
        return len(self.dims) == 4

    @property
    def cut(self) -> tuple[int, int]:
        """Dimensions of the system : ancilla bipartition."""
        d = self.dims
        if self.two_sided:
            return d[0] * d[1], d[2] * d[3]
        return d[0] * d[1], d[2]

    def system_state(self) -> np.ndarray:
        """State after reading out (tracing) the ancillas."""
        keep = [0, 1]
        return la.ptrace(self.state, self.dims, keep)


def premeasurement(state: BipartiteState, basis_a: MeasurementBasis, basis_b: MeasurementBasis | None = None) -> PremeasurementState:
    """Couple ``A`` (and optionally ``B``) to ancillas prepared in ``|0>``."""
    if basis_a.side != "A" or (basis_b is not None and basis_b.side != "B"):
        raise InvalidParameterError("premeasurement expects a basis on A and optionally one on B")
    _check_basis(state, basis_a)
    dA, dB = state.dims
    anc = [dA]
    if basis_b is not None:
        _check_basis(state, basis_b)
        anc.append(dB)
    dims = (dA, dB, *anc)
    zero = np.zeros((int(np.prod(anc)),) * 2, dtype=complex)
    zero[0, 0] = 1.0
    rho = np.kron(state.rho, zero)
    u = embed_operator(measurement_unitary(basis_a.unitary), dims, [0, 2])
    if basis_b is not None:
        u = embed_operator(measurement_unitary(basis_b.unitary), dims, [1, 3]) @ u
    out = u @ rho @ u.conj().T
    bases = (basis_a,) if basis_b is None else (basis_a, basis_b)
    return PremeasurementState(tuple(dims), out, bases)


def negativity(m, dims: Sequence[int] | None = None, on: str = "B") -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose.

    Equal to ``(||m^T_B||_1 - 1) / 2`` for unit-trace ``m``. ``dims`` may be
    omitted when ``m`` is a :class:`BipartiteState`.
    """
    if isinstance(m, BipartiteState):
        dims = m.dims if dims is None else dims
        m = m.rho
    if dims is None:
        raise InvalidShapeError("negativity of a bare matrix needs its factor dimensions")
    m = la.as_matrix(m)
    pt = la.partial_transpose(m, dims, on)
    w = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return max(0.0, float(-np.sum(w[w < 0])))


@lru_cache(maxsize=None)
def _upper(d: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(d, 1)


def _block_trace_norms(r: np.ndarray, d_out: int, d_in: int) -> np.ndarray:
    """``sum_{a<c} ||r_ac||_1`` over the ``d_in x d_in`` blocks of a stacked matrix."""
    n = r.shape[0]
    blocks = r.reshape(n, d_out, d_in, d_out, d_in).transpose(0, 1, 3, 2, 4)
    iu = _upper(d_out)
    off = blocks[:, iu[0], iu[1]]
    if d_in == 1:
        return np.abs(off[..., 0, 0]).sum(axis=-1)
    return np.linalg.svd(off, compute_uv=False).sum(axis=(-2, -1))


def activation_objective_one(state: BipartiteState):
    """Negativity across ``AB:A'`` of the pre-measurement state, for stacked bases on ``A``.

    In the measured basis the partial transpose on the ancilla pairs the
    ``(a, c)`` and ``(c, a)`` blocks of ``rho``, so the negativity is the sum
    of the trace norms of the off-diagonal ``A`` blocks.
    """
    dA, dB = state.dims
    return lambda u: _block_trace_norms(rotated(state, u), dA, dB)


def activation_objective_two(state: BipartiteState):
    """Two-sided analogue: sum of ``|<w_m|rho|w_n>|`` over ``m < n`` in the product basis."""
    return lambda u, v: _block_trace_norms(rotated(state, u, v), state.dim, 1)


def activation_measure(
    state: BipartiteState,
    sides: str = "one",
    side: str = "A",
    config: OptimizerConfig | None = None,
) -> MeasureReport:
    """Minimal negativity generated by pre-measuring one side (``sides="one"``) or both.

    ``side`` picks the measured party for the one-sided measure. The reported
    value is recomputed from the explicitly constructed pre-measurement state
    at the optimal basis.
    """
    config = config or OptimizerConfig()
    sides = str(sides).lower()
    if sides in ("two", "both", "ab"):
        res = optimize_over_bases(
            activation_objective_two(state), state.dims, config, hints=_two_sided_hints(state, config.seed), bound=0.0
        )
        ba, bb = MeasurementBasis("A", res.unitaries[0]), MeasurementBasis("B", res.unitaries[1])
        pm = premeasurement(state, ba, bb)
        value = negativity(pm.state, pm.cut)
        return MeasureReport("activation", _clip_measure(value), "AB", (ba, bb), res, {"objective": res.value})
    if sides != "one":
        raise InvalidParameterError(f"sides must be 'one' or 'two', got {sides!r}")
    side = la.check_side(side)
    view = state.side_view(side)
    hints = [(h,) for h in basis_hints(view, config.seed)]
    res = optimize_over_bases(activation_objective_one(view), view.dims[0], config, hints=hints, bound=0.0)
    pm = premeasurement(view, MeasurementBasis("A", res.unitaries[0]))
    value = negativity(pm.state, pm.cut)
    return MeasureReport(
        "activation",
        _clip_measure(value),
        side,
        (MeasurementBasis(side, res.unitaries[0]),),
        res,
        {"objective": res.value},
    )


# -- broadcasting -------------------------------------------------------------


@dataclass(frozen=True)
class BroadcastChannel:
    """Measure ``A`` in ``basis`` and hand every one of ``fragments`` registers the outcome."""

    basis: MeasurementBasis
    fragments: int = 1

    def __post_init__(self):
        if int(self.fragments) < 1:
            raise InvalidParameterError(f"need at least one fragment, got {self.fragments}")
        if self.basis.side != "A":
            raise InvalidParameterError("broadcast channels act on subsystem A")


def broadcast_output(state: BipartiteState, ch: BroadcastChannel) -> np.ndarray:
    """Full output ``sum_i p_i |i..i><i..i| (x) rho_B|i`` on ``A_1 ... A_N B``."""
    dA, dB = state.dims
    meas = measure_local(state, ch.basis)
    n = ch.fragments
    out = np.zeros((dA**n * dB,) * 2, dtype=complex)
    for i, (p, cond) in enumerate(zip(meas.probabilities, meas.conditional_states)):
        if cond is None:
            continue
        idx = sum(i * dA**k for k in range(n))
        out[idx * dB:(idx + 1) * dB, idx * dB:(idx + 1) * dB] += p * cond
    return out


def broadcast_loss(state: BipartiteState, ch: BroadcastChannel) -> tuple[list[float], float]:
    """Per-fragment mutual-information losses ``I(rho) - I(rho_{A_k B})`` and their mean."""
    _check_basis(state, ch.basis)
    dA, dB = state.dims
    n = ch.fragments
    total = quantum_mutual_information(state)
    if dA**n * dB <= MAX_BROADCAST_DIM:
        full = broadcast_output(state, ch)
        dims = [dA] * n + [dB]
        reduced = [la.ptrace(full, dims, [k, n]) for k in range(n)]
    else:
        # fragments are exchangeable, so every marginal equals the single-copy state
        p = measure_local(state, ch.basis)
        single = sum(
            pi * np.kron(np.diag(np.eye(dA)[i]).astype(complex), c)
            for i, (pi, c) in enumerate(zip(p.probabilities, p.conditional_states))
            if c is not None
        )
        reduced = [single] * n
    losses = [total - quantum_mutual_information(make_state((dA, dB), r)) for r in reduced]
    return losses, float(np.mean(losses))


def broadcast_optimal_loss(
    state: BipartiteState, fragments: int = 1, side: str = "A", config: OptimizerConfig | None = None
) -> MeasureReport:
    """Smallest average broadcasting loss over the measure-and-prepare family."""
    if int(fragments) < 1:
        raise InvalidParameterError(f"need at least one fragment, got {fragments}")
    side = la.check_side(side)
    view = state.side_view(side)
    config = config or OptimizerConfig()
    total = quantum_mutual_information(view)
    gain = gain_objective(view)
    res = optimize_over_bases(
        lambda u: total - gain(u),
        view.dims[0],
        config,
        hints=[(h,) for h in basis_hints(view, config.seed)],
        bound=0.0,
    )
    ch = BroadcastChannel(MeasurementBasis("A", res.unitaries[0]), int(fragments))
    losses, avg = broadcast_loss(view, ch)
    return MeasureReport(
        "broadcast_loss",
        _clip_measure(avg),
        side,
        (MeasurementBasis(side, res.unitaries[0]),),
        res,
        {"fragments": int(fragments), "fragment_losses": losses, "objective": res.value},
    )
