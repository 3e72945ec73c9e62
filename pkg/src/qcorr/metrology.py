"""Quantum Fisher information and interferometric power."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from .discord import MeasureReport, MeasurementBasis, _clip_measure, basis_hints
from .errors import InvalidParameterError, InvalidShapeError
from .optimize import OptimizerConfig, bloch_unitary, optimize_over_bases
from .states import BipartiteState

QFI_CUTOFF = 1e-12

PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class LocalObservable:
    """``K = U diag(spectrum) U^dag`` acting on one subsystem."""

    side: str
    spectrum: tuple[float, ...]
    unitary: np.ndarray = field(repr=False)

    def __post_init__(self):
        spec = check_spectrum(self.spectrum, np.asarray(self.unitary).shape[0])
        object.__setattr__(self, "side", la.check_side(self.side))
        object.__setattr__(self, "spectrum", spec)

    @property
    def operator(self) -> np.ndarray:
        u = np.asarray(self.unitary, dtype=complex)
        return (u * np.array(self.spectrum)) @ u.conj().T


def check_spectrum(spectrum: Sequence[float], d: int) -> tuple[float, ...]:
    spec = tuple(float(k) for k in spectrum)
    if len(spec) != d:
        raise InvalidParameterError(f"spectrum has {len(spec)} entries, subsystem has dimension {d}")
    if len(spec) > 1 and np.min(np.diff(np.sort(spec))) <= 1e-12:
        raise InvalidParameterError(f"spectrum {spec} is degenerate")
    return spec


def default_spectrum(d: int) -> tuple[float, ...]:
    return tuple(float(k) for k in range(d))


def _qfi_weights(w: np.ndarray) -> np.ndarray:
    s = w[:, None] + w[None, :]
    diff2 = (w[:, None] - w[None, :]) ** 2
    return np.where(s > QFI_CUTOFF, diff2 / np.where(s > QFI_CUTOFF, s, 1.0), 0.0)


def qfi(rho, k) -> float:
    """Quantum Fisher information of ``rho`` for unitary phase imprinting by ``k``.

    ``F = 2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<i|K|j>|^2``, terms with
    ``l_i + l_j <= 1e-12`` dropped.
    """
    rho = la.as_matrix(rho.rho if isinstance(rho, BipartiteState) else rho)
    k = la.as_matrix(k)
    if rho.shape != k.shape:
        raise InvalidShapeError(f"state {rho.shape} and generator {k.shape} differ in shape")
    w, v = np.linalg.eigh(rho)
    kk = v.conj().T @ k @ v
    return max(0.0, float(2 * np.sum(_qfi_weights(w) * np.abs(kk) ** 2)))


def _ip_objective(state: BipartiteState, spectrum: tuple[float, ...]):
    dA, dB = state.dims
    w, v = np.linalg.eigh(state.rho)
    weights = _qfi_weights(w)
    vb = v.reshape(dA, dB, -1)
    gamma = np.array(spectrum)

    def objective(u):
        kop = (u * gamma[None, None, :]) @ la.dagger(u)
        # <psi_i| K (x) I |psi_j> without forming the Kronecker product
        y = np.einsum("nac,cbj->nabj", kop, vb)
        kk = np.einsum("abi,nabj->nij", vb.conj(), y)
        return 0.5 * np.sum(weights * np.abs(kk) ** 2, axis=(-2, -1))

    return objective


def interferometric_power(
    state: BipartiteState,
    side: str = "A",
    spectrum: Sequence[float] | None = None,
    config: OptimizerConfig | None = None,
) -> MeasureReport:
    """Worst-case ``F / 4`` over local generators with the fixed spectrum.

    The default spectrum is ``(0, 1, ..., d - 1)`` for the measured side.
    """
    side = la.check_side(side)
    view = state.side_view(side)
    d = view.dims[0]
    spec = check_spectrum(default_spectrum(d) if spectrum is None else spectrum, d)
    config = config or OptimizerConfig()
    hints = [(h,) for h in basis_hints(view, config.seed)]
    res = optimize_over_bases(_ip_objective(view, spec), d, config, hints=hints, bound=0.0)
    return MeasureReport(
        "interferometric_power",
        _clip_measure(res.value),
        side,
        (MeasurementBasis(side, res.unitaries[0]),),
        res,
        {"spectrum": list(spec)},
    )


def qubit_fisher_matrix(state: BipartiteState) -> np.ndarray:
    """Real symmetric 3x3 matrix ``M`` with ``F(n . sigma (x) I) = 4 n^T M n``."""
    dA, dB = state.dims
    w, v = np.linalg.eigh(state.rho)
    weights = _qfi_weights(w)
    s = np.array([v.conj().T @ np.kron(p, np.eye(dB)) @ v for p in PAULIS])
    m = 0.5 * np.einsum("il,ail,bil->ab", weights, s, s.conj())
    return m


def interferometric_power_qubit(state: BipartiteState, side: str = "A") -> MeasureReport:
    """Closed form for a qubit probe with spectrum ``{+1, -1}``: smallest eigenvalue of ``M``."""
    side = la.check_side(side)
    view = state.side_view(side)
    if view.dims[0] != 2:
        raise InvalidParameterError(f"closed form needs a qubit on side {side}, got dimension {view.dims[0]}")
    m = qubit_fisher_matrix(view)
    evals, evecs = np.linalg.eigh(0.5 * (m + m.T).real)
    n = evecs[:, 0]
    theta = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
    phi = float(np.arctan2(n[1], n[0]))
    basis = MeasurementBasis(side, bloch_unitary(theta, phi))
    return MeasureReport(
        "interferometric_power",
        _clip_measure(float(evals[0])),
        side,
        (basis,),
        None,
        {"spectrum": [1.0, -1.0], "fisher_matrix": m.real.tolist()},
    )
