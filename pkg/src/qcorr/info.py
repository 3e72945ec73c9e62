"""Entropic functionals, all in bits (base-2 logarithms)."""

from __future__ import annotations

import numpy as np

from . import linalg as la
from .errors import InvalidParameterError, InvalidShapeError, NumericalError, PurityError
from .states import BipartiteState, ProbabilityTable, PureState, make_state

ZERO_EIG = 1e-12
CLIP = 1e-12
SUPPORT_TOL = 1e-12


def _clip(x: float) -> float:
    return 0.0 if -CLIP <= x <= 0.0 else float(x)


def entropy_terms(w: np.ndarray) -> np.ndarray:
    """``-sum w log2 w`` over the last axis; entries below 1e-12 count as zero.

    Works on unnormalised spectra as well, which the measurement code relies on.
    """
    w = np.asarray(w, dtype=float)
    safe = np.where(w > ZERO_EIG, w, 1.0)
    return -np.sum(np.where(w > ZERO_EIG, w * np.log2(safe), 0.0), axis=-1)


def _as_density(rho) -> np.ndarray:
    if isinstance(rho, BipartiteState):
        return rho.rho
    m = la.as_matrix(rho)
    return make_state((m.shape[0], 1), m).rho


def shannon(p) -> float:
    """Shannon entropy of a probability vector with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)) or abs(p.sum() - 1.0) > 1e-10:
        raise InvalidParameterError("shannon() needs a non-negative vector summing to 1")
    nz = p[p > 0]
    return _clip(-float(np.sum(nz * np.log2(nz))))


def von_neumann(rho) -> float:
    """``-Tr rho log2 rho`` via the spectrum."""
    w = np.linalg.eigvalsh(_as_density(rho))
    return _clip(float(entropy_terms(w)))


def relative_entropy(rho, sigma) -> float:
    """``S(rho || sigma)`` in bits; ``inf`` when ``supp rho`` is not inside ``supp sigma``."""
    r = _as_density(rho)
    s = _as_density(sigma)
    if r.shape != s.shape:
        raise InvalidShapeError(f"relative entropy of {r.shape} against {s.shape}")
    ws, vs = np.linalg.eigh(s)
    inside = ws > SUPPORT_TOL
    outside = vs[:, ~inside]
    if outside.size and np.real(np.trace(outside.conj().T @ r @ outside)) > SUPPORT_TOL:
        return float("inf")
    vin = vs[:, inside]
    log_sigma = (vin * np.log2(ws[inside])) @ vin.conj().T
    cross = float(np.real(np.trace(r @ log_sigma)))
    return _clip(-von_neumann(r) - cross)


def classical_mutual_information(t: ProbabilityTable) -> float:
    """``S(p_A) + S(p_B) - S(p_AB)``."""
    return _clip(shannon(t.p_a) + shannon(t.p_b) - shannon(t.p.reshape(-1)))


def classical_J(t: ProbabilityTable, conditioned_on: str = "B") -> float:
    """Average entropy drop of one party once the other's outcome is known.

    ``conditioned_on="B"`` gives ``S(p_A) - sum_j p_B(j) S(p_A|B=j)``; outcomes
    of zero probability are skipped.
    """
    side = la.check_side(conditioned_on)
    if side == "B":
        marg, weights, cond = t.p_a, t.p_b, t.conditional_a
    else:
        marg, weights, cond = t.p_b, t.p_a, t.conditional_b
    avg = sum(w * shannon(cond(j)) for j, w in enumerate(weights) if w > 0)
    return _clip(shannon(marg) - avg)


def quantum_mutual_information(s: BipartiteState) -> float:
    return _clip(von_neumann(s.rho_a) + von_neumann(s.rho_b) - von_neumann(s.rho))


def entropy_of_entanglement(psi) -> float:
    """Entropy of either marginal of a pure bipartite state.

    Accepts a :class:`PureState` or a pure :class:`BipartiteState`.

    Raises:
        PurityError: if the state is mixed (purity below ``1 - 1e-9``).
    """
    state = psi.to_state() if isinstance(psi, PureState) else psi
    purity = state.purity()
    if purity < 1 - 1e-9:
        raise PurityError(f"state is mixed (purity {purity:.12f})")
    sa = von_neumann(state.rho_a)
    sb = von_neumann(state.rho_b)
    if abs(sa - sb) > 1e-9:
        raise NumericalError(f"marginal entropies disagree: {sa} vs {sb}")
    return sa
