"""Validated bipartite states, classical tables and the named state families."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import (
    HermiticityError,
    InvalidParameterError,
    InvalidShapeError,
    PositivityError,
    TraceError,
)

TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
TABLE_TOL = 1e-12
NORM_TOL = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Density operator on ``H_A (x) H_B``.

    Build through :func:`make_state`, which validates; the constructor itself
    trusts its input.
    """

    dims: tuple[int, int]
    rho: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def rho_a(self) -> np.ndarray:
        return la.partial_trace(self.rho, self.dims, over="B")

    @property
    def rho_b(self) -> np.ndarray:
        return la.partial_trace(self.rho, self.dims, over="A")

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def swapped(self) -> "BipartiteState":
        """Same state with the roles of ``A`` and ``B`` exchanged."""
        dA, dB = self.dims
        r = self.rho.reshape(dA, dB, dA, dB).transpose(1, 0, 3, 2).reshape(self.dim, self.dim)
        return BipartiteState((dB, dA), _frozen(r))

    def side_view(self, side: str) -> "BipartiteState":
        """The state arranged so that ``side`` is the left factor."""
        return self if la.check_side(side) == "A" else self.swapped()


def make_state(dims: Sequence[int], matrix) -> BipartiteState:
    """Validate ``matrix`` as a density operator with subsystem dimensions ``dims``.

    Eigenvalues in ``(-1e-10, 0)`` are clipped to zero.

    Raises:
        InvalidShapeError, HermiticityError, TraceError, PositivityError
    """
    m = la.as_matrix(matrix)
    dA, dB = (int(d) for d in dims)
    if dA < 1 or dB < 1 or m.shape != (dA * dB, dA * dB):
        raise InvalidShapeError(f"matrix of shape {m.shape} does not match dims ({dA}, {dB})")
    defect = la.hermiticity_defect(m)
    if defect > la.HERMITICITY_TOL:
        raise HermiticityError(f"density matrix is not Hermitian (relative defect {defect:.3e})")
    m = 0.5 * (m + m.conj().T)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceError(f"density matrix has trace {tr!r}, expected 1")
    w, v = np.linalg.eigh(m)
    if w[0] < -POSITIVITY_TOL:
        raise PositivityError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    if w[0] < 0:
        m = (v * np.clip(w, 0.0, None)) @ v.conj().T
    return BipartiteState((dA, dB), _frozen(m))


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """Joint distribution ``p[i, j]`` of a classical pair (A outcome ``i``, B outcome ``j``)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2:
            raise InvalidShapeError(f"probability table must be 2-d, got shape {p.shape}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvalidParameterError("probability table has negative or non-finite entries")
        if abs(p.sum() - 1.0) > TABLE_TOL:
            raise InvalidParameterError(f"probability table sums to {p.sum()!r}, expected 1")
        object.__setattr__(self, "p", _frozen(p))

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    @property
    def p_a(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def p_b(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def conditional_a(self, j: int) -> np.ndarray | None:
        """``p(A | B=j)``, or ``None`` if ``p_B(j) == 0``."""
        pb = self.p_b[j]
        return None if pb == 0 else self.p[:, j] / pb

    def conditional_b(self, i: int) -> np.ndarray | None:
        """``p(B | A=i)``, or ``None`` if ``p_A(i) == 0``."""
        pa = self.p_a[i]
        return None if pa == 0 else self.p[i, :] / pa


@dataclass(frozen=True, eq=False)
class PureState:
    dims: tuple[int, int]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dA, dB = (int(d) for d in self.dims)
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if v.size != dA * dB:
            raise InvalidShapeError(f"{v.size} amplitudes do not match dims ({dA}, {dB})")
        norm2 = float(np.vdot(v, v).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidParameterError(f"amplitudes have squared norm {norm2!r}, expected 1")
        object.__setattr__(self, "dims", (dA, dB))
        object.__setattr__(self, "amplitudes", _frozen(v))

    @classmethod
    def normalized(cls, dims, amplitudes) -> "PureState":
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(tuple(dims), v / np.linalg.norm(v))

    def to_state(self) -> BipartiteState:
        v = self.amplitudes
        return make_state(self.dims, np.outer(v, v.conj()))


# -- constructors -----------------------------------------------------------


def _unitary(u, d: int, name: str) -> np.ndarray:
    u = np.eye(d, dtype=complex) if u is None else np.asarray(u, dtype=complex)
    if u.shape != (d, d) or not la.is_unitary(u):
        raise InvalidParameterError(f"{name} must be a {d}x{d} unitary")
    return u


def _density(m, name: str) -> np.ndarray:
    m = la.as_matrix(m)
    try:
        return make_state((m.shape[0], 1), m).rho
    except InvalidShapeError:
        raise InvalidParameterError(f"{name} must be a square density matrix") from None


def _probabilities(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if np.any(p < 0) or abs(p.sum() - 1.0) > TABLE_TOL:
        raise InvalidParameterError(f"{name} must be a probability vector")
    return p


def embed_classical(table: ProbabilityTable, ua=None, ub=None) -> BipartiteState:
    """Classical-classical state ``sum_ij p_ij |u_i><u_i| (x) |v_j><v_j|``.

    ``ua`` / ``ub`` are unitaries whose columns are the local bases (identity
    when omitted).
    """
    if not isinstance(table, ProbabilityTable):
        table = ProbabilityTable(table)
    dA, dB = table.shape
    ua = _unitary(ua, dA, "UA")
    ub = _unitary(ub, dB, "UB")
    u = np.kron(ua, ub)
    rho = (u * table.p.reshape(-1)) @ u.conj().T
    return make_state((dA, dB), rho)


def bell() -> BipartiteState:
    """``|Phi+><Phi+|`` with ``Phi+ = (|00> + |11>) / sqrt 2``."""
    v = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return make_state((2, 2), np.outer(v, v.conj()))


def werner(p: float) -> BipartiteState:
    """``p |Phi+><Phi+| + (1 - p) I/4`` for ``p`` in ``[0, 1]``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"werner parameter must lie in [0, 1], got {p}")
    return make_state((2, 2), p * bell().rho + (1 - p) * np.eye(4) / 4)


def product(rho_a, rho_b) -> BipartiteState:
    ra = _density(rho_a, "rho_a")
    rb = _density(rho_b, "rho_b")
    return make_state((ra.shape[0], rb.shape[0]), np.kron(ra, rb))


def cc(table, ua=None, ub=None) -> BipartiteState:
    return embed_classical(ProbabilityTable(np.asarray(table, dtype=float)), ua, ub)


def cq(p_a, ua, rhos_b: Sequence) -> BipartiteState:
    """Classical-quantum state ``sum_i p_i |u_i><u_i| (x) rho_i``."""
    p = _probabilities(p_a, "p_a")
    rhos = [_density(r, f"rho_b[{i}]") for i, r in enumerate(rhos_b)]
    dA = p.size
    if len(rhos) != dA:
        raise InvalidParameterError(f"need {dA} conditional states, got {len(rhos)}")
    dB = rhos[0].shape[0]
    if any(r.shape != (dB, dB) for r in rhos):
        raise InvalidParameterError("conditional states must share one dimension")
    ua = _unitary(ua, dA, "UA")
    rho = sum(
        pi * np.kron(np.outer(ua[:, i], ua[:, i].conj()), r) for i, (pi, r) in enumerate(zip(p, rhos))
    )
    return make_state((dA, dB), rho)


def qc(p_b, ub, rhos_a: Sequence) -> BipartiteState:
    """Quantum-classical state ``sum_j p_j rho_j (x) |v_j><v_j|``."""
    return cq(p_b, ub, rhos_a).swapped()


def separable(weights, pairs: Sequence) -> BipartiteState:
    """Convex mixture of product pure states; ``pairs`` holds ``(psi_a, psi_b)`` vectors."""
    w = _probabilities(weights, "weights")
    if len(pairs) != w.size:
        raise InvalidParameterError("weights and pure pairs differ in length")
    terms = []
    for a, b in pairs:
        a = np.asarray(a, dtype=complex).reshape(-1)
        b = np.asarray(b, dtype=complex).reshape(-1)
        a = a / np.linalg.norm(a)
        b = b / np.linalg.norm(b)
        v = np.kron(a, b)
        terms.append((a.size, b.size, np.outer(v, v.conj())))
    dims = {(t[0], t[1]) for t in terms}
    if len(dims) != 1:
        raise InvalidParameterError("pure pairs must share local dimensions")
    return make_state(dims.pop(), sum(wi * t[2] for wi, t in zip(w, terms)))


def pure(amplitudes, dims=None) -> BipartiteState:
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if dims is None:
        d = int(round(np.sqrt(v.size)))
        if d * d != v.size:
            raise InvalidParameterError("dims required for non-square amplitude count")
        dims = (d, d)
    return PureState(tuple(dims), v).to_state()


PRESETS = {
    "bell": bell,
    "werner": werner,
    "product": product,
    "cc": cc,
    "cq": cq,
    "qc": qc,
    "separable": separable,
    "pure": pure,
}


def preset(name: str, **params) -> BipartiteState:
    """Construct a named state family; see ``PRESETS`` for the accepted names."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise InvalidParameterError(f"bad parameters for preset {name!r}: {exc}") from None


def marginals(state: BipartiteState) -> tuple[np.ndarray, np.ndarray]:
    return state.rho_a, state.rho_b


def apply_local_unitary(state: BipartiteState, ua=None, ub=None) -> BipartiteState:
    dA, dB = state.dims
    u = np.kron(_unitary(ua, dA, "UA"), _unitary(ub, dB, "UB"))
    return make_state(state.dims, u @ state.rho @ u.conj().T)


def apply_local_channel(state: BipartiteState, kraus: Sequence[np.ndarray], side: str = "B") -> BipartiteState:
    """Apply a CPTP map given by Kraus operators to one subsystem."""
    dA, dB = state.dims
    side = la.check_side(side)
    d = dB if side == "B" else dA
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if any(k.shape != (d, d) for k in ks):
        raise InvalidShapeError(f"Kraus operators must be {d}x{d}")
    total = sum(k.conj().T @ k for k in ks)
    if np.linalg.norm(total - np.eye(d)) > 1e-10:
        raise InvalidParameterError("Kraus operators are not trace preserving")
    out = np.zeros_like(state.rho)
    for k in ks:
        big = np.kron(np.eye(dA), k) if side == "B" else np.kron(k, np.eye(dB))
        out += big @ state.rho @ big.conj().T
    return make_state(state.dims, out)


# -- random ensembles ---------------------------------------------------------


def random_state(dims=(2, 2), rank: int | None = None, seed=None) -> BipartiteState:
    dA, dB = dims
    return make_state(dims, la.random_density(dA * dB, rank, seed))


def random_pure_state(dims=(2, 2), seed=None) -> PureState:
    return PureState.normalized(dims, la.random_pure(dims[0] * dims[1], seed))


def random_table(shape, seed=None) -> ProbabilityTable:
    rng = la.rng_from(seed)
    x = rng.exponential(size=shape)
    # sprinkle structural zeros so the zero-probability branches get exercised
    x[rng.random(size=shape) < 0.15] = 0.0
    if x.sum() == 0:
        x.flat[0] = 1.0
    return ProbabilityTable(x / x.sum())


def random_cq(dims=(2, 2), seed=None) -> BipartiteState:
    rng = la.rng_from(seed)
    dA, dB = dims
    p = rng.dirichlet(np.ones(dA))
    ua = la.haar_unitary(dA, rng)
    rhos = [la.random_density(dB, None, rng) for _ in range(dA)]
    return cq(p, ua, rhos)


def random_qc(dims=(2, 2), seed=None) -> BipartiteState:
    dA, dB = dims
    return random_cq((dB, dA), seed).swapped()


def random_cc(dims=(2, 2), seed=None) -> BipartiteState:
    rng = la.rng_from(seed)
    dA, dB = dims
    table = rng.dirichlet(np.ones(dA * dB)).reshape(dA, dB)
    return cc(table, la.haar_unitary(dA, rng), la.haar_unitary(dB, rng))
