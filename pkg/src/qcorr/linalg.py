"""Dense complex linear algebra and random ensembles.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. In every
bipartite routine subsystem ``A`` is the left tensor factor.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import HermiticityError, InvalidParameterError, InvalidShapeError

HERMITICITY_TOL = 1e-9


class HermitianEigensystem(NamedTuple):
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise InvalidShapeError(f"expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidShapeError("matrix contains non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def check_side(side: str) -> str:
    s = str(side).upper()
    if s not in ("A", "B"):
        raise InvalidParameterError(f"subsystem tag must be 'A' or 'B', got {side!r}")
    return s


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b`` with ``a`` as the outer (left) factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def _check_bipartite(m: np.ndarray, dims: Sequence[int]) -> tuple[int, int]:
    d1, d2 = (int(d) for d in dims)
    if d1 < 1 or d2 < 1:
        raise InvalidShapeError(f"subsystem dimensions must be positive, got {dims}")
    n = d1 * d2
    if m.shape != (n, n):
        raise InvalidShapeError(
            f"matrix of shape {m.shape} does not match dims {dims} (expected {n}x{n})"
        )
    return d1, d2


def partial_trace(m, dims: Sequence[int], over: str = "B") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``over="B"`` returns the ``dA x dA`` operator on ``A``; ``over="A"`` the
    ``dB x dB`` operator on ``B``.
    """
    m = as_matrix(m)
    dA, dB = _check_bipartite(m, dims)
    r = m.reshape(dA, dB, dA, dB)
    if check_side(over) == "B":
        return np.einsum("ibjb->ij", r)
    return np.einsum("aiaj->ij", r)


def ptrace(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Multipartite partial trace keeping the factors listed in ``keep`` (in order)."""
    m = np.asarray(m, dtype=complex)
    dims = [int(d) for d in dims]
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise InvalidShapeError(f"matrix of shape {m.shape} does not match dims {dims}")
    keep = sorted(int(k) for k in keep)
    k = len(dims)
    r = m.reshape(dims + dims)
    row = list(range(k))
    col = [i + k if i in keep else i for i in range(k)]
    out = keep + [i + k for i in keep]
    r = np.einsum(r, row + col, out)
    dk = int(np.prod([dims[i] for i in keep]))
    return r.reshape(dk, dk)


def partial_transpose(m, dims: Sequence[int], on: str = "B") -> np.ndarray:
    """Transpose the index blocks of one tensor factor.

    Leading axes of ``m`` are treated as a batch.
    """
    m = np.asarray(m, dtype=complex)
    lead = m.shape[:-2]
    d1, d2 = _check_bipartite(m[(0,) * len(lead)] if lead else m, dims)
    r = m.reshape(lead + (d1, d2, d1, d2))
    o = len(lead)
    axes = list(range(o))
    if check_side(on) == "B":
        axes += [o, o + 3, o + 2, o + 1]
    else:
        axes += [o + 2, o + 1, o, o + 3]
    return r.transpose(axes).reshape(m.shape)


def hermiticity_defect(h: np.ndarray) -> float:
    """Frobenius norm of ``h - h^dagger`` relative to the norm of ``h``."""
    norm = np.linalg.norm(h)
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(h - h.conj().T) / norm)


def eigh(h) -> HermitianEigensystem:
    """Spectral decomposition of a Hermitian matrix.

    Raises:
        HermiticityError: if the relative anti-Hermitian part exceeds 1e-9.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise InvalidShapeError(f"eigh needs a square matrix, got {h.shape}")
    defect = hermiticity_defect(h)
    if defect > HERMITICITY_TOL:
        raise HermiticityError(f"matrix is not Hermitian (relative defect {defect:.3e})")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return HermitianEigensystem(w, v)


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rows: int, cols: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary from the QR of a Ginibre matrix.

    The phases of ``R``'s diagonal are pushed into ``Q`` so the distribution is
    exactly Haar rather than QR-convention dependent.
    """
    if d < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {d}")
    q, r = np.linalg.qr(ginibre(d, d, seed))
    diag = np.diagonal(r)
    phases = diag / np.abs(diag)
    return q * phases


def random_density(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Ginibre-induced random density matrix ``G G^dagger / Tr`` of rank ``<= rank``."""
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise InvalidParameterError(f"rank must satisfy 1 <= rank <= {d}, got {rank}")
    g = ginibre(d, rank, seed)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pure(d: int, seed=None) -> np.ndarray:
    """Haar-random unit vector of length ``d``."""
    v = ginibre(d, 1, seed)[:, 0]
    return v / np.linalg.norm(v)


def random_kraus(d: int, n_ops: int = 2, seed=None) -> list[np.ndarray]:
    """Kraus operators of a random CPTP map on a ``d``-level system.

    Built by slicing a Haar isometry ``C^d -> C^d (x) C^n_ops`` into blocks.
    """
    u = haar_unitary(d * n_ops, seed)
    iso = u[:, :d]
    return [iso[k * d:(k + 1) * d, :] for k in range(n_ops)]


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) < tol)


def unitary_from_hermitian_coords(x: np.ndarray, d: int) -> np.ndarray:
    """``exp(iH)`` for the Hermitian ``H`` whose ``d**2`` real coordinates are ``x``.

    Diagonal entries take the first ``d`` coordinates; the remaining pairs fill
    the real and imaginary parts of the strict upper triangle.
    """
    x = np.asarray(x, dtype=float)
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = x[:d]
    iu = np.triu_indices(d, 1)
    m = len(iu[0])
    h[iu] = x[d:d + m] + 1j * x[d + m:d + 2 * m]
    h = h + np.triu(h, 1).conj().T
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T
