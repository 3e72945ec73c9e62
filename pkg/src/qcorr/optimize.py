"""Multi-start derivative-free search over local measurement bases.

An objective receives one stack of unitaries per factor, each of shape
``(n, d, d)``, and returns ``n`` real values. Columns of each unitary are the
basis vectors. Working on stacks lets the coarse qubit grid be evaluated in a
single vectorised call.

Qubit factors use the Bloch chart ``(theta, phi)`` for the first basis vector;
larger factors use ``U0 @ exp(iH(x))`` with ``x`` the ``d**2`` real coordinates
of a Hermitian generator around a start unitary ``U0``.
"""

from __future__ import annotations

import cmath
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import linalg as la

Objective = Callable[..., np.ndarray]


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of :func:`optimize_over_bases`.

    ``grid`` is the ``(theta, phi)`` resolution used to seed single-qubit
    problems; ``joint_grid`` is the per-factor resolution when several qubit
    factors are optimised together. The best ``grid_refine`` grid points are
    refined alongside the ``starts`` Haar-random starts.
    """

    starts: int = 16
    grid: tuple[int, int] = (60, 120)
    joint_grid: tuple[int, int] = (6, 12)
    grid_refine: int = 4
    fatol: float = 1e-8
    xatol: float = 1e-6
    max_restarts: int = 4
    max_evals: int = 5000
    seed: int = 0
    threads: int = 0

    def with_(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = OptimizerConfig()


@dataclass(frozen=True, eq=False)
class OptimizerResult:
    value: float
    unitaries: tuple[np.ndarray, ...]
    starts: int
    evaluations: int
    spread: float
    start_values: tuple[float, ...]


def bloch_unitary(theta, phi) -> np.ndarray:
    """Qubit basis unitaries whose first column is the Bloch direction ``(theta, phi)``.

    Broadcasts over array inputs, returning shape ``(..., 2, 2)``.
    """
    if np.isscalar(theta) and np.isscalar(phi):
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        e = cmath.exp(1j * phi)
        return np.array([[c, -e.conjugate() * s], [e * s, c]], dtype=complex)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    e = np.exp(1j * phi)
    u = np.empty(np.broadcast(theta, phi).shape + (2, 2), dtype=complex)
    u[..., 0, 0] = c
    u[..., 1, 0] = e * s
    u[..., 0, 1] = -np.conj(e) * s
    u[..., 1, 1] = c
    return u


def bloch_angles(u: np.ndarray) -> tuple[float, float]:
    """Chart coordinates of the first column of a qubit unitary (phase discarded)."""
    v = np.asarray(u)[:, 0]
    a, b = v
    if abs(a) > 1e-15:
        b = b * abs(a) / a
    theta = 2 * np.arctan2(abs(b), abs(a))
    phi = float(np.angle(b)) if abs(b) > 1e-15 else 0.0
    return float(theta), phi


def grid_angles(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell-centred polar angles and evenly spaced azimuths, flattened together."""
    th = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    ph = np.arange(n_phi) * 2 * np.pi / n_phi
    t, p = np.meshgrid(th, ph, indexing="ij")
    return t.ravel(), p.ravel()


def _threads(config: OptimizerConfig) -> int:
    if config.threads > 0:
        return config.threads
    env = os.environ.get("QCORR_THREADS", "").strip()
    try:
        n = int(env) if env else 0
    except ValueError:
        n = 0
    return n if n > 0 else 1


class _Chart:
    """Maps a flat coordinate vector to one unitary per factor."""

    def __init__(self, dims: Sequence[int], bases: Sequence[np.ndarray]):
        self.dims = tuple(dims)
        self.bases = tuple(bases)
        self.sizes = tuple(2 if d == 2 else (0 if d == 1 else d * d) for d in self.dims)

    def unitaries(self, x: np.ndarray) -> list[np.ndarray]:
        out = []
        k = 0
        for d, base, n in zip(self.dims, self.bases, self.sizes):
            xs = x[k:k + n]
            k += n
            if d == 1:
                u = np.ones((1, 1), dtype=complex)
            elif d == 2:
                u = bloch_unitary(xs[0], xs[1])
            else:
                u = base @ la.unitary_from_hermitian_coords(xs, d)
            out.append(u)
        return out


def _start_point(dims, unitaries):
    """Chart origin for a start given as one unitary per factor."""
    x, bases = [], []
    for d, u in zip(dims, unitaries):
        if d == 2:
            x.extend(bloch_angles(u))
            bases.append(None)
        elif d == 1:
            bases.append(None)
        else:
            x.extend([0.0] * (d * d))
            bases.append(np.asarray(u, dtype=complex))
    return np.array(x, dtype=float), bases


class _Counter:
    def __init__(self, fn: Objective, sign: float):
        self.fn = fn
        self.sign = sign
        self.count = 0

    def __call__(self, *stacks):
        self.count += stacks[0].shape[0]
        return self.sign * np.asarray(self.fn(*stacks), dtype=float)


def _refine(fn: _Counter, dims, start, config: OptimizerConfig):
    x0, bases = _start_point(dims, start)
    chart = _Chart(dims, bases)
    if x0.size == 0:
        us = chart.unitaries(x0)
        return float(fn(*[u[None] for u in us])[0]), us

    def f(x):
        return float(fn(*[u[None] for u in chart.unitaries(x)])[0])

    x, fx = x0, f(x0)
    step = 0.4
    for _ in range(config.max_restarts + 1):
        simplex = np.vstack([x] + [x + step * e for e in np.eye(x.size)])
        res = minimize(
            f,
            x,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": config.xatol,
                "fatol": config.fatol,
                "maxfev": config.max_evals,
            },
        )
        improved = fx - res.fun
        if res.fun < fx:
            x, fx = res.x, float(res.fun)
        if improved <= config.fatol:
            break
        step = max(step * 0.25, 10 * config.xatol)
    return fx, chart.unitaries(x)


def _grid_starts(fn: _Counter, dims, config: OptimizerConfig) -> list[tuple[np.ndarray, ...]]:
    if config.grid_refine <= 0 or any(d != 2 for d in dims):
        return []
    res = config.grid if len(dims) == 1 else config.joint_grid
    if res[0] <= 0 or res[1] <= 0:
        return []
    t, p = grid_angles(*res)
    single = bloch_unitary(t, p)
    if len(dims) == 1:
        stacks = [single]
    else:
        idx = np.array(list(itertools.product(range(single.shape[0]), repeat=len(dims))))
        stacks = [single[idx[:, k]] for k in range(len(dims))]
    vals = fn(*stacks)
    order = np.argsort(vals, kind="stable")[: config.grid_refine]
    return [tuple(s[i] for s in stacks) for i in order]


BOUND_TOL = 1e-12


def optimize_over_bases(
    objective: Objective,
    dims: int | Sequence[int],
    config: OptimizerConfig | None = None,
    *,
    maximize: bool = False,
    hints: Sequence[Sequence[np.ndarray]] = (),
    bound: float | None = None,
) -> OptimizerResult:
    """Minimise (or maximise) ``objective`` over local orthonormal bases.

    Starts are, in order: the ``hints`` (e.g. marginal eigenbases), the best
    grid points for qubit factors, then ``config.starts`` Haar-random bases
    drawn from ``config.seed``. Each start is refined by restarted
    Nelder-Mead. The best value wins with ties broken by start index, so the
    result does not depend on the thread count.

    ``bound`` is a value the objective provably cannot pass (a lower bound
    when minimising, an upper bound when maximising). The search stops after
    the first start that comes within ``BOUND_TOL`` of it, since no later
    start could improve on it by more than that.
    """
    config = config or DEFAULT_CONFIG
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(d) for d in dims)
    fn = _Counter(objective, -1.0 if maximize else 1.0)
    sign = fn.sign
    target = None if bound is None else sign * float(bound) + BOUND_TOL

    def start_stream():
        # grid points are scored only once the hints are exhausted
        yield from (tuple(np.asarray(u) for u in h) for h in hints)
        yield from _grid_starts(fn, dims, config)
        rng = np.random.default_rng(config.seed)
        for _ in range(config.starts):
            yield tuple(la.haar_unitary(d, rng) for d in dims)

    def run(start):
        counter = _Counter(fn.fn, fn.sign)
        value, us = _refine(counter, dims, start, config)
        return value, us, counter.count

    def reached(result) -> bool:
        return target is not None and result[0] <= target

    threads = _threads(config)
    results: list = []
    stream = start_stream()
    if threads > 1:
        # refine in batches; a batch may overshoot the stopping start, so
        # truncate to the same prefix a serial run would have produced
        with ThreadPoolExecutor(max_workers=threads) as pool:
            while True:
                batch = list(itertools.islice(stream, threads))
                if not batch:
                    break
                results.extend(pool.map(run, batch))
                if any(reached(r) for r in results):
                    break
        hit = next((i for i, r in enumerate(results) if reached(r)), None)
        if hit is not None:
            results = results[: hit + 1]
    else:
        for start in stream:
            results.append(run(start))
            if reached(results[-1]):
                break
    if not results:
        results.append(run(tuple(np.eye(d, dtype=complex) for d in dims)))

    values = np.array([r[0] for r in results])
    best = int(np.argmin(values))
    ordered = np.sort(values)
    spread = float(ordered[1] - ordered[0]) if values.size > 1 else 0.0
    # grid scoring is counted only if the prefix got past the hints
    grid_evals = fn.count if len(results) > len(hints) else 0
    evaluations = grid_evals + sum(r[2] for r in results)
    return OptimizerResult(
        value=float(sign * values[best]),
        unitaries=tuple(np.asarray(u) for u in results[best][1]),
        starts=len(results),
        evaluations=int(evaluations),
        spread=max(0.0, spread),
        start_values=tuple(float(sign * v) for v in values),
    )
