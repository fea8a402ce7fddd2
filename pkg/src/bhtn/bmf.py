"""Iterative Boolean matrix factorization X ~ A.B by alternating column solves.

Each half-step fixes one factor and re-solves the other column by column:
column i of B minimizes the Hamming distance d(X_i, A y) via the polynomial
machinery of :mod:`bhtn.hubo`; the A-update runs the same routine on the
transposed problem. With the exact backend every half-step is per-column
optimal, which makes the per-iteration distance history non-increasing.

Column subproblems are independent and may run in threads; each derives its
own solver seed from (config seed, half-step index, column index), so serial
and parallel runs produce identical factors.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .boolcore import BitMatrix, ShapeError, bool_matmul, hamming
from .hubo import build_column_hubo
from .seeding import derive_seed
from .solvers import SolveReport, SolverConfig, minimize_column

__all__ = ["BmfConfig", "BmfResult", "update_factor", "factorize"]

_INIT_TAG = 0x1A17


@dataclass(frozen=True)
class BmfConfig:
    """Factorization rank plus solver and iteration policy.

    ``init`` is either ``column_sample`` (columns drawn without replacement
    from the distinct columns of X, padded randomly; the default, which in
    practice avoids the all-zeros fixed point of the alternation) or
    ``random_bernoulli`` (iid Bernoulli(init_p) entries). The loop stops at
    distance 0, after ``stall_patience`` iterations without improvement, or
    at ``max_iters``.
    """

    rank: int
    max_iters: int = 30
    solver: SolverConfig = field(default_factory=SolverConfig)
    init: str = "column_sample"
    init_p: float = 0.5
    seed: int = 0
    stall_patience: int = 3
    jobs: int = 1

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.init not in ("random_bernoulli", "column_sample"):
            raise ValueError(f"unknown init {self.init!r}")
        if not 0 < self.init_p < 1:
            raise ValueError("init_p must lie in (0, 1)")
        if self.stall_patience < 1:
            raise ValueError("stall_patience must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass(frozen=True)
class BmfResult:
    """Best factors seen, with the per-iteration distance trace."""

    a: BitMatrix
    b: BitMatrix
    distance: int
    iters: int
    solver_time_total: float
    history: tuple[int, ...]


def _solve_columns(
    x: BitMatrix, a: BitMatrix, cfg: BmfConfig, phase: int
) -> tuple[BitMatrix, float]:
    n, m = x.rows, x.cols
    if a.rows != n:
        raise ShapeError(f"factor has {a.rows} rows, matrix has {n}")
    out = np.zeros((a.cols, m), dtype=np.uint8)

    def solve_one(i: int) -> SolveReport:
        p = build_column_hubo(a, x.column(i))
        scfg = replace(cfg.solver, seed=derive_seed(cfg.seed, phase, i))
        return minimize_column(p, scfg)

    if cfg.jobs > 1 and m > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = list(pool.map(solve_one, range(m)))
    else:
        reports = [solve_one(i) for i in range(m)]
    solver_time = 0.0
    for i, rep in enumerate(reports):
        out[:, i] = rep.best.a
        solver_time += rep.wall_time
    return BitMatrix(out), solver_time


def update_factor(x: BitMatrix, a: BitMatrix, cfg: BmfConfig, phase: int = 0) -> BitMatrix:
    """Optimal-per-column right factor for fixed left factor ``a``."""
    return _solve_columns(x, a, cfg, phase)[0]


def _init_factor(x: BitMatrix, cfg: BmfConfig) -> BitMatrix:
    rng = np.random.Generator(np.random.PCG64(derive_seed(cfg.seed, _INIT_TAG)))
    n, r = x.rows, cfg.rank
    if cfg.init == "random_bernoulli":
        return BitMatrix((rng.random((n, r)) < cfg.init_p).astype(np.uint8))
    # a zero column of A is a dead rank unit the alternation cannot revive,
    # so sample only from the distinct nonzero columns
    uniq = np.unique(x.a, axis=1)
    uniq = uniq[:, uniq.any(axis=0)]
    take = min(r, uniq.shape[1])
    if take:
        picked = uniq[:, rng.choice(uniq.shape[1], size=take, replace=False)]
    else:
        picked = np.zeros((n, 0), dtype=np.uint8)
    if take < r:
        pad = (rng.random((n, r - take)) < cfg.init_p).astype(np.uint8)
        picked = np.concatenate([picked, pad], axis=1)
    return BitMatrix(picked)


def factorize(x: BitMatrix, cfg: BmfConfig) -> BmfResult:
    """Alternate column solves until exact, stalled, or out of iterations.

    Returns the best (A, B) pair ever seen; ``history`` holds the distance
    after each full iteration as computed, which under the exact backend is
    non-increasing by per-column optimality.
    """
    a = _init_factor(x, cfg)
    best: tuple[BitMatrix, BitMatrix, int] | None = None
    history: list[int] = []
    solver_time = 0.0
    stall = 0
    phase = 0
    for _ in range(cfg.max_iters):
        b, dt = _solve_columns(x, a, cfg, phase)
        solver_time += dt
        phase += 1
        at, dt = _solve_columns(x.T, b.T, cfg, phase)
        solver_time += dt
        phase += 1
        a = at.T
        d = hamming(x, bool_matmul(a, b))
        history.append(d)
        if best is None or d < best[2]:
            best = (a, b, d)
            stall = 0
        else:
            stall += 1
        if d == 0 or stall >= cfg.stall_patience:
            break
    assert best is not None
    return BmfResult(
        a=best[0],
        b=best[1],
        distance=best[2],
        iters=len(history),
        solver_time_total=solver_time,
        history=tuple(history),
    )
