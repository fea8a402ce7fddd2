"""Pluggable minimizers for column polynomials and their QUBO reductions.

Three backends behind one report type:

* ``exact``  - full enumeration of the polynomial (ground-truth oracle);
* ``sa``     - simulated annealing on the quadratized model;
* ``remote`` - HTTP client for an annealer-shaped solver service speaking the
  JSON protocol of :mod:`bhtn.server` (the bundled reference server wraps the
  local ``sa`` backend, so loopback runs reproduce local results bit for bit).

All backends re-evaluate the reported energy against the original polynomial,
so a report can never overstate solution quality.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import requests

from ._kernel import anneal, kernel_backend
from .boolcore import BitVector
from .hubo import (
    HuboPoly,
    QuboModel,
    default_strength,
    eval_hubo,
    eval_qubo,
    hubo_energies,
    hubo_to_qubo,
    induced_assignment,
)
from .serialize import qubo_to_obj

__all__ = [
    "SolverError",
    "TooManyVariablesError",
    "RemoteTransportError",
    "RemoteProtocolError",
    "SolverConfig",
    "SolveReport",
    "beta_schedule",
    "solve_exact",
    "solve_sa",
    "solve_remote",
    "minimize_column",
    "kernel_backend",
]

EXACT_VAR_LIMIT = 20
REMOTE_RETRIES = 3  # additional attempts after the first failure


class SolverError(RuntimeError):
    """A backend failed to produce a usable result."""


class TooManyVariablesError(SolverError):
    """Exact enumeration refused: 2^num_vars assignments is too many."""


class RemoteTransportError(SolverError):
    """The remote endpoint could not be reached (after retries)."""


class RemoteProtocolError(SolverError):
    """The remote endpoint answered, but the payload is unusable."""


@dataclass(frozen=True)
class SolverConfig:
    """Backend choice plus annealing parameters.

    ``num_reads`` is the anneal-count analog, ``sweeps`` the Metropolis
    sweeps per read, ``beta_range`` the (initial, final) inverse temperatures
    of the geometric schedule. ``time_limit`` (milliseconds) optionally stops
    an SA solve early at read-chunk granularity.
    """

    backend: str = "exact"
    num_reads: int = 100
    sweeps: int = 1000
    beta_range: tuple[float, float] = (0.1, 10.0)
    seed: int = 0
    time_limit: float | None = None
    remote_endpoint: str | None = None

    def __post_init__(self):
        if self.backend not in ("exact", "sa", "remote"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.num_reads < 1:
            raise ValueError("num_reads must be >= 1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        b0, b1 = self.beta_range
        if not (0 < b0 < b1):
            raise ValueError("beta_range must satisfy 0 < initial < final")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive when set")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve: best assignment over original variables only."""

    best: BitVector
    energy: float
    wall_time: float
    reads_used: int
    backend: str


def beta_schedule(cfg: SolverConfig) -> np.ndarray:
    """Geometric inverse-temperature ladder; one entry per sweep."""
    b0, b1 = cfg.beta_range
    return np.geomspace(b0, b1, cfg.sweeps)


def solve_exact(p: HuboPoly) -> SolveReport:
    """Global minimizer by full enumeration.

    Ties break toward the lowest assignment value (bit 0 = least-significant
    bit), so results are reproducible.
    """
    if p.num_vars > EXACT_VAR_LIMIT:
        raise TooManyVariablesError(
            f"exact enumeration of {p.num_vars} variables needs 2^{p.num_vars} evaluations"
        )
    t0 = time.perf_counter()
    energies = hubo_energies(p)
    k = int(np.argmin(energies))
    bits = BitVector((k >> np.arange(p.num_vars)) & 1)
    return SolveReport(
        best=bits,
        energy=float(energies[k]),
        wall_time=time.perf_counter() - t0,
        reads_used=int(energies.shape[0]),
        backend="exact",
    )


def _bits_value(bits: Sequence[int]) -> int:
    v = 0
    for i, b in enumerate(bits):
        v |= int(b) << i
    return v


def _select_best(samples: list[tuple[list[int], float]]) -> int:
    """Index of the (energy, assignment-value) minimum; shared by sa/remote."""
    best = 0
    best_key = (samples[0][1], _bits_value(samples[0][0]))
    for idx in range(1, len(samples)):
        key = (samples[idx][1], _bits_value(samples[idx][0]))
        if key < best_key:
            best, best_key = idx, key
    return best


def _run_reads(q: QuboModel, cfg: SolverConfig) -> tuple[np.ndarray, int]:
    """Kernel driver honoring time_limit at read-chunk granularity."""
    h, W = q.dense()
    betas = beta_schedule(cfg)
    if cfg.time_limit is None:
        states, _ = anneal(h, W, betas, cfg.num_reads, cfg.seed)
        return states, cfg.num_reads
    budget = cfg.time_limit / 1000.0
    chunk = max(1, cfg.num_reads // 8)
    done = 0
    parts = []
    t0 = time.perf_counter()
    while done < cfg.num_reads:
        take = min(chunk, cfg.num_reads - done)
        states, _ = anneal(h, W, betas, take, cfg.seed, read_offset=done)
        parts.append(states)
        done += take
        if time.perf_counter() - t0 >= budget:
            break
    return np.concatenate(parts, axis=0), done


def _finish_qubo_solve(
    q: QuboModel, states: np.ndarray, t0: float, reads: int, backend: str
) -> SolveReport:
    samples = [
        (states[r].tolist(), eval_qubo(q, states[r])) for r in range(states.shape[0])
    ]
    idx = _select_best(samples)
    full = induced_assignment(q, np.asarray(samples[idx][0][: q.num_original], dtype=np.uint8))
    return SolveReport(
        best=BitVector(full[: q.num_original]),
        energy=eval_qubo(q, full),
        wall_time=time.perf_counter() - t0,
        reads_used=reads,
        backend=backend,
    )


def solve_sa(q: QuboModel, cfg: SolverConfig) -> SolveReport:
    """Best-of-``num_reads`` simulated annealing on a QUBO.

    Deterministic given ``cfg.seed``: chain c draws from a stream derived
    from (seed, c), so prefixes agree across different read counts. The best
    sample is chosen by (re-evaluated energy, assignment value); auxiliaries
    are then forced to their induced products and projected out.
    """
    t0 = time.perf_counter()
    states, reads = _run_reads(q, cfg)
    return _finish_qubo_solve(q, states, t0, reads, "sa")


def _post_with_retries(url: str, payload: dict, timeout: float, backoff_s: float):
    last_exc: Exception | None = None
    for attempt in range(1 + REMOTE_RETRIES):
        if attempt:
            time.sleep(backoff_s * 2 ** (attempt - 1))
        try:
            resp = requests.post(url, json=payload, timeout=timeout)
        except requests.RequestException as e:
            last_exc = e
            continue
        if resp.status_code == 503:  # overloaded: worth retrying
            last_exc = RemoteTransportError(f"server overloaded (503) at {url}")
            continue
        return resp
    raise RemoteTransportError(
        f"no response from {url} after {1 + REMOTE_RETRIES} attempts: {last_exc}"
    )


def solve_remote(
    q: QuboModel, cfg: SolverConfig, timeout: float = 30.0, backoff_s: float = 0.1
) -> SolveReport:
    """Ship the QUBO to a solver service and validate what comes back.

    Every returned sample is re-evaluated locally; an energy disagreeing by
    more than 1e-9 rejects the response.
    """
    if not cfg.remote_endpoint:
        raise ValueError("remote backend requires remote_endpoint")
    t0 = time.perf_counter()
    payload = {"qubo": qubo_to_obj(q), "num_reads": cfg.num_reads, "seed": cfg.seed}
    if cfg.time_limit is not None:
        payload["time_limit"] = cfg.time_limit
    url = cfg.remote_endpoint.rstrip("/") + "/solve"
    resp = _post_with_retries(url, payload, timeout, backoff_s)
    if resp.status_code != 200:
        raise RemoteProtocolError(f"HTTP {resp.status_code} from {url}: {resp.text[:200]}")
    try:
        body = resp.json()
    except (ValueError, json.JSONDecodeError):
        raise RemoteProtocolError("response is not JSON") from None
    samples_raw = body.get("samples") if isinstance(body, dict) else None
    if not isinstance(samples_raw, list) or not samples_raw:
        raise RemoteProtocolError("response lacks a non-empty 'samples' list")
    samples: list[tuple[list[int], float]] = []
    reads = 0
    for s in samples_raw:
        try:
            bits = [int(b) for b in s["bits"]]
            energy = float(s["energy"])
            count = int(s.get("count", 1))
        except (TypeError, KeyError, ValueError):
            raise RemoteProtocolError(f"malformed sample: {s!r}") from None
        if len(bits) != q.num_vars or any(b not in (0, 1) for b in bits):
            raise RemoteProtocolError(f"sample bits invalid for {q.num_vars} variables")
        local = eval_qubo(q, np.asarray(bits, dtype=np.uint8))
        if abs(local - energy) > 1e-9:
            raise RemoteProtocolError(
                f"sample energy {energy} disagrees with local evaluation {local}"
            )
        samples.append((bits, energy))
        reads += max(count, 1)
    idx = _select_best(samples)
    full = induced_assignment(q, np.asarray(samples[idx][0][: q.num_original], dtype=np.uint8))
    return SolveReport(
        best=BitVector(full[: q.num_original]),
        energy=eval_qubo(q, full),
        wall_time=time.perf_counter() - t0,
        reads_used=reads,
        backend="remote",
    )


def minimize_column(p: HuboPoly, cfg: SolverConfig) -> SolveReport:
    """Solve one column polynomial with the configured backend.

    The exact backend enumerates the polynomial directly; sa/remote quadratize
    with the default strength first. The reported energy is always the
    original polynomial's value at the reported assignment.
    """
    if cfg.backend == "exact":
        return solve_exact(p)
    q = hubo_to_qubo(p, default_strength(p))
    if cfg.backend == "sa":
        rep = solve_sa(q, cfg)
    elif cfg.backend == "remote":
        rep = solve_remote(q, cfg)
    else:
        raise ValueError(f"unknown backend {cfg.backend!r}")
    return replace(rep, energy=eval_hubo(p, rep.best))
