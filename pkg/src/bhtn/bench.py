"""Parameter sweeps: vary one of {rank, size, order}, record errors and times.

Each trial generates a fresh problem, optionally corrupts it with bit-flip
noise, decomposes the (possibly noisy) input and scores the reconstruction
against both the input and the clean original. Trials are independently
seeded, so results are identical whether they run serially or in a process
pool, and rows are always ordered by (value, noise condition, trial).
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import mean, stdev
from typing import Iterable

from .bmf import BmfConfig
from .gen import GenSpec, add_noise, generate
from .htn import HtnConfig, decompose, error_rate, reconstruct
from .seeding import derive_seed
from .solvers import SolverConfig

__all__ = ["SweepSpec", "TrialRecord", "run_sweep", "summarize", "write_csv", "CSV_HEADER"]

log = logging.getLogger(__name__)

CSV_HEADER = [
    "order",
    "size",
    "rank",
    "noise",
    "seed",
    "error_vs_input",
    "error_vs_clean",
    "solver_ms",
    "total_ms",
    "iters",
]

_NOISE_TAG = 0xB11F
_DECOMP_TAG = 0xDEC0


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: ``vary`` names the swept parameter, ``values`` its grid;
    the other two of (order, size, rank) stay fixed."""

    vary: str
    values: tuple[int, ...]
    order: int = 4
    size: int = 4
    rank: int = 4
    trials: int = 1
    noise: str = "both"
    noise_prob: float = 0.01
    solver: SolverConfig = field(default_factory=SolverConfig)
    max_iters: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.vary not in ("rank", "size", "order"):
            raise ValueError(f"vary must be rank|size|order, got {self.vary!r}")
        if not self.values:
            raise ValueError("values must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.noise not in ("both", "clean", "noisy"):
            raise ValueError(f"noise must be both|clean|noisy, got {self.noise!r}")

    def params_for(self, value: int) -> tuple[int, int, int]:
        params = {"order": self.order, "size": self.size, "rank": self.rank}
        params[self.vary] = value
        return params["order"], params["size"], params["rank"]

    def noise_flags(self) -> tuple[int, ...]:
        return {"both": (0, 1), "clean": (0,), "noisy": (1,)}[self.noise]


@dataclass(frozen=True)
class TrialRecord:
    order: int
    size: int
    rank: int
    noise: int
    seed: int
    error_vs_input: float | None
    error_vs_clean: float | None
    solver_ms: float
    total_ms: float
    iters: int

    def row(self) -> list:
        fmt = lambda v: "" if v is None else repr(v)
        return [
            self.order,
            self.size,
            self.rank,
            self.noise,
            self.seed,
            fmt(self.error_vs_input),
            fmt(self.error_vs_clean),
            f"{self.solver_ms:.3f}",
            f"{self.total_ms:.3f}",
            self.iters,
        ]


def _run_trial(spec: SweepSpec, value_idx: int, trial: int, noisy: int) -> TrialRecord:
    order, size, rank = spec.params_for(spec.values[value_idx])
    seed = derive_seed(spec.seed, value_idx, trial, noisy)
    t0 = time.perf_counter()
    try:
        clean, _ = generate(GenSpec(order=order, size=size, rank=rank, seed=seed))
        inp = add_noise(clean, spec.noise_prob, derive_seed(seed, _NOISE_TAG)) if noisy else clean
        cfg = HtnConfig(
            rank=rank,
            bmf=BmfConfig(rank=rank, max_iters=spec.max_iters, solver=spec.solver),
            seed=derive_seed(seed, _DECOMP_TAG),
        )
        stats: dict = {}
        tree = decompose(inp, cfg, stats=stats)
        recon = reconstruct(tree)
        return TrialRecord(
            order=order,
            size=size,
            rank=rank,
            noise=noisy,
            seed=seed,
            error_vs_input=error_rate(inp, recon),
            error_vs_clean=error_rate(clean, recon),
            solver_ms=stats["solver_time"] * 1000.0,
            total_ms=(time.perf_counter() - t0) * 1000.0,
            iters=stats["bmf_iters"],
        )
    except Exception:
        log.exception(
            "trial failed (value=%s trial=%d noise=%d)", spec.values[value_idx], trial, noisy
        )
        return TrialRecord(
            order=order,
            size=size,
            rank=rank,
            noise=noisy,
            seed=seed,
            error_vs_input=None,
            error_vs_clean=None,
            solver_ms=0.0,
            total_ms=(time.perf_counter() - t0) * 1000.0,
            iters=0,
        )


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[TrialRecord]:
    """All trials of the sweep, ordered by (value, noise condition, trial)."""
    tasks = [
        (vi, trial, noisy)
        for vi in range(len(spec.values))
        for noisy in spec.noise_flags()
        for trial in range(spec.trials)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_trial_star, [(spec, *t) for t in tasks]))
    return [_run_trial(spec, *t) for t in tasks]


def _trial_star(args):
    spec, vi, trial, noisy = args
    return _run_trial(spec, vi, trial, noisy)


def summarize(records: Iterable[TrialRecord]) -> list[dict]:
    """Per-(swept value, noise) means and standard deviations, stably ordered."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.order, rec.size, rec.rank, rec.noise), []).append(rec)

    def agg(values: list[float]) -> tuple[float, float]:
        return mean(values), stdev(values) if len(values) > 1 else 0.0

    out = []
    for key in sorted(groups):
        recs = groups[key]
        errs_in = [r.error_vs_input for r in recs if r.error_vs_input is not None]
        errs_clean = [r.error_vs_clean for r in recs if r.error_vs_clean is not None]
        times = [r.solver_ms for r in recs]
        row = {
            "order": key[0],
            "size": key[1],
            "rank": key[2],
            "noise": key[3],
            "trials": len(recs),
            "failures": sum(1 for r in recs if r.error_vs_input is None),
        }
        for name, vals in (
            ("error_vs_input", errs_in),
            ("error_vs_clean", errs_clean),
            ("solver_ms", times),
        ):
            m, s = agg(vals) if vals else (float("nan"), float("nan"))
            row[f"{name}_mean"] = m
            row[f"{name}_sd"] = s
        out.append(row)
    return out


def write_csv(records: Iterable[TrialRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for rec in records:
            w.writerow(rec.row())


def plot_sweep(records: list[TrialRecord], spec: SweepSpec, path: str) -> None:
    """Scatter of per-trial values with mean lines; two panels (time, error)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_t, ax_e) = plt.subplots(1, 2, figsize=(10, 4))
    colors = {0: "tab:blue", 1: "tab:red"}
    labels = {0: "clean", 1: "noisy"}
    value_of = {"rank": lambda r: r.rank, "size": lambda r: r.size, "order": lambda r: r.order}[
        spec.vary
    ]
    for noisy in sorted({r.noise for r in records}):
        sel = [r for r in records if r.noise == noisy and r.error_vs_input is not None]
        xs = [value_of(r) for r in sel]
        ax_t.scatter(xs, [r.solver_ms for r in sel], s=12, alpha=0.5, color=colors[noisy])
        ax_e.scatter(xs, [r.error_vs_input for r in sel], s=12, alpha=0.5, color=colors[noisy])
        uniq = sorted(set(xs))
        mean_t = [mean([r.solver_ms for r in sel if value_of(r) == v]) for v in uniq]
        mean_e = [mean([r.error_vs_input for r in sel if value_of(r) == v]) for v in uniq]
        ax_t.plot(uniq, mean_t, color=colors[noisy], label=labels[noisy])
        ax_e.plot(uniq, mean_e, color=colors[noisy], label=labels[noisy])
    ax_t.set_xlabel(spec.vary)
    ax_t.set_ylabel("solver time [ms]")
    ax_e.set_xlabel(spec.vary)
    ax_e.set_ylabel("error rate vs input")
    ax_t.legend()
    ax_e.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
