"""Approximation-ratio tables and return/volatility scatter data."""

from __future__ import annotations

import csv
import logging
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .lssa import (
    METHODS,
    PipelineReport,
    RecombinerConfig,
    approximation_ratio,
    default_ns,
    normalize_method,
    portfolio_ising,
    run_method,
)
from .market import MarketModel, portfolio_stats
from .solvers import SolverConfig, classical_baseline

log = logging.getLogger(__name__)

BENCH_COLUMNS = (
    "n", "ng", "method", "seed", "r_ar", "energy", "classical_energy",
    "ns_mis", "ns_po", "wall_time_ms",
)

__all__ = [
    "BenchmarkSpec",
    "BenchmarkTable",
    "FrontierPoint",
    "approximation_ratio",
    "classical_baseline",
    "frontier_scatter",
    "run_benchmark",
    "write_frontier_csv",
]


@dataclass(frozen=True)
class BenchmarkSpec:
    """Grid of (N, N_g[, N_s]) cells x methods x seeds.

    A cell without an explicit N_s uses ceil(N/2) random samples, the cap used
    for both the random portfolio decomposition and the random MIS stage.
    """

    sizes: tuple[tuple[int, ...], ...]
    methods: tuple[str, ...] = METHODS
    seeds: tuple[int, ...] = (0,)
    solver: SolverConfig = field(default_factory=SolverConfig)
    recombiner: RecombinerConfig = field(default_factory=RecombinerConfig)
    gamma: float = 0.5
    alpha: float = 0.25

    def __post_init__(self):
        if not self.sizes:
            raise ConfigError("benchmark spec needs at least one (N, N_g) size")
        if not self.methods or not self.seeds:
            raise ConfigError("benchmark spec needs at least one method and one seed")
        sizes = tuple(tuple(int(v) for v in s) for s in self.sizes)
        for s in sizes:
            if len(s) not in (2, 3) or not (1 <= s[1] <= s[0]):
                raise ConfigError(f"size {s} must be (N, N_g) or (N, N_g, N_s) with 1 <= N_g <= N")
        methods = tuple(normalize_method(m) for m in self.methods)
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {METHODS}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))


@dataclass
class BenchmarkTable:
    rows: list[dict]

    def summary(self) -> list[dict]:
        """Median and best r_ar per (N, N_g, method), with the median sample counts."""
        cells: dict[tuple, list[dict]] = {}
        for r in self.rows:
            cells.setdefault((r["n"], r["ng"], r["method"]), []).append(r)
        out = []
        for (n, ng, method), rs in cells.items():
            ratios = [r["r_ar"] for r in rs if r["r_ar"] is not None]
            out.append({
                "tick": f"{n}-{ng}",
                "n": n,
                "ng": ng,
                "method": method,
                "median_r_ar": statistics.median(ratios) if ratios else None,
                "best_r_ar": max(ratios) if ratios else None,
                "ns_po": statistics.median(r["ns_po"] for r in rs),
                "ns_mis": statistics.median(r["ns_mis"] for r in rs) if rs[0]["ns_mis"] is not None else None,
            })
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: ("" if r[k] is None else r[k]) for k in BENCH_COLUMNS})


def run_benchmark(spec: BenchmarkSpec, market: MarketModel) -> BenchmarkTable:
    """Run every (size, method, seed) cell on the first N assets of ``market``."""
    largest = max(s[0] for s in spec.sizes)
    if market.n < largest:
        raise DataError(f"market has {market.n} assets, benchmark needs {largest}")
    rows = []
    baselines: dict[int, float] = {}
    for size in spec.sizes:
        n, n_g = size[0], size[1]
        n_s = size[2] if len(size) == 3 else default_ns(n)
        m = market.subset(range(n))
        if n not in baselines:
            baselines[n] = classical_baseline(portfolio_ising(m, spec.gamma)).energy
        for method in spec.methods:
            for seed in spec.seeds:
                rep = run_method(
                    method, m,
                    gamma=spec.gamma, alpha=spec.alpha, n_g=n_g, n_s=n_s,
                    solver=spec.solver, recombiner=spec.recombiner,
                    seed=seed, classical_energy=baselines[n],
                )
                rows.append({
                    "n": n,
                    "ng": n_g,
                    "method": method,
                    "seed": seed,
                    "r_ar": rep.r_ar,
                    "energy": rep.energy,
                    "classical_energy": rep.classical_energy,
                    "ns_mis": rep.samples.get("mis"),
                    "ns_po": rep.samples.get("po"),
                    "wall_time_ms": round(rep.wall_time_ms, 3),
                })
    return BenchmarkTable(rows)


@dataclass(frozen=True)
class FrontierPoint:
    ret: float
    volatility: float
    label: str


def frontier_scatter(
    m: MarketModel,
    n_random: int = 5000,
    seed: int = 0,
    reports: Sequence[PipelineReport] = (),
) -> list[FrontierPoint]:
    """Random equal-weight portfolios, single assets and the reports' selections.

    Random selections are uniform over non-empty subsets: all-zero draws are
    redrawn.
    """
    if n_random < 0:
        raise ConfigError("n_random must be >= 0")
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(n_random):
        x = rng.integers(0, 2, m.n)
        while not x.any():
            x = rng.integers(0, 2, m.n)
        points.append(FrontierPoint(*portfolio_stats(m, x), "random"))
    for i in range(m.n):
        x = np.zeros(m.n, dtype=np.int8)
        x[i] = 1
        points.append(FrontierPoint(*portfolio_stats(m, x), "asset"))
    for rep in reports:
        if not np.any(rep.selected):
            log.warning("report %s selected no assets; skipped", rep.method)
            continue
        points.append(FrontierPoint(*portfolio_stats(m, rep.selected), rep.method))
    return points


def write_frontier_csv(points: Iterable[FrontierPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "return", "volatility"])
        for p in points:
            w.writerow([p.label, repr(p.ret), repr(p.volatility)])
