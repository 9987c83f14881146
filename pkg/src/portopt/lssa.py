"""Sub-system sampling, solving and recombination for decomposed Ising problems.

Three sampling strategies are provided:

``random``      uniform sub-systems with a per-variable coverage floor;
``mis``         one sub-system per placeholder asset of a maximal independent
                set of the market graph, holding the placeholder and its most
                correlated neighbours;
``mis_random``  the same, but the independent set itself is found by a
                randomly sampled decomposition of the MIS QUBO.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, CoverageError, UndefinedRatioError
from .graph import IndependentSet, MarketGraph, build_market_graph, mis_qubo, repair_independent_set
from .market import MarketModel, PortfolioConfig, build_portfolio_qubo
from .qubo import IsingProblem, ising_energy, qubo_to_ising, restrict, spins_to_binary
from .recombine import SAMPLED_SHOTS, SubsystemSolution, optimize_coefficients
from .solvers import SolverConfig, classical_baseline, derive_seed

METHODS = ("lssa_random", "lssa_mis", "lssa_mis_random")


def normalize_method(name: str) -> str:
    return name.strip().lower().replace("-", "_")


@dataclass(frozen=True)
class SamplePlan:
    subsystems: tuple[tuple[int, ...], ...]
    n: int
    n_g: int
    method: str

    def __post_init__(self):
        subs = tuple(tuple(int(i) for i in s) for s in self.subsystems)
        object.__setattr__(self, "subsystems", subs)
        covered = np.zeros(self.n, dtype=bool)
        for s in subs:
            if not s or len(s) > self.n_g or len(set(s)) != len(s):
                raise ConfigError(f"sub-system {s} must hold 1..{self.n_g} distinct indices")
            if min(s) < 0 or max(s) >= self.n:
                raise ConfigError(f"sub-system {s} has an index outside 0..{self.n - 1}")
            covered[list(s)] = True
        if not covered.all():
            raise CoverageError(f"plan leaves variables uncovered: {np.flatnonzero(~covered).tolist()}")

    @property
    def n_s(self) -> int:
        return len(self.subsystems)

    def counts(self) -> np.ndarray:
        """How many sub-systems contain each variable."""
        c = np.zeros(self.n, dtype=int)
        for s in self.subsystems:
            c[list(s)] += 1
        return c


@dataclass(frozen=True)
class RecombinerConfig:
    layers: int = 2
    budget: int = 200
    shots: int | None = None  # None = exact amplitudes; SAMPLED_SHOTS for the sampled setting
    seed: int | None = None  # None = derive from the pipeline seed

    def __post_init__(self):
        if self.layers < 1 or self.budget < 1:
            raise ConfigError("vqe layers and budget must be >= 1")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("vqe shots must be positive or None for exact amplitudes")


@dataclass
class PipelineReport:
    method: str
    selected: np.ndarray
    energy: float
    classical_energy: float | None
    r_ar: float | None
    samples: dict[str, int | None]
    seed: int
    wall_time_ms: float = 0.0
    placeholders: list[int] | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "selected": [int(v) for v in self.selected],
            "energy": self.energy,
            "classical_energy": self.classical_energy,
            "r_ar": self.r_ar,
            "samples": dict(self.samples),
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
            "placeholders": self.placeholders,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> PipelineReport:
        return cls(
            method=d["method"],
            selected=np.asarray(d["selected"], dtype=np.int8),
            energy=d["energy"],
            classical_energy=d.get("classical_energy"),
            r_ar=d.get("r_ar"),
            samples=dict(d.get("samples", {})),
            seed=d.get("seed", 0),
            wall_time_ms=d.get("wall_time_ms", 0.0),
            placeholders=d.get("placeholders"),
            config=d.get("config", {}),
        )


def approximation_ratio(method_energy: float, classical_energy: float) -> float:
    """Method ground-state energy over the classical ground-state energy."""
    if not classical_energy < 0.0:
        raise UndefinedRatioError(
            f"approximation ratio needs a negative baseline energy, got {classical_energy}"
        )
    return method_energy / classical_energy


# --- sampling -------------------------------------------------------------


def sample_random(n: int, n_g: int, n_s: int, seed: int = 0) -> SamplePlan:
    """``n_s`` random sub-systems of ``n_g`` distinct variables each.

    Sub-systems are consecutive chunks of a stream of independent shuffles of
    0..n-1. A chunk that would straddle two shuffles keeps the tail of the
    old one and is topped up with the first variables of the next shuffle it
    does not already hold; those are moved to the front of the new shuffle,
    so every shuffle is still consumed exactly once. With q = n_s*n_g // n
    complete shuffles consumed, each variable appears at least q times.
    """
    if not (1 <= n_g <= n):
        raise ConfigError(f"need 1 <= n_g <= n, got n_g={n_g}, n={n}")
    if n_s < 1 or n_s * n_g < n:
        raise CoverageError(f"n_s*n_g = {n_s * n_g} cannot cover {n} variables")
    rng = np.random.default_rng(seed)
    pool: list[int] = []
    subs = []
    for _ in range(n_s):
        if len(pool) >= n_g:
            chunk, pool = pool[:n_g], pool[n_g:]
        else:
            chunk = pool
            fresh = [int(v) for v in rng.permutation(n)]
            held = set(chunk)
            take = [v for v in fresh if v not in held][: n_g - len(chunk)]
            taken = set(take)
            chunk = chunk + take
            pool = [v for v in fresh if v not in taken]
        subs.append(tuple(sorted(chunk)))
    return SamplePlan(tuple(subs), n, n_g, "random")


def sample_mis(g: MarketGraph, mis: IndependentSet, n_g: int) -> SamplePlan:
    """Placeholder groups: each MIS member plus its strongest neighbours, at most ``n_g``.

    Variables dropped by the size cap (or never adjacent to a placeholder) are
    collected into overflow sub-systems keyed by their highest-weight covered
    neighbour; when ``n_g >= 2`` that neighbour is included so the overflow
    group keeps its strongest coupling into the covered part.
    """
    if n_g < 1:
        raise ConfigError("n_g must be >= 1")
    w = g.weights
    adj = g.adjacency
    groups = []
    for v in mis.members:
        nbrs = sorted(g.neighbors(v), key=lambda u: (-w[v, u], u))
        groups.append(tuple(sorted([v, *nbrs][:n_g])))
    covered = np.zeros(g.n, dtype=bool)
    for grp in groups:
        covered[list(grp)] = True

    anchors: dict[int | None, list[int]] = {}
    for u in np.flatnonzero(~covered):
        cand = [int(t) for t in np.flatnonzero(adj[u] & covered)]
        key = max(cand, key=lambda t: (w[u, t], -t)) if cand else None
        anchors.setdefault(key, []).append(int(u))
    for key in sorted(anchors, key=lambda k: (k is None, k if k is not None else 0)):
        members = anchors[key]
        with_anchor = key is not None and n_g >= 2
        room = n_g - 1 if with_anchor else n_g
        for k in range(0, len(members), room):
            part = members[k : k + room]
            groups.append(tuple(sorted(([key] if with_anchor else []) + part)))
    return SamplePlan(tuple(groups), g.n, n_g, "mis")


# --- solving --------------------------------------------------------------


@dataclass
class DecomposedSolution:
    config: np.ndarray
    energy: float
    n_s: int
    subsystems: list[SubsystemSolution]


def _dedupe(subsystems: Sequence[tuple[int, ...]]) -> list[tuple[int, ...]]:
    seen = set()
    out = []
    for s in subsystems:
        key = tuple(sorted(s))
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def solve_decomposed(
    p: IsingProblem,
    plan: SamplePlan,
    solver: SolverConfig,
    recombiner: RecombinerConfig,
    seed: int,
    stage: str = "po",
) -> DecomposedSolution:
    """Solve each distinct sub-system of ``plan`` and recombine with the sign rule.

    Identical sub-systems are solved once. Seeds for sub-system ``i`` and for
    the recombiner derive from (seed, stage, i) and (seed, stage + "-vqe").
    """
    if plan.n != p.n:
        raise ConfigError(f"plan is for {plan.n} variables, problem has {p.n}")
    sols = []
    for i, sites in enumerate(_dedupe(plan.subsystems)):
        res = solver.solve(restrict(p, sites), derive_seed(seed, stage, i))
        sols.append(SubsystemSolution.embed(p.n, sites, res.config, res.energy))
    rec = optimize_coefficients(
        sols,
        p,
        budget=recombiner.budget,
        shots=recombiner.shots,
        seed=derive_seed(seed if recombiner.seed is None else recombiner.seed, stage + "-vqe"),
        layers=recombiner.layers,
    )
    return DecomposedSolution(rec.config, rec.energy, len(sols), sols)


def _finish(
    method: str,
    p: IsingProblem,
    sol: DecomposedSolution,
    seed: int,
    started: float,
    samples: dict,
    classical_energy: float | None,
    placeholders=None,
) -> PipelineReport:
    if classical_energy is None:
        classical_energy = classical_baseline(p).energy
    r_ar = approximation_ratio(sol.energy, classical_energy) if classical_energy < 0 else None
    return PipelineReport(
        method=method,
        selected=spins_to_binary(sol.config),
        energy=ising_energy(p, sol.config),
        classical_energy=float(classical_energy),
        r_ar=r_ar,
        samples=samples,
        seed=int(seed),
        wall_time_ms=(time.perf_counter() - started) * 1000.0,
        placeholders=placeholders,
    )


def run_lssa(
    p: IsingProblem,
    plan: SamplePlan,
    solver: SolverConfig | None = None,
    recombiner: RecombinerConfig | None = None,
    seed: int = 0,
    classical_energy: float | None = None,
    method: str = "lssa_random",
) -> PipelineReport:
    """Decompose, solve and recombine ``p`` according to ``plan``.

    ``classical_energy`` is the reference for the approximation ratio; when
    omitted it is computed by :func:`portopt.solvers.classical_baseline`.
    """
    started = time.perf_counter()
    sol = solve_decomposed(p, plan, solver or SolverConfig(), recombiner or RecombinerConfig(), seed)
    return _finish(method, p, sol, seed, started, {"mis": None, "po": sol.n_s}, classical_energy)


def portfolio_ising(m: MarketModel, gamma: float) -> IsingProblem:
    return qubo_to_ising(build_portfolio_qubo(m, PortfolioConfig(gamma)))


def default_ns(n: int) -> int:
    """Sample cap of N/2 (rounded up)."""
    return math.ceil(n / 2)


def run_random_portfolio(
    m: MarketModel,
    gamma: float = 0.5,
    n_g: int | None = None,
    n_s: int | None = None,
    solver: SolverConfig | None = None,
    recombiner: RecombinerConfig | None = None,
    seed: int = 0,
    classical_energy: float | None = None,
) -> PipelineReport:
    """Plain random-sampling decomposition of the portfolio problem."""
    n_g = n_g or default_ns(m.n)
    n_s = n_s or default_ns(m.n)
    plan = sample_random(m.n, n_g, n_s, derive_seed(seed, "plan"))
    return run_lssa(portfolio_ising(m, gamma), plan, solver, recombiner, seed, classical_energy)


def _placeholder_stage(
    m: MarketModel,
    g: MarketGraph,
    mis: IndependentSet,
    gamma: float,
    n_g: int,
    solver: SolverConfig,
    recombiner: RecombinerConfig,
    seed: int,
    started: float,
    method: str,
    mis_samples: int,
    classical_energy: float | None,
) -> PipelineReport:
    p = portfolio_ising(m, gamma)
    plan = sample_mis(g, mis, n_g)
    sol = solve_decomposed(p, plan, solver, recombiner, seed, stage="po")
    return _finish(
        method, p, sol, seed, started, {"mis": mis_samples, "po": sol.n_s}, classical_energy, list(mis.members)
    )


def run_mis_portfolio(
    m: MarketModel,
    alpha: float = 0.25,
    gamma: float = 0.5,
    n_g: int | None = None,
    solver: SolverConfig | None = None,
    recombiner: RecombinerConfig | None = None,
    seed: int = 0,
    classical_energy: float | None = None,
) -> PipelineReport:
    """Level 1: solve the market-graph MIS whole, then decompose around its members."""
    started = time.perf_counter()
    solver = solver or SolverConfig()
    recombiner = recombiner or RecombinerConfig()
    n_g = n_g or default_ns(m.n)
    g = build_market_graph(m, alpha)
    res = solver.solve(qubo_to_ising(mis_qubo(g)), derive_seed(seed, "mis", 0))
    mis = repair_independent_set(g, spins_to_binary(res.config))
    return _placeholder_stage(
        m, g, mis, gamma, n_g, solver, recombiner, seed, started, "lssa_mis", 1, classical_energy
    )


def run_mis_random_portfolio(
    m: MarketModel,
    alpha: float = 0.25,
    gamma: float = 0.5,
    n_g: int | None = None,
    n_s_mis: int | None = None,
    solver: SolverConfig | None = None,
    recombiner: RecombinerConfig | None = None,
    seed: int = 0,
    classical_energy: float | None = None,
) -> PipelineReport:
    """Level 2: the MIS QUBO is itself decomposed by random sampling before the placeholder stage."""
    started = time.perf_counter()
    solver = solver or SolverConfig()
    recombiner = recombiner or RecombinerConfig()
    n_g = n_g or default_ns(m.n)
    n_s_mis = n_s_mis or default_ns(m.n)
    g = build_market_graph(m, alpha)
    plan = sample_random(m.n, n_g, n_s_mis, derive_seed(seed, "mis-plan"))
    sol = solve_decomposed(qubo_to_ising(mis_qubo(g)), plan, solver, recombiner, seed, stage="mis")
    mis = repair_independent_set(g, spins_to_binary(sol.config))
    return _placeholder_stage(
        m, g, mis, gamma, n_g, solver, recombiner, seed, started, "lssa_mis_random", sol.n_s, classical_energy
    )


def run_method(
    method: str,
    m: MarketModel,
    *,
    gamma: float = 0.5,
    alpha: float = 0.25,
    n_g: int | None = None,
    n_s: int | None = None,
    solver: SolverConfig | None = None,
    recombiner: RecombinerConfig | None = None,
    seed: int = 0,
    classical_energy: float | None = None,
) -> PipelineReport:
    """Dispatch by method label; ``n_s`` is the random-sampling count of the method."""
    method = normalize_method(method)
    if method == "lssa_random":
        return run_random_portfolio(m, gamma, n_g, n_s, solver, recombiner, seed, classical_energy)
    if method == "lssa_mis":
        return run_mis_portfolio(m, alpha, gamma, n_g, solver, recombiner, seed, classical_energy)
    if method == "lssa_mis_random":
        return run_mis_random_portfolio(m, alpha, gamma, n_g, n_s, solver, recombiner, seed, classical_energy)
    raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")


__all__ = [
    "METHODS",
    "SAMPLED_SHOTS",
    "PipelineReport",
    "RecombinerConfig",
    "SamplePlan",
    "SubsystemSolution",
    "approximation_ratio",
    "run_lssa",
    "run_method",
    "run_mis_portfolio",
    "run_mis_random_portfolio",
    "run_random_portfolio",
    "sample_mis",
    "sample_random",
    "solve_decomposed",
]
