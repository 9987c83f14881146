"""Classical ground-state search for Ising problems.

Three solvers share the :class:`SolveResult` contract:

* :func:`solve_exhaustive` - exact enumeration, the test oracle.
* :func:`solve_sa` - Metropolis simulated annealing, standing in for an annealer.
* :func:`solve_tabu` - steepest-descent tabu search, the large-problem baseline.

Annealing and tabu kernels are compiled with numba. Each annealing restart
(and each tabu restart) seeds its own Mersenne-Twister stream from
``derive_seed(seed, restart)``, so a run is replayable from its seed and the
best-of-restarts result only improves as restarts are added.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace

import numba as nb
import numpy as np

from .errors import ConfigError, SizeError, SolverError
from .qubo import ENERGY_ATOL, IsingProblem, as_spins, ising_energy

EXHAUSTIVE_MAX_N = 24
BASELINE_EXACT_BELOW = 20
SOLVER_NAMES = ("sa", "tabu", "exact")


def derive_seed(seed: int, *keys) -> int:
    """Derive a 32-bit child seed from ``seed`` and a path of int/str keys."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for k in keys:
        entropy.append(zlib.crc32(k.encode()) if isinstance(k, str) else int(k))
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature schedule.

    ``beta_initial`` and ``beta_final`` are measured in units of the inverse
    largest absolute coefficient of the problem being annealed, so one
    schedule serves problems of any energy scale.
    """

    sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0
    restarts: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise ConfigError("sweeps and restarts must be >= 1")
        if not (0.0 < self.beta_initial <= self.beta_final):
            raise ConfigError("need 0 < beta_initial <= beta_final")

    def betas(self) -> np.ndarray:
        return np.geomspace(self.beta_initial, self.beta_final, self.sweeps)


@dataclass(frozen=True)
class SolveResult:
    config: np.ndarray
    energy: float
    solver_name: str
    evaluations: int

    @classmethod
    def of(cls, p: IsingProblem, config, solver_name: str, evaluations: int) -> SolveResult:
        z = as_spins(config, p.n)
        z.setflags(write=False)
        return cls(z, ising_energy(p, z), solver_name, int(evaluations))

    def check(self, p: IsingProblem) -> None:
        e = ising_energy(p, self.config)
        if abs(e - self.energy) > ENERGY_ATOL:
            raise SolverError(f"stored energy {self.energy} differs from re-evaluation {e}")


# --- exhaustive -----------------------------------------------------------


def _lex_spins(k: int) -> np.ndarray:
    """All 2^k spin rows in lexicographic order (-1 < +1, column 0 most significant)."""
    codes = np.arange(2**k, dtype=np.int64)[:, None]
    bits = (codes >> np.arange(k - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(float)


def solve_exhaustive(p: IsingProblem, tie_atol: float = 1e-12) -> SolveResult:
    """Global minimum by enumeration; ties go to the lexicographically smallest spins.

    Spins are split into a leading block enumerated in an outer loop and a
    trailing block (up to 14 spins) whose energies are evaluated in one
    vectorised pass per outer configuration.
    """
    n = p.n
    if n > EXHAUSTIVE_MAX_N:
        raise SizeError(f"exhaustive search is limited to {EXHAUSTIVE_MAX_N} spins, got {n}")
    s = p.symmetric_couplings()
    b = min(n, 14)
    m = n - b
    lo = slice(m, n)
    zl = _lex_spins(b)
    e_low = 0.5 * np.einsum("ki,ij,kj->k", zl, s[lo, lo], zl) + zl @ p.h[lo]
    if m:
        zh = _lex_spins(m)
        e_high = 0.5 * np.einsum("ki,ij,kj->k", zh, s[:m, :m], zh) + zh @ p.h[:m]
        cross = zh @ s[:m, lo]
    else:
        zh = np.zeros((1, 0))
        e_high = np.zeros(1)
        cross = np.zeros((1, b))

    def block(a):
        return e_high[a] + e_low + zl @ cross[a]

    best = min(block(a).min() for a in range(len(e_high)))
    for a in range(len(e_high)):
        hits = np.flatnonzero(block(a) <= best + tie_atol)
        if hits.size:
            z = np.concatenate([zh[a], zl[hits[0]]])
            return SolveResult.of(p, z.astype(np.int8), "exact", 2**n)
    raise SolverError("exhaustive search found no minimum")  # unreachable for finite input


# --- simulated annealing --------------------------------------------------


@nb.njit(cache=True)
def _anneal(s, h, betas, seeds):
    restarts = seeds.shape[0]
    n = h.shape[0]
    out = np.empty((restarts, n), dtype=np.int8)
    out_e = np.empty(restarts)
    for r in range(restarts):
        np.random.seed(seeds[r])
        z = np.empty(n)
        for i in range(n):
            z[i] = 1.0 if np.random.random() < 0.5 else -1.0
        f = h + s @ z
        e = 0.5 * (z @ (s @ z)) + h @ z
        best = z.copy()
        best_e = e
        for beta in betas:
            for i in range(n):
                de = -2.0 * z[i] * f[i]
                if de <= 0.0 or np.random.random() < np.exp(-beta * de):
                    z[i] = -z[i]
                    f += (2.0 * z[i]) * s[i]
                    e += de
            if e < best_e:
                best_e = e
                best[:] = z
        # zero-temperature quench to the nearest local minimum
        z[:] = best
        f = h + s @ z
        while True:
            k = -1
            low = -1e-12
            for i in range(n):
                de = -2.0 * z[i] * f[i]
                if de < low:
                    low = de
                    k = i
            if k < 0:
                break
            z[k] = -z[k]
            f += (2.0 * z[k]) * s[k]
        for i in range(n):
            out[r, i] = np.int8(z[i])
        out_e[r] = 0.5 * (z @ (s @ z)) + h @ z
    return out, out_e


def solve_sa(p: IsingProblem, s: AnnealSchedule | None = None) -> SolveResult:
    """Best-of-restarts Metropolis annealing with sequential single-spin sweeps."""
    s = s or AnnealSchedule()
    scale = p.scale()
    if scale == 0.0:
        # flat landscape: every configuration is a ground state
        return SolveResult.of(p, -np.ones(p.n, dtype=np.int8), "sa", 0)
    seeds = np.array([derive_seed(s.seed, r) for r in range(s.restarts)], dtype=np.uint32)
    configs, energies = _anneal(p.symmetric_couplings(), p.h.copy(), s.betas() / scale, seeds)
    best = _first_min(energies)
    return SolveResult.of(p, configs[best], "sa", s.restarts * s.sweeps * p.n)


def _first_min(energies: np.ndarray, atol: float = 1e-12) -> int:
    return int(np.flatnonzero(energies <= energies.min() + atol)[0])


# --- tabu search ----------------------------------------------------------


@nb.njit(cache=True)
def _tabu(s, h, max_iter, tenure, seed):
    n = h.shape[0]
    np.random.seed(seed)
    z = np.empty(n)
    for i in range(n):
        z[i] = 1.0 if np.random.random() < 0.5 else -1.0
    f = h + s @ z
    e = 0.5 * (z @ (s @ z)) + h @ z
    best = z.copy()
    best_e = e
    free_at = np.zeros(n, dtype=np.int64)
    for it in range(max_iter):
        k = -1
        low = np.inf
        ties = 0
        for i in range(n):
            de = -2.0 * z[i] * f[i]
            allowed = free_at[i] <= it or e + de < best_e - 1e-12
            if not allowed:
                continue
            if de < low - 1e-15:
                low = de
                k = i
                ties = 1
            elif de <= low + 1e-15:
                ties += 1
                if np.random.random() * ties < 1.0:
                    k = i
        if k < 0:
            break
        z[k] = -z[k]
        f += (2.0 * z[k]) * s[k]
        e += low
        free_at[k] = it + tenure + 1
        if e < best_e - 1e-15:
            best_e = e
            best[:] = z
    out = np.empty(n, dtype=np.int8)
    for i in range(n):
        out[i] = np.int8(best[i])
    return out, best_e


def default_tabu_tenure(n: int) -> int:
    # shorter tenures cycle on small dense instances
    return max(1, min(n - 1, n // 2, 20))


def default_tabu_iterations(n: int) -> int:
    return max(1000, 100 * n)


def solve_tabu(
    p: IsingProblem,
    max_iter: int | None = None,
    tenure: int | None = None,
    seed: int = 0,
    restarts: int = 1,
) -> SolveResult:
    """Steepest single-flip tabu search with aspiration.

    A recently flipped spin stays tabu for ``tenure`` iterations unless
    flipping it would beat the best energy seen so far. Ties between equally
    good moves are broken at random. Each restart starts from a fresh random
    state; the best configuration visited over all restarts is returned.
    """
    n = p.n
    max_iter = default_tabu_iterations(n) if max_iter is None else int(max_iter)
    tenure = default_tabu_tenure(n) if tenure is None else int(tenure)
    if max_iter < 1 or restarts < 1:
        raise ConfigError("max_iter and restarts must be >= 1")
    if n == 1:
        z = np.array([1 if p.h[0] < 0 else -1], dtype=np.int8)
        return SolveResult.of(p, z, "tabu", 1)
    if not (1 <= tenure < n):
        raise ConfigError(f"tabu tenure must satisfy 1 <= tenure < {n}, got {tenure}")
    sym = p.symmetric_couplings()
    runs = [_tabu(sym, p.h.copy(), max_iter, tenure, derive_seed(seed, r)) for r in range(restarts)]
    best = _first_min(np.array([e for _, e in runs]))
    return SolveResult.of(p, runs[best][0], "tabu", max_iter * restarts)


# --- dispatch -------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Solver choice plus hyperparameters; ``solve`` injects the per-call seed."""

    name: str = "sa"
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    tabu_max_iter: int | None = None
    tabu_tenure: int | None = None
    tabu_restarts: int = 1

    def __post_init__(self):
        if self.name not in SOLVER_NAMES:
            raise ConfigError(f"solver must be one of {SOLVER_NAMES}, got {self.name!r}")

    def solve(self, p: IsingProblem, seed: int) -> SolveResult:
        if self.name == "exact":
            return solve_exhaustive(p)
        if self.name == "sa":
            return solve_sa(p, replace(self.schedule, seed=seed))
        tenure = self.tabu_tenure
        if tenure is not None:
            tenure = max(1, min(tenure, p.n - 1))
        return solve_tabu(p, self.tabu_max_iter, tenure, seed, self.tabu_restarts)


def classical_baseline(p: IsingProblem, seed: int = 0, tabu_restarts: int = 4) -> SolveResult:
    """Exact energy below 20 variables, tabu search from 20 upwards."""
    if p.n < BASELINE_EXACT_BELOW:
        return solve_exhaustive(p)
    return solve_tabu(p, seed=seed, restarts=tabu_restarts)
