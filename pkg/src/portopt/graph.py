"""Thresholded correlation graph and its maximum-independent-set QUBO."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, IndependenceViolation
from .market import MarketModel
from .qubo import QuboProblem, as_binary

MIS_PENALTY = 2.0


@dataclass(frozen=True)
class MarketGraph:
    """Undirected graph over assets; ``weight`` maps (i, j), i < j, to |corr_ij|."""

    n: int
    weight: dict[tuple[int, int], float]
    alpha: float = 0.0
    _adj: np.ndarray = field(init=False, repr=False, compare=False)
    _mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clean: dict[tuple[int, int], float] = {}
        for (i, j), w in self.weight.items():
            i, j = int(i), int(j)
            if i == j:
                raise DataError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise DataError(f"edge ({i}, {j}) outside a {self.n}-vertex graph")
            key = (min(i, j), max(i, j))
            if key in clean:
                raise DataError(f"edge {key} listed twice")
            clean[key] = float(w)
        object.__setattr__(self, "weight", dict(sorted(clean.items())))
        adj = np.zeros((self.n, self.n))
        mask = np.zeros((self.n, self.n), dtype=bool)
        for (i, j), w in clean.items():
            adj[i, j] = adj[j, i] = w
            mask[i, j] = mask[j, i] = True
        adj.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_mask", mask)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(self.weight)

    @property
    def adjacency(self) -> np.ndarray:
        """Boolean adjacency matrix."""
        return self._mask

    @property
    def weights(self) -> np.ndarray:
        """Dense |corr| matrix, 0 where there is no edge."""
        return self._adj

    def neighbors(self, v: int) -> list[int]:
        return [int(u) for u in np.flatnonzero(self._mask[v])]

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self._mask[i, j])

    def degrees(self) -> np.ndarray:
        return self._mask.sum(axis=1)

    def density(self) -> float:
        possible = self.n * (self.n - 1) / 2
        return len(self.weight) / possible if possible else 0.0

    def to_edgelist(self) -> str:
        lines = [f"# {self.n} {self.alpha!r}"]
        lines += [f"{i} {j} {w!r}" for (i, j), w in self.weight.items()]
        return "\n".join(lines) + "\n"

    def write_edgelist(self, path) -> None:
        Path(path).write_text(self.to_edgelist())

    @classmethod
    def from_edgelist(cls, text: str) -> MarketGraph:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise DataError("edge list must start with a '# n alpha' header")
        n_str, alpha_str = lines[0][1:].split()
        weight = {}
        for ln in lines[1:]:
            i, j, w = ln.split()
            weight[(int(i), int(j))] = float(w)
        return cls(int(n_str), weight, float(alpha_str))


@dataclass(frozen=True)
class IndependentSet:
    members: tuple[int, ...]
    maximal: bool

    def __len__(self):
        return len(self.members)

    def as_binary(self, n: int) -> np.ndarray:
        x = np.zeros(n, dtype=np.int8)
        x[list(self.members)] = 1
        return x


def build_market_graph(m: MarketModel, alpha: float = 0.25) -> MarketGraph:
    """Edge between i != j iff |corr_ij| >= alpha."""
    if not (0.0 <= alpha <= 1.0):
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    a = np.abs(m.corr)
    iu, ju = np.triu_indices(m.n, 1)
    keep = a[iu, ju] >= alpha
    weight = {(int(i), int(j)): float(a[i, j]) for i, j in zip(iu[keep], ju[keep])}
    return MarketGraph(m.n, weight, float(alpha))


def mis_qubo(g: MarketGraph) -> QuboProblem:
    """H = -sum x_i + 2 sum_{(i,j) in E} x_i x_j as a symmetric QUBO."""
    q = np.zeros((g.n, g.n))
    for i, j in g.edges:
        q[i, j] = q[j, i] = MIS_PENALTY / 2.0
    np.fill_diagonal(q, -1.0)
    return QuboProblem(q, 0.0)


def _is_maximal(g: MarketGraph, chosen: np.ndarray) -> bool:
    blocked = chosen.astype(bool) | (g.adjacency.astype(int) @ chosen > 0)
    return bool(blocked.all())


def validate_independent_set(g: MarketGraph, s) -> IndependentSet:
    """Check that selection ``s`` is independent in ``g`` and report maximality.

    Raises :class:`IndependenceViolation` naming the first adjacent pair.
    """
    x = as_binary(s, g.n)
    for i, j in g.edges:
        if x[i] and x[j]:
            raise IndependenceViolation((i, j))
    return IndependentSet(tuple(int(v) for v in np.flatnonzero(x)), _is_maximal(g, x))


def repair_independent_set(g: MarketGraph, s) -> IndependentSet:
    """Turn any selection into a maximal independent set.

    Violated edges are resolved by dropping the lower-degree endpoint (the
    higher index on ties), then free vertices are added in order of
    increasing degree until no vertex can be added.
    """
    x = as_binary(s, g.n).copy()
    deg = g.degrees()
    for i, j in g.edges:
        if x[i] and x[j]:
            drop = i if (deg[i], -i) < (deg[j], -j) else j
            x[drop] = 0
    adj = g.adjacency
    for v in sorted(range(g.n), key=lambda v: (deg[v], v)):
        if not x[v] and not np.any(x[adj[v]]):
            x[v] = 1
    return validate_independent_set(g, x)
