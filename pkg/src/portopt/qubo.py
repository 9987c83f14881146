"""QUBO and Ising problem representations, conversions and energies.

Conventions
-----------
QUBO:   E(x) = x^T Q x + offset,  x in {0, 1}^n, Q symmetric. Because
        x_i^2 = x_i the diagonal of Q holds the linear coefficients.
Ising:  E(z) = sum_{i<j} J_ij z_i z_j + sum_i h_i z_i + offset,
        z in {-1, +1}^n, J strictly upper triangular.

The two are linked by z = 2x - 1. Offsets are always carried so that energies,
not only minimisers, agree across formulations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, DimensionError

ENERGY_ATOL = 1e-9
_SYMMETRY_ATOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuboProblem:
    """Binary quadratic model with a symmetric coefficient matrix."""

    q: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        q = _frozen(self.q)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
            raise DimensionError(f"q must be a non-empty square matrix, got shape {q.shape}")
        if not np.allclose(q, q.T, rtol=0.0, atol=_SYMMETRY_ATOL):
            raise DataError("q must be symmetric")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @classmethod
    def from_matrix(cls, q, offset: float = 0.0) -> QuboProblem:
        """Build from an arbitrary square matrix by symmetrising it.

        ``x^T Q x`` is unchanged by symmetrisation, so upper-triangular
        inputs are accepted as well.
        """
        q = np.asarray(q, dtype=float)
        return cls((q + q.T) / 2.0, offset)

    def to_dict(self) -> dict:
        return {"n": self.n, "q": self.q.tolist(), "offset": self.offset}

    @classmethod
    def from_dict(cls, d: dict) -> QuboProblem:
        p = cls(np.asarray(d["q"], dtype=float), d.get("offset", 0.0))
        if int(d["n"]) != p.n:
            raise DimensionError(f"n={d['n']} does not match q of size {p.n}")
        return p


@dataclass(frozen=True)
class IsingProblem:
    """Spin model with strictly upper-triangular couplings ``j`` and fields ``h``."""

    j: np.ndarray
    h: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        j = _frozen(self.j)
        h = _frozen(np.ravel(self.h))
        n = h.shape[0]
        if n < 1:
            raise DimensionError("an Ising problem needs at least one spin")
        if j.shape != (n, n):
            raise DimensionError(f"j has shape {j.shape}, expected {(n, n)}")
        if np.any(np.tril(j) != 0.0):
            raise DataError("j must be strictly upper triangular")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @classmethod
    def from_couplings(cls, j, h, offset: float = 0.0) -> IsingProblem:
        """Fold an arbitrary coupling matrix onto its upper triangle.

        J_ij and J_ji both multiply z_i z_j, so they are summed; the diagonal
        contributes the constant z_i^2 = 1 and moves into the offset.
        """
        j = np.asarray(j, dtype=float)
        upper = np.triu(j, 1) + np.tril(j, -1).T
        return cls(upper, h, offset + float(np.trace(j)))

    def symmetric_couplings(self) -> np.ndarray:
        """Return J + J^T, the matrix whose row i gives the local field of spin i."""
        return self.j + self.j.T

    def scale(self) -> float:
        """Largest absolute coefficient, 0.0 for an empty Hamiltonian."""
        return float(max(np.max(np.abs(self.j)), np.max(np.abs(self.h))))

    def to_dict(self) -> dict:
        rows, cols = np.nonzero(self.j)
        return {
            "n": self.n,
            "j": [[int(r), int(c), float(self.j[r, c])] for r, c in zip(rows, cols)],
            "h": self.h.tolist(),
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> IsingProblem:
        n = int(d["n"])
        h = np.asarray(d["h"], dtype=float)
        if h.shape != (n,):
            raise DimensionError(f"h has {h.size} entries, expected {n}")
        j = np.zeros((n, n))
        for r, c, v in d.get("j", []):
            r, c = int(r), int(c)
            if not (0 <= r < c < n):
                raise DataError(f"coupling index ({r}, {c}) is not strictly upper triangular")
            j[r, c] += float(v)
        return cls(j, h, d.get("offset", 0.0))


def as_spins(z, n: int | None = None) -> np.ndarray:
    """Validate and return a spin vector as an int8 array."""
    z = np.asarray(z)
    if z.ndim != 1:
        raise DimensionError(f"spin configuration must be 1-D, got shape {z.shape}")
    if n is not None and z.shape[0] != n:
        raise DimensionError(f"spin configuration has length {z.shape[0]}, expected {n}")
    if not np.all((z == 1) | (z == -1)):
        raise DataError("spin entries must be -1 or +1")
    return z.astype(np.int8)


def as_binary(x, n: int | None = None) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1:
        raise DimensionError(f"binary vector must be 1-D, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise DimensionError(f"binary vector has length {x.shape[0]}, expected {n}")
    if not np.all((x == 0) | (x == 1)):
        raise DataError("binary entries must be 0 or 1")
    return x.astype(np.int8)


def spins_to_binary(z) -> np.ndarray:
    return ((np.asarray(z) + 1) // 2).astype(np.int8)


def binary_to_spins(x) -> np.ndarray:
    return (2 * np.asarray(x) - 1).astype(np.int8)


def qubo_to_ising(p: QuboProblem) -> IsingProblem:
    """Substitute x = (z + 1) / 2 into a QUBO.

    A pair term c x_i x_j (c = Q_ij + Q_ji) expands to
    c/4 (z_i z_j + z_i + z_j + 1); a linear term Q_ii x_i to Q_ii/2 (z_i + 1).
    """
    q = p.q
    diag = np.diag(q)
    pair = np.triu(2.0 * q, 1)  # full coefficient of x_i x_j, i < j
    j = pair / 4.0
    row_sums = pair.sum(axis=1) + pair.sum(axis=0)
    h = diag / 2.0 + row_sums / 4.0
    offset = p.offset + diag.sum() / 2.0 + pair.sum() / 4.0
    return IsingProblem(j, h, offset)


def ising_to_qubo(p: IsingProblem) -> QuboProblem:
    """Substitute z = 2x - 1 into an Ising model.

    J z_i z_j = J (4 x_i x_j - 2 x_i - 2 x_j + 1) and h z_i = 2 h x_i - h.
    """
    j = p.j
    couplings = j + j.T
    q = 2.0 * couplings
    np.fill_diagonal(q, 2.0 * p.h - 2.0 * couplings.sum(axis=1))
    offset = p.offset + j.sum() - p.h.sum()
    return QuboProblem(q, offset)


def qubo_energy(p: QuboProblem, x) -> float:
    x = as_binary(x, p.n).astype(float)
    return float(x @ p.q @ x) + p.offset


def ising_energy(p: IsingProblem, z) -> float:
    z = as_spins(z, p.n).astype(float)
    return float(z @ p.j @ z + p.h @ z) + p.offset


def ising_energies(p: IsingProblem, zs: np.ndarray) -> np.ndarray:
    """Energies for a batch of spin rows, shape (m, n) -> (m,). No validation."""
    zs = np.asarray(zs, dtype=float)
    return np.einsum("ki,ij,kj->k", zs, p.j, zs) + zs @ p.h + p.offset


def qubo_energies(p: QuboProblem, xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    return np.einsum("ki,ij,kj->k", xs, p.q, xs) + p.offset


def restrict(p: IsingProblem, sites: Sequence[int]) -> IsingProblem:
    """Sub-Hamiltonian on ``sites`` (in the given order), offset dropped.

    Couplings to spins outside ``sites`` are discarded, not absorbed into
    fields: the sub-system is solved as if the rest of the system were absent.
    """
    idx = np.asarray(list(sites), dtype=int)
    if idx.ndim != 1 or idx.size == 0:
        raise IndexError("sites must be a non-empty index list")
    if np.any(idx < 0) or np.any(idx >= p.n):
        raise IndexError(f"site index out of range for a {p.n}-spin problem")
    if np.unique(idx).size != idx.size:
        raise IndexError("duplicate site index")
    sub = p.symmetric_couplings()[np.ix_(idx, idx)]
    return IsingProblem(np.triu(sub, 1), p.h[idx], 0.0)
