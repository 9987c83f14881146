"""Amplitude-weighted recombination of sub-system ground states.

The N_s combination weights are the first N_s amplitudes of a real
``ceil(log2 N_s)``-qubit state prepared by a layered RY + CNOT-chain circuit.
The circuit angles are tuned with COBYLA to minimise the full-problem energy
of ``sign(sum_i c_i * partial_i)``.

Basis states are little-endian: qubit q is bit q of the amplitude index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError, DegenerateEncodingError, RecombinationError
from .qubo import IsingProblem, ising_energy

SAMPLED_SHOTS = 2048


@dataclass(frozen=True)
class SubsystemSolution:
    """Ground state of one sub-system embedded in the full variable space.

    ``partial`` is +1/-1 on ``sites`` and 0 elsewhere.
    """

    sites: tuple[int, ...]
    partial: np.ndarray
    energy: float

    def __post_init__(self):
        partial = np.array(self.partial, dtype=np.int8)
        sites = tuple(int(s) for s in self.sites)
        support = tuple(int(i) for i in np.flatnonzero(partial))
        if support != tuple(sorted(sites)) or not np.all(np.abs(partial[list(sites)]) == 1):
            raise ConfigError("partial configuration must be +/-1 exactly on its sites")
        partial.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "partial", partial)
        object.__setattr__(self, "energy", float(self.energy))

    @classmethod
    def embed(cls, n: int, sites: Sequence[int], spins, energy: float) -> SubsystemSolution:
        partial = np.zeros(n, dtype=np.int8)
        partial[list(sites)] = spins
        return cls(tuple(sites), partial, energy)


@dataclass(frozen=True)
class AnsatzParams:
    theta: np.ndarray
    layers: int
    n_qubits: int

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).ravel()
        if self.layers < 1 or self.n_qubits < 0:
            raise ConfigError("need layers >= 1 and n_qubits >= 0")
        if theta.size != self.layers * self.n_qubits:
            raise ConfigError(
                f"theta has {theta.size} angles, expected layers*n_qubits = {self.layers * self.n_qubits}"
            )
        object.__setattr__(self, "theta", theta)


def qubits_for(n_s: int) -> int:
    """Number of qubits whose amplitudes can hold ``n_s`` coefficients."""
    if n_s < 1:
        raise ConfigError("need at least one coefficient")
    return math.ceil(math.log2(n_s)) if n_s > 1 else 0


def _apply_ry(psi: np.ndarray, axis: int, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    a0 = np.take(psi, 0, axis=axis)
    a1 = np.take(psi, 1, axis=axis)
    return np.stack([c * a0 - s * a1, s * a0 + c * a1], axis=axis)


def _apply_cnot(psi: np.ndarray, control_axis: int, target_axis: int) -> np.ndarray:
    out = psi.copy()
    idx1 = [slice(None)] * psi.ndim
    idx1[control_axis] = 1
    sub = psi[tuple(idx1)]
    t = target_axis if target_axis < control_axis else target_axis - 1
    out[tuple(idx1)] = np.flip(sub, axis=t)
    return out


def simulate_ansatz(p: AnsatzParams) -> np.ndarray:
    """Real statevector of ``layers`` x (RY on every qubit, then CNOT(q, q+1) chain)."""
    n = p.n_qubits
    if n == 0:
        return np.ones(1)
    psi = np.zeros((2,) * n)
    psi[(0,) * n] = 1.0
    theta = p.theta.reshape(p.layers, n)
    axis = lambda q: n - 1 - q  # noqa: E731  C-order puts the highest qubit first
    for layer in theta:
        for q, angle in enumerate(layer):
            psi = _apply_ry(psi, axis(q), angle)
        for q in range(n - 1):
            psi = _apply_cnot(psi, axis(q), axis(q + 1))
    return psi.reshape(-1)


def amplitudes_to_coefficients(
    v: np.ndarray,
    n_s: int,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Read ``n_s`` normalised combination weights from a statevector.

    With ``shots=None`` the leading amplitudes are used directly. Otherwise
    magnitudes are estimated as sqrt(count / shots) from a multinomial sample
    over all basis states; the sign of each weight is copied from the exact
    amplitude, since sampling alone cannot reveal it.
    """
    v = np.asarray(v, dtype=float)
    if n_s < 1 or n_s > v.size:
        raise ConfigError(f"cannot read {n_s} coefficients from {v.size} amplitudes")
    if n_s == 1:
        return np.ones(1)
    if shots is None:
        c = v[:n_s].copy()
    else:
        if shots < 1:
            raise ConfigError("shots must be a positive integer")
        rng = rng if rng is not None else np.random.default_rng()
        probs = v**2
        counts = rng.multinomial(shots, probs / probs.sum())
        c = np.sqrt(counts[:n_s] / shots) * np.where(v[:n_s] < 0, -1.0, 1.0)
    norm = np.linalg.norm(c)
    if norm == 0.0:
        raise DegenerateEncodingError(f"the first {n_s} amplitudes are all zero")
    return c / norm


def sign_combine(subsystems: Sequence[SubsystemSolution], coefficients) -> np.ndarray:
    """Spin-wise sign of the weighted sum of partial configurations; sign(0) is -1."""
    partials = np.stack([s.partial for s in subsystems]).astype(float)
    total = np.asarray(coefficients, dtype=float) @ partials
    return np.where(total > 0.0, 1, -1).astype(np.int8)


def check_coverage(subsystems: Sequence[SubsystemSolution], n: int) -> None:
    covered = np.zeros(n, dtype=bool)
    for s in subsystems:
        covered[list(s.sites)] = True
    if not covered.all():
        raise RecombinationError(np.flatnonzero(~covered))


@dataclass
class RecombinationResult:
    coefficients: np.ndarray
    config: np.ndarray
    energy: float
    evaluations: int = 0
    history: list[float] = field(default_factory=list)  # best-so-far cost per evaluation


def uniform_angles(layers: int, n_qubits: int) -> np.ndarray:
    """Angles preparing the uniform superposition: RY(pi/2) everywhere, then identity layers.

    The CNOT chain only permutes basis states, which leaves a uniform state
    uniform, so the leading N_s weights are all 1/sqrt(N_s) after truncation.
    """
    theta = np.zeros((layers, n_qubits))
    theta[0] = math.pi / 2.0
    return theta.ravel()


def optimize_coefficients(
    subsystems: Sequence[SubsystemSolution],
    full: IsingProblem,
    budget: int = 200,
    shots: int | None = None,
    seed: int = 0,
    layers: int = 2,
) -> RecombinationResult:
    """Tune combination weights to minimise the full-problem energy of the sign rule.

    The uniform-weight point is evaluated first, then COBYLA runs from the
    all-zero angles and from a seeded random start, sharing the remaining
    evaluation budget. The best point seen anywhere is returned, so the
    result is never worse than uniform weighting.
    """
    if not subsystems:
        raise ConfigError("need at least one sub-system")
    check_coverage(subsystems, full.n)
    n_s = len(subsystems)
    if n_s == 1:
        c = np.ones(1)
        z = sign_combine(subsystems, c)
        e = ising_energy(full, z)
        return RecombinationResult(c, z, e, 1, [e])
    if budget < 1:
        raise ConfigError("budget must be >= 1")

    n_q = qubits_for(n_s)
    rng = np.random.default_rng(seed)
    shot_rng = np.random.default_rng([seed, 1])
    best = RecombinationResult(np.empty(0), np.empty(0, dtype=np.int8), math.inf)

    def evaluate(c: np.ndarray) -> float:
        z = sign_combine(subsystems, c)
        e = ising_energy(full, z)
        best.evaluations += 1
        if e < best.energy:
            best.coefficients, best.config, best.energy = c, z, e
        best.history.append(best.energy)
        return e

    def cost(theta: np.ndarray) -> float:
        if best.evaluations >= budget:
            return best.energy
        v = simulate_ansatz(AnsatzParams(theta, layers, n_q))
        try:
            c = amplitudes_to_coefficients(v, n_s, shots, shot_rng)
        except DegenerateEncodingError:
            # no usable weights: treat as the worst candidate without spending budget
            return best.energy + abs(best.energy) + 1.0
        return evaluate(c)

    evaluate(np.full(n_s, 1.0 / math.sqrt(n_s)))
    dim = layers * n_q
    starts = [np.zeros(dim), rng.uniform(-math.pi, math.pi, dim)]
    for k, x0 in enumerate(starts):
        remaining = budget - best.evaluations
        if remaining <= 0:
            break
        share = remaining // (len(starts) - k)
        if share < 1:
            continue
        minimize(
            cost,
            x0,
            method="COBYLA",
            options={"maxiter": max(share, dim + 2), "rhobeg": math.pi / 2},
        )
    return best
