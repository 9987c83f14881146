import itertools

import numpy as np
import pytest

from portopt.market import build_market_model, synthesize_market
from portopt.qubo import IsingProblem, QuboProblem


def all_binary(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)


def all_spins(n):
    return np.array(list(itertools.product((-1, 1), repeat=n)), dtype=np.int8)


def brute_ising_min(p: IsingProblem) -> float:
    """Independent oracle: explicit double loop over every configuration."""
    best = np.inf
    for z in itertools.product((-1, 1), repeat=p.n):
        e = p.offset
        for i in range(p.n):
            e += p.h[i] * z[i]
            for j in range(i + 1, p.n):
                e += p.j[i, j] * z[i] * z[j]
        best = min(best, e)
    return best


def random_qubo(rng, n) -> QuboProblem:
    a = rng.normal(size=(n, n))
    return QuboProblem((a + a.T) / 2, offset=rng.normal())


def random_ising(rng, n, offset=True) -> IsingProblem:
    return IsingProblem(
        np.triu(rng.normal(size=(n, n)), 1), rng.normal(size=n), rng.normal() if offset else 0.0
    )


def max_independent_set_size(n, edges) -> int:
    """Largest k such that some k-subset has no internal edge."""
    edge_set = {tuple(sorted(e)) for e in edges}
    for k in range(n, 0, -1):
        for combo in itertools.combinations(range(n), k):
            if not any((a, b) in edge_set for a, b in itertools.combinations(combo, 2)):
                return k
    return 0


@pytest.fixture(scope="session")
def market16():
    return build_market_model(synthesize_market(16, seed=0, clusters=4))


@pytest.fixture(scope="session")
def market8():
    return build_market_model(synthesize_market(8, seed=1, clusters=2))


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
