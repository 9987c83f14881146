"""Decomposed QUBO portfolio selection.

Build a mean-variance selection QUBO from prices, split it into sub-systems
(randomly or around a maximal independent set of the correlation graph),
solve the pieces with classical annealing heuristics and recombine them with
an amplitude-weighted sign rule.
"""

from .errors import PortoptError
from .graph import MarketGraph, build_market_graph, mis_qubo, validate_independent_set
from .lssa import (
    PipelineReport,
    RecombinerConfig,
    SamplePlan,
    run_lssa,
    run_method,
    run_mis_portfolio,
    run_mis_random_portfolio,
    sample_mis,
    sample_random,
)
from .market import (
    MarketModel,
    PortfolioConfig,
    PriceSeries,
    build_market_model,
    build_portfolio_qubo,
    load_prices,
    portfolio_stats,
    synthesize_market,
)
from .qubo import IsingProblem, QuboProblem, ising_energy, ising_to_qubo, qubo_energy, qubo_to_ising, restrict
from .solvers import AnnealSchedule, SolverConfig, SolveResult, solve_exhaustive, solve_sa, solve_tabu

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "IsingProblem",
    "MarketGraph",
    "MarketModel",
    "PipelineReport",
    "PortfolioConfig",
    "PortoptError",
    "PriceSeries",
    "QuboProblem",
    "RecombinerConfig",
    "SamplePlan",
    "SolveResult",
    "SolverConfig",
    "build_market_graph",
    "build_market_model",
    "build_portfolio_qubo",
    "ising_energy",
    "ising_to_qubo",
    "load_prices",
    "mis_qubo",
    "portfolio_stats",
    "qubo_energy",
    "qubo_to_ising",
    "restrict",
    "run_lssa",
    "run_method",
    "run_mis_portfolio",
    "run_mis_random_portfolio",
    "sample_mis",
    "sample_random",
    "solve_exhaustive",
    "solve_sa",
    "solve_tabu",
    "synthesize_market",
    "validate_independent_set",
]
