"""End-to-end acceptance checks at their stated tolerances.

Each test records one PASS/FAIL line, repeated in the terminal summary.
"""

import itertools
import re
import time

import numpy as np

from portopt.bench import frontier_scatter
from portopt.cli import main
from portopt.graph import MarketGraph, mis_qubo, validate_independent_set
from portopt.lssa import (
    RecombinerConfig,
    SamplePlan,
    portfolio_ising,
    run_lssa,
    run_method,
    sample_random,
)
from portopt.market import build_market_model, portfolio_stats, synthesize_market
from portopt.qubo import QuboProblem, ising_energy, qubo_to_ising, restrict, spins_to_binary
from portopt.recombine import (
    SAMPLED_SHOTS,
    AnsatzParams,
    SubsystemSolution,
    amplitudes_to_coefficients,
    optimize_coefficients,
    sign_combine,
    simulate_ansatz,
)
from portopt.solvers import AnnealSchedule, SolverConfig, classical_baseline, solve_exhaustive, solve_sa, solve_tabu

from conftest import all_binary, max_independent_set_size, random_ising, record_acceptance

EXACT = SolverConfig("exact")


def check(number, passed, detail):
    record_acceptance(number, bool(passed), detail)
    assert passed, detail


def test_01_transformation_equivalence():
    rng = np.random.default_rng(1)
    started = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 11))
        a = rng.normal(size=(n, n))
        qp = QuboProblem((a + a.T) / 2, rng.normal())
        ip = qubo_to_ising(qp)
        xs = all_binary(n).astype(float)
        zs = 2 * xs - 1
        e_q = np.einsum("ki,ij,kj->k", xs, qp.q, xs) + qp.offset
        e_i = np.einsum("ki,ij,kj->k", zs, ip.j, zs) + zs @ ip.h + ip.offset
        worst = max(worst, float(np.max(np.abs(e_q - e_i))))
    elapsed = time.perf_counter() - started
    check(1, worst <= 1e-9 and elapsed < 5, f"max |dE| {worst:.2e} over 100 instances, {elapsed:.2f} s")


def test_02_mis_correctness():
    rng = np.random.default_rng(2)
    started = time.perf_counter()
    passed = 0
    for _ in range(50):
        n = int(rng.integers(2, 15))
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.3]
        g = MarketGraph(n, {e: 1.0 for e in edges})
        res = solve_exhaustive(qubo_to_ising(mis_qubo(g)))
        x = spins_to_binary(res.config)
        size = max_independent_set_size(n, edges)
        validate_independent_set(g, x)
        passed += int(x.sum()) == size and abs(res.energy + size) <= 1e-9
    elapsed = time.perf_counter() - started
    check(2, passed == 50 and elapsed < 30, f"{passed}/50 graphs exact, {elapsed:.2f} s")


def test_03_heuristic_quality():
    rng = np.random.default_rng(3)
    started = time.perf_counter()
    sa_hits = tabu_hits = 0
    for k in range(50):
        p = random_ising(rng, 12)
        exact = solve_exhaustive(p).energy
        sa_hits += solve_sa(p, AnnealSchedule(seed=k)).energy <= exact + 1e-9
        tabu_hits += solve_tabu(p, seed=k).energy <= exact + 1e-9
    elapsed = time.perf_counter() - started
    check(
        3,
        sa_hits >= 48 and tabu_hits >= 45 and elapsed < 60,
        f"SA {sa_hits}/50 (need 48), tabu {tabu_hits}/50 (need 45), {elapsed:.2f} s",
    )


def test_04_identity_decomposition():
    ratios = []
    for k in range(10):
        n = 7 + k  # 7..16
        p = portfolio_ising(build_market_model(synthesize_market(n, seed=100 + k)), 0.5)
        plan = SamplePlan((tuple(range(n)),), n, n, "random")
        ratios.append(run_lssa(p, plan, EXACT, seed=k, classical_energy=classical_baseline(p).energy).r_ar)
    check(4, all(r == 1.0 for r in ratios), f"r_ar values {sorted(set(ratios))}")


def test_05_coverage_floor():
    failures = []
    for n, n_g, n_s in ((8, 4, 4), (16, 8, 4), (32, 16, 16), (64, 32, 32)):
        floor = n_s * n_g // n
        for seed in range(20):
            if sample_random(n, n_g, n_s, seed).counts().min() < floor:
                failures.append((n, n_g, n_s, seed))
    check(5, not failures, f"80 plans checked, failures {failures}")


def test_06_pipeline_quality():
    m = build_market_model(synthesize_market(16, seed=0, clusters=4))
    base = solve_exhaustive(portfolio_ising(m, 0.5)).energy
    started = time.perf_counter()
    medians = {}
    for method in ("lssa_random", "lssa_mis", "lssa_mis_random"):
        ratios = [
            run_method(method, m, n_g=8, n_s=4, solver=EXACT, recombiner=RecombinerConfig(), seed=s,
                       classical_energy=base).r_ar
            for s in range(10)
        ]
        medians[method] = float(np.median(ratios))
    elapsed = time.perf_counter() - started
    shown = ", ".join(f"{k} {v:.4f}" for k, v in medians.items())
    check(6, min(medians.values()) >= 0.95 and elapsed < 120, f"median r_ar {shown}, {elapsed:.1f} s")


def test_07_sample_economy():
    m = build_market_model(synthesize_market(64, seed=0, clusters=8))
    mis = run_method("lssa_mis", m, alpha=0.25, n_g=32, seed=0, classical_energy=-1.0)
    rnd = run_method("lssa_random", m, alpha=0.25, n_g=32, n_s=32, seed=0, classical_energy=-1.0)
    used_mis, configured = mis.samples["po"], 32
    check(
        7,
        used_mis <= 32 and used_mis <= configured,
        f"lssa_mis used {used_mis} sub-systems ({len(mis.placeholders)} placeholders), "
        f"lssa_random configured {configured} (used {rnd.samples['po']} distinct)",
    )


def test_08_recombiner_contracts():
    rng = np.random.default_rng(8)
    norm_err = max(
        abs(np.linalg.norm(simulate_ansatz(AnsatzParams(rng.uniform(-2 * np.pi, 2 * np.pi, 2 * q), 2, q))) - 1)
        for q in rng.integers(1, 6, size=100)
    )

    not_worse = 0
    for k in range(20):
        p = random_ising(rng, 8)
        perm = rng.permutation(8)
        blocks = [perm[:4], perm[4:], rng.choice(8, size=4, replace=False)]
        subs = []
        for sites in blocks:
            sites = sorted(int(i) for i in sites)
            res = solve_exhaustive(restrict(p, sites))
            subs.append(SubsystemSolution.embed(8, sites, res.config, res.energy))
        uniform = ising_energy(p, sign_combine(subs, np.full(3, 3**-0.5)))
        not_worse += optimize_coefficients(subs, p, seed=k).energy <= uniform + 1e-12

    v = simulate_ansatz(AnsatzParams([0.7, -1.9], 1, 2))
    probs = v**2
    bound = 3 * np.sqrt(probs * (1 - probs) / SAMPLED_SHOTS)
    shot_rng = np.random.default_rng(80)
    inside = np.array([
        np.abs(amplitudes_to_coefficients(v, 4, SAMPLED_SHOTS, shot_rng) ** 2 - probs) <= bound
        for _ in range(1000)
    ])
    per_estimate = inside.mean()
    per_trial = inside.all(axis=1).mean()
    check(
        8,
        norm_err < 1e-12 and not_worse == 20 and per_estimate >= 0.99,
        f"norm err {norm_err:.1e}; {not_worse}/20 not worse than uniform; "
        f"shot estimates inside 3 sigma {per_estimate:.4f} (whole trials {per_trial:.3f})",
    )


def test_09_frontier_shape():
    m = build_market_model(synthesize_market(32, seed=0))
    started = time.perf_counter()
    cloud = [p for p in frontier_scatter(m, 5000, seed=0) if p.label == "random"]
    elapsed = time.perf_counter() - started
    med_ret = float(np.median([p.ret for p in cloud]))
    med_vol = float(np.median([p.volatility for p in cloud]))
    base = classical_baseline(portfolio_ising(m, 0.5)).energy
    dominated = 0
    for seed in range(5):
        rep = run_method("lssa_mis_random", m, seed=seed, classical_energy=base)
        if rep.selected.any():
            ret, vol = portfolio_stats(m, rep.selected)
            dominated += ret >= med_ret and vol <= med_vol
    check(9, elapsed < 10 and dominated >= 4, f"{dominated}/5 seeds dominate the cloud median, scatter {elapsed:.2f} s")


def test_10_determinism(tmp_path):
    prices = synthesize_market(12, seed=10, clusters=3)
    build_market_model(prices).save(tmp_path / "m.json")
    blobs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        code = main(["solve", "--market", str(tmp_path / "m.json"), "--method", "lssa-mis-random",
                     "--ng", "6", "--ns", "6", "--seed", "3", "--out", str(out)])
        assert code == 0
        blobs.append(re.sub(rb'\n\s*"wall_time_ms": [^\n]*', b"", out.read_bytes()))
    check(10, blobs[0] == blobs[1], f"{len(blobs[0])} bytes compared")
