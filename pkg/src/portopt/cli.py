"""Command-line entry point.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .bench import BenchmarkSpec, frontier_scatter, run_benchmark, write_frontier_csv
from .config import RunConfig, read_kv_file, resolve
from .errors import ConfigError, CoverageError, DataError, SolverError
from .graph import build_market_graph
from .lssa import METHODS, PipelineReport, approximation_ratio, default_ns, normalize_method, portfolio_ising, run_method
from .market import MarketModel, build_market_model, load_prices, synthesize_market
from .qubo import spins_to_binary
from .solvers import classical_baseline, solve_exhaustive, solve_tabu

log = logging.getLogger("portopt")

SOLVE_METHODS = ("lssa-random", "lssa-mis", "lssa-mis-random", "exact", "tabu")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_market(path) -> MarketModel:
    if not Path(path).exists():
        raise FileNotFoundError(f"{path}: no such file")
    return MarketModel.load(path)


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_synth(args) -> None:
    prices = synthesize_market(args.n, args.seed, args.clusters)
    prices.to_csv(args.out)
    print(f"wrote {prices.n_assets} assets x {len(prices.dates)} days to {args.out}")


def cmd_ingest(args) -> None:
    if not Path(args.prices).exists():
        raise FileNotFoundError(f"{args.prices}: no such file")
    prices = load_prices(args.prices)
    model = build_market_model(prices)
    model.save(args.out)
    print(f"{model.n} assets, {prices.dates[0]} .. {prices.dates[-1]} ({len(prices.dates)} days)")


def cmd_graph(args) -> None:
    model = _load_market(args.market)
    g = build_market_graph(model, args.alpha)
    if args.out:
        g.write_edgelist(args.out)
    print(f"vertices {g.n} edges {len(g.edges)} density {g.density():.4f}")


def _solve_config(args) -> RunConfig:
    file_values = read_kv_file(args.config) if args.config else {}
    return resolve(
        file_values,
        {
            "method": args.method,
            "gamma": args.gamma,
            "alpha": args.alpha,
            "n_g": args.ng,
            "n_s": args.ns,
            "seed": args.seed,
            "solver": args.solver,
            "vqe_shots": args.shots,
        },
    )


def _check_feasible(cfg: RunConfig, n: int) -> tuple[int, int]:
    n_g = cfg.n_g or default_ns(n)
    n_s = cfg.n_s or default_ns(n)
    if not 1 <= n_g <= n:
        raise ConfigError(f"--ng must lie in 1..{n}, got {n_g}")
    if normalize_method(cfg.method) in ("lssa_random", "lssa_mis_random") and n_s * n_g < n:
        raise CoverageError(f"--ns {n_s} x --ng {n_g} = {n_s * n_g} cannot cover {n} assets")
    return n_g, n_s


def solve_report(model: MarketModel, cfg: RunConfig) -> PipelineReport:
    """Run the configured method on ``model`` and attach the resolved config."""
    method = cfg.method.strip().lower()
    if method not in SOLVE_METHODS:
        raise ConfigError(f"--method must be one of {SOLVE_METHODS}, got {cfg.method!r}")
    n_g, n_s = _check_feasible(cfg, model.n)
    if method in ("exact", "tabu"):
        started = time.perf_counter()
        p = portfolio_ising(model, cfg.gamma)
        if method == "exact":
            res = solve_exhaustive(p)
        else:
            res = solve_tabu(p, cfg.tabu_max_iter, cfg.tabu_tenure, cfg.seed)
        base = res.energy if method == "exact" else classical_baseline(p).energy
        report = PipelineReport(
            method=method,
            selected=spins_to_binary(res.config),
            energy=res.energy,
            classical_energy=base,
            r_ar=approximation_ratio(res.energy, base) if base < 0 else None,
            samples={"mis": None, "po": None},
            seed=cfg.seed,
            wall_time_ms=(time.perf_counter() - started) * 1000.0,
        )
    else:
        report = run_method(
            method, model,
            gamma=cfg.gamma, alpha=cfg.alpha, n_g=n_g, n_s=n_s,
            solver=cfg.solver_config(), recombiner=cfg.recombiner_config(), seed=cfg.seed,
        )
    report.config = cfg.to_dict()
    return report


def cmd_solve(args) -> None:
    cfg = _solve_config(args)
    model = _load_market(args.market)
    report = solve_report(model, cfg)
    if args.out:
        _dump(report.to_dict(), args.out)
    chosen = [s for s, x in zip(model.symbols, report.selected) if x]
    print(f"method {report.method}")
    print(f"selected ({len(chosen)}): {' '.join(chosen) if chosen else '-'}")
    print(f"energy {report.energy:.10g}  classical {report.classical_energy:.10g}  r_ar {report.r_ar}")
    print(f"samples mis={report.samples.get('mis')} po={report.samples.get('po')}")


def _parse_sizes(text: str) -> list[tuple[int, ...]]:
    sizes = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            sizes.append(tuple(int(v) for v in item.split("-")))
        except ValueError:
            raise ConfigError(f"bad size {item!r}; expected N-Ng or N-Ng-Ns") from None
    return sizes


def load_benchmark_spec(path) -> tuple[BenchmarkSpec, RunConfig]:
    """Benchmark spec file: ``sizes``, ``methods``, ``seeds`` plus any run-config keys."""
    values = read_kv_file(path)
    if not values:
        raise ConfigError(f"{path}: empty benchmark spec")
    if "sizes" not in values:
        raise ConfigError(f"{path}: benchmark spec needs a 'sizes' entry")
    sizes = _parse_sizes(values.pop("sizes"))
    methods = tuple(m.strip() for m in values.pop("methods", ",".join(METHODS)).split(",") if m.strip())
    try:
        seeds = tuple(int(s) for s in values.pop("seeds", "0").split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"{path}: seeds must be integers") from None
    cfg = resolve(values)
    spec = BenchmarkSpec(
        sizes=tuple(sizes),
        methods=methods,
        seeds=seeds,
        solver=cfg.solver_config(),
        recombiner=cfg.recombiner_config(),
        gamma=cfg.gamma,
        alpha=cfg.alpha,
    )
    return spec, cfg


def cmd_benchmark(args) -> None:
    spec, cfg = load_benchmark_spec(args.spec)
    model = _load_market(args.market)
    table = run_benchmark(spec, model)
    table.write_csv(args.out)
    for row in table.summary():
        print(
            f"{row['tick']:>7} {row['method']:<16} median r_ar {row['median_r_ar']}"
            f"  best {row['best_r_ar']}  ns_po {row['ns_po']}  ns_mis {row['ns_mis']}"
        )
    if args.summary:
        _dump({"config": cfg.to_dict(), "summary": table.summary()}, args.summary)


def cmd_frontier(args) -> None:
    model = _load_market(args.market)
    reports = []
    for path in args.reports or []:
        if not Path(path).exists():
            raise FileNotFoundError(f"{path}: no such file")
        try:
            reports.append(PipelineReport.from_dict(json.loads(Path(path).read_text())))
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataError(f"{path}: not a pipeline report ({exc})") from None
    for rep in reports:
        if len(rep.selected) != model.n:
            raise DataError(f"report {rep.method} has {len(rep.selected)} assets, market has {model.n}")
    points = frontier_scatter(model, args.samples, args.seed, reports)
    write_frontier_csv(points, args.out)
    counts = {}
    for p in points:
        counts[p.label] = counts.get(p.label, 0) + 1
    print(" ".join(f"{k}={v}" for k, v in counts.items()))


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="portopt", description="Decomposed QUBO portfolio selection.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic clustered price CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="price CSV -> market model JSON")
    p.add_argument("--prices", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("graph", help="threshold the correlation matrix into an edge list")
    p.add_argument("--market", required=True)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("solve", help="run one method and write a report JSON")
    p.add_argument("--market", required=True)
    p.add_argument("--method", choices=SOLVE_METHODS)
    p.add_argument("--ng", type=int)
    p.add_argument("--ns", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--solver", choices=("sa", "tabu", "exact"))
    p.add_argument("--shots", help="'exact' or a shot count for amplitude estimation")
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmark", help="approximation-ratio table over sizes, methods and seeds")
    p.add_argument("--market", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="optional JSON with per-cell medians")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("frontier", help="return/volatility scatter CSV")
    p.add_argument("--market", required=True)
    p.add_argument("--reports", nargs="*", default=[])
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_frontier)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
