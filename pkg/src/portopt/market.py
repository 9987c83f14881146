"""Price ingestion, return moments and the mean-variance selection QUBO.

Moments are simple daily returns with no annualisation, so the risk-aversion
factor ``gamma`` is read against daily mean and covariance.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DimensionError, IngestionError, ModelError, StatsError
from .qubo import QuboProblem, as_binary

TRADING_DAYS = 1260  # about five years of sessions
INTRA_CLUSTER_CORR = 0.6
INTER_CLUSTER_CORR = 0.05


@dataclass(frozen=True)
class PriceSeries:
    symbols: tuple[str, ...]
    dates: tuple[dt.date, ...]
    close: np.ndarray  # (dates, assets)

    def __post_init__(self):
        close = np.array(self.close, dtype=float)
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "dates", tuple(self.dates))
        if close.shape != (len(self.dates), len(self.symbols)):
            raise DimensionError(
                f"close has shape {close.shape}, expected {(len(self.dates), len(self.symbols))}"
            )
        if len(self.dates) < 2:
            raise IngestionError("a price series needs at least two dates")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise IngestionError("dates must be strictly increasing")
        if not np.all(close > 0):
            raise IngestionError("prices must be strictly positive")
        close.setflags(write=False)
        object.__setattr__(self, "close", close)

    @property
    def n_assets(self) -> int:
        return len(self.symbols)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["date", *self.symbols])
            for d, row in zip(self.dates, self.close):
                w.writerow([d.isoformat(), *(repr(float(v)) for v in row)])


@dataclass(frozen=True)
class MarketModel:
    symbols: tuple[str, ...]
    mu: np.ndarray
    sigma: np.ndarray
    corr: np.ndarray

    def __post_init__(self):
        n = len(self.symbols)
        object.__setattr__(self, "symbols", tuple(self.symbols))
        for name in ("mu", "sigma", "corr"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.mu.shape != (n,) or self.sigma.shape != (n, n) or self.corr.shape != (n, n):
            raise DimensionError("mu, sigma and corr must match the number of symbols")
        if not np.allclose(self.sigma, self.sigma.T, rtol=0.0, atol=1e-12):
            raise ModelError("covariance matrix is not symmetric")
        if np.linalg.eigvalsh(self.sigma).min() < -1e-8:
            raise ModelError("covariance matrix is not positive semi-definite")
        if not np.allclose(np.diag(self.corr), 1.0, rtol=0.0, atol=1e-12):
            raise ModelError("correlation diagonal must be 1")
        if np.any(np.abs(self.corr) > 1.0 + 1e-12):
            raise ModelError("correlation entries must lie in [-1, 1]")

    @property
    def n(self) -> int:
        return len(self.symbols)

    def subset(self, indices: Sequence[int]) -> MarketModel:
        idx = np.asarray(list(indices), dtype=int)
        return MarketModel(
            tuple(self.symbols[i] for i in idx),
            self.mu[idx],
            self.sigma[np.ix_(idx, idx)],
            self.corr[np.ix_(idx, idx)],
        )

    def to_dict(self) -> dict:
        return {
            "symbols": list(self.symbols),
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "corr": self.corr.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> MarketModel:
        try:
            return cls(tuple(d["symbols"]), d["mu"], d["sigma"], d["corr"])
        except KeyError as exc:
            raise ModelError(f"market model JSON lacks key {exc}") from None

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> MarketModel:
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: not valid JSON ({exc})") from None


@dataclass(frozen=True)
class PortfolioConfig:
    gamma: float = 0.5

    def __post_init__(self):
        if not (self.gamma >= 0.0):
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")


def load_prices(path) -> PriceSeries:
    """Read a ``date,SYM1,SYM2,...`` closing-price CSV.

    Blank cells are forward-filled from the previous date; a blank cell in the
    first data row has nothing to fill from and is rejected. Row numbers in
    error messages are 1-based file lines.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestionError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2 or header[0].lower() != "date":
        raise IngestionError(f"{path}: header must start with 'date' followed by symbols")
    symbols = header[1:]
    if any(not s for s in symbols) or len(set(symbols)) != len(symbols):
        raise IngestionError(f"{path}: symbols must be non-empty and unique")

    dates: list[dt.date] = []
    close: list[list[float]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise IngestionError(
                f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}"
            )
        try:
            d = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise IngestionError(f"{path}: row {lineno}, column 'date': bad date {row[0]!r}") from None
        if dates and d <= dates[-1]:
            raise IngestionError(f"{path}: row {lineno}: date {d} is not after {dates[-1]}")
        values = []
        for col, cell in zip(symbols, row[1:]):
            cell = cell.strip()
            if not cell:
                if not close:
                    raise IngestionError(f"{path}: row {lineno}, column {col!r}: leading gap cannot be filled")
                values.append(close[-1][len(values)])
                continue
            try:
                v = float(cell)
            except ValueError:
                raise IngestionError(f"{path}: row {lineno}, column {col!r}: not a number {cell!r}") from None
            if not math.isfinite(v) or v <= 0:
                raise IngestionError(f"{path}: row {lineno}, column {col!r}: price must be positive, got {cell}")
            values.append(v)
        dates.append(d)
        close.append(values)
    if len(dates) < 2:
        raise IngestionError(f"{path}: need at least two dated rows")
    return PriceSeries(tuple(symbols), tuple(dates), np.array(close))


def synthesize_market(
    n: int, seed: int = 0, clusters: int | None = None, days: int = TRADING_DAYS
) -> PriceSeries:
    """Generate a block-correlated geometric random walk.

    Asset i belongs to cluster ``i % clusters`` so that any prefix of the
    universe spans several clusters. Daily log-returns follow a two-factor
    model (market + cluster + idiosyncratic) whose correlations are 0.6 within
    a cluster and 0.05 across clusters. Drift and volatility are drawn per
    asset so that the selection problem is not trivial. ``clusters`` defaults
    to one sector per eight assets.
    """
    if clusters is None:
        clusters = max(1, n // 8)
    if n < 2:
        raise ConfigError("synthesize_market needs n >= 2")
    if clusters < 1:
        raise ConfigError("synthesize_market needs clusters >= 1")
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % clusters

    market = rng.standard_normal(days)
    sector = rng.standard_normal((days, clusters))
    idio = rng.standard_normal((days, n))
    shocks = (
        math.sqrt(INTER_CLUSTER_CORR) * market[:, None]
        + math.sqrt(INTRA_CLUSTER_CORR - INTER_CLUSTER_CORR) * sector[:, labels]
        + math.sqrt(1.0 - INTRA_CLUSTER_CORR) * idio
    )
    vol = rng.uniform(0.008, 0.03, size=n)
    drift = rng.normal(3e-4, 6e-4, size=n)
    log_returns = drift + vol * shocks
    start = rng.uniform(20.0, 500.0, size=n)
    prices = start * np.exp(np.cumsum(log_returns, axis=0))

    first = dt.date(2018, 1, 1)
    dates = tuple(first + dt.timedelta(days=k) for k in range(days))
    symbols = tuple(f"A{i:03d}" for i in range(n))
    return PriceSeries(symbols, dates, prices)


def build_market_model(p: PriceSeries) -> MarketModel:
    if len(p.dates) < 3:
        raise ModelError("a sample covariance needs at least two returns (three dates)")
    returns = p.close[1:] / p.close[:-1] - 1.0
    mu = returns.mean(axis=0)
    sigma = np.atleast_2d(np.cov(returns, rowvar=False, ddof=1))
    var = np.diag(sigma)
    flat = [s for s, v in zip(p.symbols, var) if not v > 0.0]
    if flat:
        raise ModelError(f"zero return variance, correlation undefined for: {', '.join(flat)}")
    sigma = (sigma + sigma.T) / 2.0
    sd = np.sqrt(np.diag(sigma))
    corr = np.clip(sigma / np.outer(sd, sd), -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return MarketModel(p.symbols, mu, sigma, corr)


def build_portfolio_qubo(m: MarketModel, c: PortfolioConfig | None = None) -> QuboProblem:
    """Mean-variance selection QUBO ``-mu.w + gamma * w.Sigma.w``."""
    gamma = (c or PortfolioConfig()).gamma
    q = gamma * np.array(m.sigma)
    q[np.diag_indices_from(q)] -= m.mu
    return QuboProblem(q, 0.0)


def portfolio_stats(m: MarketModel, selection) -> tuple[float, float]:
    """Return and volatility of an equal-weight portfolio over the selected assets."""
    x = as_binary(selection, m.n)
    k = int(x.sum())
    if k == 0:
        raise StatsError("portfolio statistics need at least one selected asset")
    w = x / k
    ret = float(w @ m.mu)
    var = float(w @ m.sigma @ w)
    return ret, math.sqrt(max(var, 0.0))
