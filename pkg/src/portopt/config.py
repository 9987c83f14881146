"""Flat ``key = value`` run configuration.

Values come from (lowest to highest precedence) built-in defaults, the
``PORTOPT_SEED`` environment variable (seed only), a config file, and CLI
flags.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .lssa import RecombinerConfig
from .solvers import AnnealSchedule, SolverConfig

SEED_ENV = "PORTOPT_SEED"

# config-file key -> RunConfig attribute
KEYS = {
    "method": "method",
    "gamma": "gamma",
    "alpha": "alpha",
    "ng": "n_g",
    "ns": "n_s",
    "seed": "seed",
    "solver": "solver",
    "sa.sweeps": "sa_sweeps",
    "sa.beta_initial": "sa_beta_initial",
    "sa.beta_final": "sa_beta_final",
    "sa.restarts": "sa_restarts",
    "tabu.max_iter": "tabu_max_iter",
    "tabu.tenure": "tabu_tenure",
    "vqe.layers": "vqe_layers",
    "vqe.budget": "vqe_budget",
    "vqe.shots": "vqe_shots",
    "vqe.seed": "vqe_seed",
}


@dataclass
class RunConfig:
    method: str = "lssa-mis-random"
    gamma: float = 0.5
    alpha: float = 0.25
    n_g: int | None = None
    n_s: int | None = None
    seed: int = 0
    solver: str = "sa"
    sa_sweeps: int = 1000
    sa_beta_initial: float = 0.1
    sa_beta_final: float = 10.0
    sa_restarts: int = 32
    tabu_max_iter: int | None = None
    tabu_tenure: int | None = None
    vqe_layers: int = 2
    vqe_budget: int = 200
    vqe_shots: int | None = None  # None means exact amplitudes
    vqe_seed: int | None = None

    def solver_config(self) -> SolverConfig:
        schedule = AnnealSchedule(
            self.sa_sweeps, self.sa_beta_initial, self.sa_beta_final, self.sa_restarts
        )
        return SolverConfig(self.solver, schedule, self.tabu_max_iter, self.tabu_tenure)

    def recombiner_config(self) -> RecombinerConfig:
        return RecombinerConfig(self.vqe_layers, self.vqe_budget, self.vqe_shots, self.vqe_seed)

    def to_dict(self) -> dict:
        """Echo with config-file key names, shots rendered as "exact" or an integer."""
        d = asdict(self)
        out = {key: d[attr] for key, attr in KEYS.items()}
        out["vqe.shots"] = "exact" if self.vqe_shots is None else self.vqe_shots
        return out


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(attr: str, raw):
    if raw is None or not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = _TYPES[attr]
    try:
        if attr == "vqe_shots":
            return None if text.lower() == "exact" else int(text)
        if "None" in kind and text.lower() in ("", "none", "auto"):
            return None
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {attr}") from None
    return text


def parse_kv(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def read_kv_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    return parse_kv(text, str(path))


def resolve(file_values: dict[str, str] | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a :class:`RunConfig` from file values and flag overrides (``None`` = unset)."""
    cfg = RunConfig()
    env_seed = os.environ.get(SEED_ENV)
    if env_seed:
        cfg.seed = _convert("seed", env_seed)
    for key, raw in (file_values or {}).items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, KEYS[key], _convert(KEYS[key], raw))
    for attr, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, attr, _convert(attr, value))
    if cfg.gamma < 0:
        raise ConfigError("gamma must be >= 0")
    if not 0.0 <= cfg.alpha <= 1.0:
        raise ConfigError("alpha must lie in [0, 1]")
    # validates solver and recombiner blocks eagerly
    cfg.solver_config()
    cfg.recombiner_config()
    return cfg
