"""Experiment configuration: JSON parsing and validation for the CLI.

A config is a single JSON object with blocks ``coupling``, ``system``,
``surrogate``, ``evolve`` and optionally ``sweep``, ``certificates`` and
``output``.  Complex numbers serialize as [re, im] pairs; matrices as nested
lists of such pairs (plain numbers are accepted for real entries).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .dynamics import DEFAULT_DIM_CAP, DEFAULT_LEAK_THRESHOLD, SystemModel
from .errors import ConfigError
from .spectral import CouplingSpec, spec_from_json


def parse_complex(entry) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return complex(entry[0], entry[1])
    raise ConfigError(f"cannot parse complex number from {entry!r}")


def parse_matrix(data) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ConfigError("matrix must be a nonempty list of rows")
    return np.array([[parse_complex(x) for x in row] for row in data], dtype=complex)


def parse_vector(data) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ConfigError("vector must be a nonempty list")
    return np.array([parse_complex(x) for x in data], dtype=complex)


def matrix_to_json(mat: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(mat, dtype=complex)]


@dataclass
class EvolveConfig:
    t_end: float
    h: float
    init_raw: list  # interpreted as density matrix or state vector at use site
    dim_cap: int = DEFAULT_DIM_CAP
    leak_threshold: float = DEFAULT_LEAK_THRESHOLD
    oracle_h: Optional[float] = None

    def init_density(self) -> np.ndarray:
        """The initial state as a density matrix (square nested list)."""
        mat = parse_matrix(self.init_raw)
        if mat.shape[0] != mat.shape[1]:
            raise ConfigError("initial density matrix must be square")
        return mat

    def init_vector(self) -> np.ndarray:
        """The initial state as a pure state vector."""
        return parse_vector(self.init_raw)


@dataclass
class SurrogateConfig:
    kind: str  # "pseudomode" | "chain" | "oracle"
    M: Optional[int] = None
    N: Optional[int] = None
    omega_c: Optional[float] = None
    kappa: Optional[float] = None
    kappa_over_delta: Optional[float] = None
    n_max: int = 1


@dataclass
class ExperimentConfig:
    coupling: CouplingSpec
    system: SystemModel
    surrogate: SurrogateConfig
    evolve: Optional[EvolveConfig] = None
    sweep: tuple = ()
    certificates: tuple = ()
    gamma_constant: float = 0.0
    output: Optional[str] = None
    raw: dict = field(default_factory=dict)


def _require(data: dict, key: str) -> Any:
    if key not in data:
        raise ConfigError(f"config is missing the required field '{key}'")
    return data[key]


def parse_system(data: dict) -> SystemModel:
    dim = int(_require(data, "dim"))
    sched_raw = _require(data, "h_schedule")
    schedule = tuple((float(t), parse_matrix(h)) for t, h in sched_raw)
    L = parse_matrix(_require(data, "L"))
    return SystemModel(dim, schedule, L)


def parse_surrogate(data: dict) -> SurrogateConfig:
    kind = _require(data, "type")
    if kind not in ("pseudomode", "chain", "oracle"):
        raise ConfigError(f"unknown surrogate type {kind!r}")
    sc = SurrogateConfig(kind)
    if "M" in data:
        sc.M = int(data["M"])
    if "N" in data:
        sc.N = int(data["N"])
    if "omega_c" in data:
        sc.omega_c = float(data["omega_c"])
    if "kappa" in data:
        sc.kappa = float(data["kappa"])
    if "kappa_over_delta" in data:
        sc.kappa_over_delta = float(data["kappa_over_delta"])
    if "n_max" in data:
        sc.n_max = int(data["n_max"])
    return sc


def parse_evolve(data: dict) -> EvolveConfig:
    t_end = float(_require(data, "t_end"))
    h = float(_require(data, "h"))
    init_raw = _require(data, "init")
    ec = EvolveConfig(t_end, h, init_raw)
    if "dim_cap" in data:
        ec.dim_cap = int(data["dim_cap"])
    if "leak_threshold" in data:
        ec.leak_threshold = float(data["leak_threshold"])
    if "oracle_h" in data:
        ec.oracle_h = float(data["oracle_h"])
    return ec


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    coupling = spec_from_json(_require(data, "coupling"))
    system = parse_system(_require(data, "system"))
    surrogate = parse_surrogate(_require(data, "surrogate"))
    cfg = ExperimentConfig(coupling, system, surrogate, raw=data)
    if "evolve" in data:
        cfg.evolve = parse_evolve(data["evolve"])
    if "sweep" in data:
        values = data["sweep"].get("values") if isinstance(data["sweep"], dict) else data["sweep"]
        if not values:
            raise ConfigError("sweep values must be a nonempty list")
        cfg.sweep = tuple(int(v) for v in values)
    if "certificates" in data:
        cfg.certificates = tuple(data["certificates"])
    if "gamma" in data:
        cfg.gamma_constant = float(data["gamma"])
    if "output" in data:
        cfg.output = str(data["output"])
    return cfg


def apply_override(data: dict, dotted: str, value: str) -> None:
    """Set a dotted-path key in the raw config; the value is parsed as JSON,
    falling back to a plain string."""
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node, dict):
            raise ConfigError(f"override path '{dotted}' crosses a non-object")
        node = node.setdefault(k, {})
    if not isinstance(node, dict):
        raise ConfigError(f"override path '{dotted}' crosses a non-object")
    node[keys[-1]] = parsed


def load_config(path: str, overrides: list[str] = ()) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not KEY=VALUE")
        key, _, value = item.partition("=")
        apply_override(data, key, value)
    return parse_config(data)
