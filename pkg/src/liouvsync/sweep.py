"""Parameter sweeps over coupling strength and detuning, and their persistence.

Config files are JSON::

    {
      "schema_version": 1,
      "preset": {"name": "coupled_machines", "params": {"omega": 0.4}},
      "eps_range": [0.0, 0.05, 61],
      "delta_range": [-0.05, 0.05, 61],
      "observables": ["s_coh", "l1", "power", "j_hot", "j_cold",
                      "first_law_residual", "spectral_gap"],
      "output_path": "fig2.csv",
      "format": "csv",
      "threads": "auto"
    }

Energies are in units of machine A's 1<->2 gap, times in its inverse.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import energy_basis, l1_coherence, relative_entropy_coherence, thermo_report
from .errors import ConfigError, NumericalError
from .liouvillian import assemble
from .models import PRESETS, ThermalMachineParams, sweep_preset
from .spectral import classify, eig_left_right, spectral_gap, steady_states

SCHEMA_VERSION = 1
THREADS_ENV = "LIOUVSYNC_THREADS"
OBSERVABLES = ("s_coh", "l1", "power", "j_hot", "j_cold", "first_law_residual", "spectral_gap")
COLUMNS = ("epsilon", "delta") + OBSERVABLES + ("status",)
THERMO_OBSERVABLES = {"power", "j_hot", "j_cold", "first_law_residual"}
STATUSES = ("ok", "degenerate_null_space", "no_convergence")
UNITS_NOTE = "energies in units of machine A's 1-2 gap; times in its inverse; hbar = 1"


def _range(value, name) -> tuple[float, float, int]:
    try:
        lo, hi, count = value
        lo, hi, count = float(lo), float(hi), int(count)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be [min, max, count], got {value!r}") from None
    if count < 1:
        raise ConfigError(f"{name} count must be >= 1")
    if lo > hi:
        raise ConfigError(f"{name} has min > max")
    return lo, hi, count


@dataclass(frozen=True)
class SweepConfig:
    preset: str = "coupled_machines"
    params: dict = field(default_factory=dict)
    eps_range: tuple[float, float, int] = (0.0, 0.05, 61)
    delta_range: tuple[float, float, int] = (-0.05, 0.05, 61)
    observables: tuple[str, ...] = OBSERVABLES
    output_path: str | None = None
    format: str = "csv"
    threads: int | str = "auto"

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        object.__setattr__(self, "eps_range", _range(self.eps_range, "eps_range"))
        object.__setattr__(self, "delta_range", _range(self.delta_range, "delta_range"))
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise ConfigError(f"unknown observables {sorted(unknown)}")
        object.__setattr__(self, "observables", tuple(o for o in OBSERVABLES if o in self.observables))
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.threads != "auto" and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError(f"threads must be a positive integer or 'auto', got {self.threads!r}")
        if self.preset == "coupled_machines":
            try:
                ThermalMachineParams(**self.params)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad coupled_machines params: {exc}") from None
        elif THERMO_OBSERVABLES & set(self.observables):
            raise ConfigError("thermodynamic observables need the coupled_machines preset")
        else:
            try:
                sweep_preset(self.preset, 0.0, 0.0, self.params)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad {self.preset} params: {exc}") from None

    @property
    def eps_values(self) -> np.ndarray:
        return np.linspace(*self.eps_range)

    @property
    def delta_values(self) -> np.ndarray:
        return np.linspace(*self.delta_range)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        extra = set(data) - {"schema_version", "preset", "eps_range", "delta_range",
                             "observables", "output_path", "format", "threads"}
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        preset = data.get("preset", {"name": "coupled_machines"})
        if isinstance(preset, str):
            preset = {"name": preset}
        kwargs = {k: data[k] for k in ("eps_range", "delta_range", "output_path", "format", "threads")
                  if k in data}
        if "observables" in data:
            kwargs["observables"] = tuple(data["observables"])
        return cls(preset=preset.get("name", "coupled_machines"),
                   params=dict(preset.get("params", {})), **kwargs)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "preset": {"name": self.preset, "params": dict(self.params)},
            "eps_range": list(self.eps_range),
            "delta_range": list(self.delta_range),
            "observables": list(self.observables),
            "output_path": self.output_path,
            "format": self.format,
            "threads": self.threads,
        }


def load_config(path) -> SweepConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return SweepConfig.from_dict(data)


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: list[dict]
    metadata: dict
    runtime_s: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if r.get(name) is None else r[name] for r in self.rows], dtype=float)

    def grid(self, name: str) -> np.ndarray:
        """Observable reshaped to ``(n_eps, n_delta)``."""
        return self.column(name).reshape(self.config.eps_range[2], self.config.delta_range[2])


def resolve_threads(threads: int | str | None) -> int:
    if isinstance(threads, int):
        return threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if n >= 1:
            return n
    return os.cpu_count() or 1


def evaluate_point(preset_name: str, params: dict, epsilon: float, delta: float,
                   observables=OBSERVABLES) -> dict:
    """Steady state and requested observables at one grid point; never raises on numerics."""
    row: dict = {"epsilon": float(epsilon), "delta": float(delta)}
    row.update({o: None for o in observables})
    preset = sweep_preset(preset_name, epsilon, delta, params)
    lmat = assemble(preset.model)
    try:
        states = steady_states(lmat)
    except NumericalError:
        row["status"] = "no_convergence"
        return row
    if len(states) != 1:
        row["status"] = "degenerate_null_space"
        return row
    rho = states[0]
    basis = energy_basis(preset.model.h0)
    if "s_coh" in observables:
        row["s_coh"] = relative_entropy_coherence(rho, basis)
    if "l1" in observables:
        row["l1"] = l1_coherence(rho, basis)
    if THERMO_OBSERVABLES & set(observables):
        thermo = thermo_report(rho, preset, check_steady=False)
        values = {"power": thermo.power, "j_hot": thermo.j_hot, "j_cold": thermo.j_cold,
                  "first_law_residual": thermo.first_law_residual}
        for k in THERMO_OBSERVABLES & set(observables):
            row[k] = values[k]
    if "spectral_gap" in observables:
        try:
            row["spectral_gap"] = spectral_gap(classify(eig_left_right(lmat), strict=False))
        except NumericalError:
            row["status"] = "no_convergence"
            return row
    row["status"] = "ok"
    return row


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def run_sweep(cfg: SweepConfig, threads: int | str | None = None) -> SweepResult:
    """Evaluate every ``(epsilon, delta)`` grid point; rows ordered epsilon-major."""
    n_workers = resolve_threads(cfg.threads if threads is None else threads)
    points = [(e, d) for e in cfg.eps_values for d in cfg.delta_values]
    started = time.perf_counter()

    def task(point):
        return evaluate_point(cfg.preset, cfg.params, point[0], point[1], cfg.observables)

    if n_workers == 1:
        rows = [task(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(task, points))

    def max_abs(name):
        vals = [abs(r[name]) for r in rows if r.get(name) is not None]
        return max(vals) if vals else None

    metadata = {
        "schema_version": SCHEMA_VERSION,
        "created": _timestamp(),
        "code_version": __version__,
        "units": UNITS_NOTE,
        "n_rows": len(rows),
        "max_s_coh": max_abs("s_coh"),
        "max_abs_power": max_abs("power"),
        "status_counts": {s: sum(r["status"] == s for r in rows) for s in STATUSES},
    }
    # wall time stays out of the metadata so repeated runs write identical files
    return SweepResult(cfg, rows, metadata, time.perf_counter() - started)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _parse(name: str, text: str):
    if name == "status":
        return text
    return None if text == "" else float(text)


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def serialize(result: SweepResult, path=None, fmt: str | None = None) -> Path:
    """Write rows as CSV (plus ``<path>.meta.json``) or as a single JSON document."""
    path = Path(path or result.config.output_path or f"sweep.{fmt or result.config.format}")
    fmt = fmt or result.config.format
    header = {"metadata": result.metadata, "config": result.config.to_dict()}
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for row in result.rows:
                writer.writerow([_fmt(row.get(c)) for c in COLUMNS])
        sidecar_path(path).write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    elif fmt == "json":
        doc = dict(header)
        doc["columns"] = list(COLUMNS)
        doc["rows"] = [[_fmt(row.get(c)) if c != "status" else row["status"] for c in COLUMNS]
                       for row in result.rows]
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    return path


def read_result(path) -> SweepResult:
    """Inverse of :func:`serialize`."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        columns = doc["columns"]
        rows = [{c: _parse(c, v) for c, v in zip(columns, values)} for values in doc["rows"]]
        header = doc
    else:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            columns = next(reader)
            rows = [{c: _parse(c, v) for c, v in zip(columns, values)} for values in reader]
        header = json.loads(sidecar_path(path).read_text())
    if tuple(columns) != COLUMNS:
        raise ConfigError(f"unexpected columns {columns}")
    return SweepResult(SweepConfig.from_dict(header["config"]), rows, header["metadata"])


__all__ = [
    "COLUMNS", "OBSERVABLES", "SweepConfig", "SweepResult", "evaluate_point", "load_config",
    "read_result", "run_sweep", "serialize",
]
