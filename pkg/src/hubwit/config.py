"""Run configuration: flat key-value sections with command-line overrides.

A config file is INI-style; every value also has a command-line flag named
--<section>-<key>.  Validation collects every problem before reporting, so
a broken config surfaces all its errors at once.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from typing import Callable

from .ed import HubbardParams
from .lattice import ClusterGeometry, LatticeKind, build_lattice
from .thermo import Ensemble, EnsembleKind


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in errors))


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_ints(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.split(",") if tok.strip())


def _parse_floats(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.split(",") if tok.strip())


def _parse_points(raw: str) -> tuple[tuple[int, float], ...]:
    """Synthetic extrapolation input, e.g. '2:0.5,4:0.55,6:0.6'."""
    out = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        n, tc = tok.split(":")
        out.append((int(n), float(tc)))
    return tuple(out)


@dataclass
class RunConfig:
    geometry_kind: str | None = None
    geometry_dims: tuple[int, ...] | None = None
    model_t: float = 1.0
    model_u: float = 0.0
    model_mu: float | None = None
    ensemble_kind: str = "grand"
    run_method: str = "ed"
    run_threads: int | None = None
    temperature_min: float | None = None
    temperature_max: float | None = None
    temperature_count: int = 64
    temperature_spacing: str = "geometric"
    temperature_values: tuple[float, ...] | None = None
    ugrid_min: float | None = None
    ugrid_max: float | None = None
    ugrid_count: int = 16
    ugrid_spacing: str = "geometric"
    ugrid_values: tuple[float, ...] | None = None
    qmc_delta_tau: float = 0.125
    qmc_warmup_sweeps: int = 500
    qmc_measure_sweeps: int = 2000
    qmc_bin_size: int = 50
    qmc_stabilization_interval: int = 8
    qmc_seed: int = 0
    extrapolation_order: int = 2
    extrapolation_orders: tuple[int, ...] = (1, 2)
    extrapolation_sizes: tuple[int, ...] = (2, 4, 6)
    extrapolation_points: tuple[tuple[int, float], ...] | None = None
    extrapolation_eta_us: tuple[float, ...] = (16.0, 32.0, 64.0)
    output_csv: str | None = None
    output_log: str | None = None

    # -- derived builders (call only after validate) ------------------------

    def geometry(self) -> ClusterGeometry:
        return build_lattice(self.geometry_kind, self.geometry_dims)

    def params(self) -> HubbardParams:
        return HubbardParams(t=self.model_t, u=self.model_u, mu=self.model_mu or 0.0)

    def ensemble(self) -> Ensemble:
        return Ensemble(EnsembleKind(self.ensemble_kind), self.model_mu)

    def temperatures(self) -> tuple[float, ...]:
        return _grid(
            self.temperature_values,
            self.temperature_min,
            self.temperature_max,
            self.temperature_count,
            self.temperature_spacing,
        )

    def u_values(self) -> tuple[float, ...]:
        return _grid(
            self.ugrid_values, self.ugrid_min, self.ugrid_max, self.ugrid_count, self.ugrid_spacing
        )

    def metadata(self, command: str, version: str) -> dict[str, str]:
        """Every config field plus command and code version: enough to rerun."""
        meta: dict[str, str] = {"command": command, "version": version}
        for spec in fields(self):
            value = getattr(self, spec.name)
            if value is None:
                continue
            key = spec.name.replace("_", ".", 1)
            if isinstance(value, tuple):
                if value and isinstance(value[0], tuple):
                    meta[key] = ",".join(f"{n}:{tc!r}" for n, tc in value)
                else:
                    meta[key] = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                meta[key] = repr(value)
            else:
                meta[key] = str(value)
        return meta


def _grid(values, lo, hi, count, spacing) -> tuple[float, ...]:
    import numpy as np

    if values is not None:
        return tuple(float(v) for v in values)
    if spacing == "geometric":
        return tuple(float(x) for x in np.geomspace(lo, hi, count))
    return tuple(float(x) for x in np.linspace(lo, hi, count))


# (section, key) -> (attribute, parser, help); drives both INI and CLI flags
SCHEMA: dict[tuple[str, str], tuple[str, Callable[[str], object], str]] = {
    ("geometry", "kind"): ("geometry_kind", str, "chain | ring | square | cubic"),
    ("geometry", "dims"): ("geometry_dims", _parse_ints, "comma-separated extents, e.g. 4 or 4,4"),
    ("model", "t"): ("model_t", float, "hopping amplitude (energy unit)"),
    ("model", "u"): ("model_u", float, "on-site repulsion"),
    ("model", "mu"): ("model_mu", float, "chemical potential; default u/2 (half filling)"),
    ("ensemble", "kind"): ("ensemble_kind", str, "canonical | grand"),
    ("run", "method"): ("run_method", str, "ed | qmc"),
    ("run", "threads"): ("run_threads", int, "worker threads for grid evaluation"),
    ("temperature", "min"): ("temperature_min", float, "grid lower edge"),
    ("temperature", "max"): ("temperature_max", float, "grid upper edge"),
    ("temperature", "count"): ("temperature_count", int, "number of grid points"),
    ("temperature", "spacing"): ("temperature_spacing", str, "geometric | linear"),
    ("temperature", "values"): ("temperature_values", _parse_floats, "explicit grid, overrides min/max/count"),
    ("ugrid", "min"): ("ugrid_min", float, "U grid lower edge"),
    ("ugrid", "max"): ("ugrid_max", float, "U grid upper edge"),
    ("ugrid", "count"): ("ugrid_count", int, "number of U points"),
    ("ugrid", "spacing"): ("ugrid_spacing", str, "geometric | linear"),
    ("ugrid", "values"): ("ugrid_values", _parse_floats, "explicit U grid"),
    ("qmc", "delta_tau"): ("qmc_delta_tau", float, "imaginary-time step"),
    ("qmc", "warmup_sweeps"): ("qmc_warmup_sweeps", int, "thermalization sweeps"),
    ("qmc", "measure_sweeps"): ("qmc_measure_sweeps", int, "measured sweeps"),
    ("qmc", "bin_size"): ("qmc_bin_size", int, "sweeps per bin"),
    ("qmc", "stabilization_interval"): ("qmc_stabilization_interval", int, "slices between Green recomputations"),
    ("qmc", "seed"): ("qmc_seed", int, "base RNG seed; per-temperature seed = base + row index"),
    ("extrapolation", "order"): ("extrapolation_order", int, "headline 1/N fit order"),
    ("extrapolation", "orders"): ("extrapolation_orders", _parse_ints, "orders for the sensitivity report"),
    ("extrapolation", "sizes"): ("extrapolation_sizes", _parse_ints, "chain sizes to extrapolate from"),
    ("extrapolation", "points"): ("extrapolation_points", _parse_points, "synthetic N:tc pairs (skips the solver)"),
    ("extrapolation", "eta_us"): ("extrapolation_eta_us", _parse_floats, "U values for the large-U eta fit"),
    ("output", "csv"): ("output_csv", str, "CSV output path"),
    ("output", "log"): ("output_log", str, "QMC measurement log path"),
}


def load_config(path: str | None, overrides: dict[str, str]) -> RunConfig:
    """Merge config-file values and CLI overrides; collect every parse error."""
    cfg = RunConfig()
    errors: list[str] = []
    raw: dict[tuple[str, str], str] = {}

    if path is not None:
        parser = configparser.ConfigParser()
        try:
            read = parser.read(path)
        except configparser.Error as exc:
            raise ConfigError([f"malformed config file {path}: {exc}"])
        if not read:
            raise ConfigError([f"config file not found: {path}"])
        for section in parser.sections():
            for key, value in parser.items(section):
                if (section, key) not in SCHEMA:
                    errors.append(f"unknown config key [{section}] {key}")
                else:
                    raw[(section, key)] = value

    for flag, value in overrides.items():
        section, _, key = flag.partition("-")
        raw[(section, key.replace("-", "_"))] = value  # flags win over the file

    for (section, key), value in raw.items():
        attr, parse, _ = SCHEMA[(section, key)]
        try:
            setattr(cfg, attr, parse(value))
        except (ValueError, TypeError) as exc:
            errors.append(f"[{section}] {key} = {value!r}: {exc}")

    if errors:
        raise ConfigError(errors)
    return cfg


# -- semantic validation -----------------------------------------------------


def _validate_geometry(cfg: RunConfig, errors: list[str]) -> None:
    if cfg.geometry_kind is None:
        errors.append("geometry.kind is required")
        return
    try:
        LatticeKind(cfg.geometry_kind)
    except ValueError:
        errors.append(f"geometry.kind must be chain|ring|square|cubic, got {cfg.geometry_kind!r}")
        return
    if cfg.geometry_dims is None:
        errors.append("geometry.dims is required")
        return
    try:
        cfg.geometry()
    except ValueError as exc:
        errors.append(f"geometry: {exc}")


def _validate_model(cfg: RunConfig, errors: list[str]) -> None:
    if cfg.model_t <= 0:
        errors.append(f"model.t must be positive, got {cfg.model_t}")
    if cfg.model_u < 0:
        errors.append(f"model.u must be nonnegative, got {cfg.model_u}")
    if cfg.ensemble_kind not in ("canonical", "grand"):
        errors.append(f"ensemble.kind must be canonical|grand, got {cfg.ensemble_kind!r}")


def _validate_grid(prefix: str, values, lo, hi, count, spacing, errors: list[str]) -> None:
    if values is not None:
        if len(values) == 0:
            errors.append(f"{prefix}.values must not be empty")
        elif any(v <= 0 for v in values):
            errors.append(f"{prefix}.values must be positive, got {values}")
        return
    if lo is None or hi is None:
        errors.append(f"{prefix}.min and {prefix}.max (or {prefix}.values) are required")
        return
    if not 0 < lo < hi:
        errors.append(f"need 0 < {prefix}.min < {prefix}.max, got ({lo}, {hi})")
    if count < 1:
        errors.append(f"{prefix}.count must be at least 1, got {count}")
    if spacing not in ("geometric", "linear"):
        errors.append(f"{prefix}.spacing must be geometric|linear, got {spacing!r}")


def _validate_qmc(cfg: RunConfig, errors: list[str]) -> None:
    if cfg.qmc_delta_tau <= 0:
        errors.append(f"qmc.delta_tau must be positive, got {cfg.qmc_delta_tau}")
    for name in ("warmup_sweeps", "measure_sweeps", "bin_size", "stabilization_interval"):
        value = getattr(cfg, f"qmc_{name}")
        if value < 1:
            errors.append(f"qmc.{name} must be positive, got {value}")
    if (
        cfg.qmc_measure_sweeps >= 1
        and cfg.qmc_bin_size >= 1
        and cfg.qmc_measure_sweeps % cfg.qmc_bin_size
    ):
        errors.append(
            f"qmc.measure_sweeps={cfg.qmc_measure_sweeps} must be a multiple of "
            f"qmc.bin_size={cfg.qmc_bin_size}"
        )


def validate(cfg: RunConfig, command: str) -> None:
    """Check every field the command needs; raise with the full error list."""
    errors: list[str] = []
    if command in ("witness-scan", "tc-vs-u", "qmc-run"):
        _validate_geometry(cfg, errors)
        _validate_model(cfg, errors)
    if command in ("witness-scan", "qmc-run"):
        _validate_grid(
            "temperature",
            cfg.temperature_values,
            cfg.temperature_min,
            cfg.temperature_max,
            cfg.temperature_count,
            cfg.temperature_spacing,
            errors,
        )
    if command == "tc-vs-u":
        _validate_grid(
            "ugrid", cfg.ugrid_values, cfg.ugrid_min, cfg.ugrid_max,
            cfg.ugrid_count, cfg.ugrid_spacing, errors,
        )
        _validate_grid(
            "temperature", None, cfg.temperature_min, cfg.temperature_max,
            1, cfg.temperature_spacing, errors,
        )
        if cfg.ugrid_values is not None and any(
            b <= a for a, b in zip(cfg.ugrid_values, cfg.ugrid_values[1:])
        ):
            errors.append(f"ugrid.values must be strictly increasing, got {cfg.ugrid_values}")
    if command == "witness-scan" and cfg.run_method not in ("ed", "qmc"):
        errors.append(f"run.method must be ed|qmc, got {cfg.run_method!r}")
    if command == "qmc-run" or (command == "witness-scan" and cfg.run_method == "qmc"):
        _validate_qmc(cfg, errors)
    if command == "extrapolate":
        _validate_model(cfg, errors)
        if cfg.extrapolation_points is None:
            sizes = cfg.extrapolation_sizes
            if len(sizes) < 3 or len(set(sizes)) != len(sizes):
                errors.append(
                    f"extrapolation.sizes needs at least 3 distinct chain sizes, got {sizes}"
                )
            if any(n < 2 or n % 2 for n in sizes):
                errors.append(
                    f"extrapolation.sizes must be even sizes >= 2 (odd chains have no "
                    f"critical temperature at weak coupling), got {sizes}"
                )
        for order in (*cfg.extrapolation_orders, cfg.extrapolation_order):
            n_points = len(cfg.extrapolation_points or cfg.extrapolation_sizes)
            if not 1 <= order < max(n_points, 2):
                errors.append(f"extrapolation order {order} impossible with {n_points} points")
    if errors:
        raise ConfigError(errors)
