"""Command-line front end: scans, sweeps, extrapolation, QMC runs, plot scripts.

Subcommands: witness-scan, tc-vs-u, extrapolate, qmc-run, plot.  Every
computation writes CSV with a '#' metadata preamble carrying the complete
effective configuration, so a run can be reproduced from its output alone.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .config import SCHEMA, ConfigError, RunConfig, load_config, validate
from .critical import ChainTcTable, default_workers, extrapolation_analysis, tc_vs_u_sweep
from .csvio import write_table
from .dqmc import QmcConfig, QmcError, qmc_tc_bracket, run_qmc
from .ed import solve_sectors
from .thermo import thermal_observables

# published extrapolation targets used by the `extrapolate` report
TARGET_TC_MAX = 0.712
TARGET_U_MAX = 4.1
TARGET_ETA = 1.568

WITNESS_COLUMNS = ["T", "chi_z", "l0_z", "witness_e"]
WITNESS_ERR_COLUMNS = WITNESS_COLUMNS + ["err_chi_z", "err_l0_z", "err_witness_e"]
QMC_COLUMNS = [
    "T",
    "chi_z", "err_chi_z",
    "l0_z", "err_l0_z",
    "witness_e", "err_witness_e",
    "filling", "err_filling",
    "energy", "err_energy",
    "acceptance_rate", "stability_warnings",
]


def _threads(cfg: RunConfig) -> int | None:
    return cfg.run_threads if cfg.run_threads is not None else default_workers()


def _parallel_map(fn, items, workers):
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))  # map preserves grid order
    return [fn(item) for item in items]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_witness_scan(cfg: RunConfig) -> int:
    geom, params, ens = cfg.geometry(), cfg.params(), cfg.ensemble()
    temps = cfg.temperatures()
    meta = cfg.metadata("witness-scan", __version__)

    if cfg.run_method == "ed":
        spectra = solve_sectors(geom, params, ens.sectors(geom.n_sites), workers=_threads(cfg))

        def row(temperature):
            obs = thermal_observables(spectra, ens, temperature)
            return [obs.temperature, obs.chi_z, obs.l0_z, obs.witness_e]

        rows = _parallel_map(row, temps, _threads(cfg))
        columns = WITNESS_COLUMNS
    else:
        estimates = _qmc_over_grid(cfg, temps, log_path=None)
        columns = WITNESS_ERR_COLUMNS
        rows = [
            [e.temperature, e.chi_z.mean, e.l0_z.mean, e.witness_e.mean,
             e.chi_z.err, e.l0_z.err, e.witness_e.err]
            for e in estimates
        ]

    write_table(cfg.output_csv, meta, columns, rows)
    print(f"witness-scan: {len(rows)} temperatures -> {cfg.output_csv}")
    return 0


def cmd_tc_vs_u(cfg: RunConfig) -> int:
    geom, ens = cfg.geometry(), cfg.ensemble()
    window = (cfg.temperature_min, cfg.temperature_max)
    curve = tc_vs_u_sweep(
        geom, ens, cfg.u_values(), window, t=cfg.model_t, workers=_threads(cfg)
    )
    meta = cfg.metadata("tc-vs-u", __version__)
    if curve.u_max is not None:
        meta["u_max"] = repr(curve.u_max)
        meta["tc_max"] = repr(curve.tc_max)
    rows = [[p.u, p.tc, p.status] for p in curve.points]
    write_table(cfg.output_csv, meta, ["U", "Tc", "status"], rows)
    found = sum(1 for p in curve.points if p.tc is not None)
    print(f"tc-vs-u: {found}/{len(rows)} crossings -> {cfg.output_csv}")
    if curve.u_max is not None:
        print(f"tc-vs-u: maximum tc = {curve.tc_max:.6f} at U = {curve.u_max:.3f}")
    return 0


def cmd_extrapolate(cfg: RunConfig) -> int:
    from .critical import extrapolate_thermodynamic
    from .thermo import Ensemble, EnsembleKind

    meta = cfg.metadata("extrapolate", __version__)
    orders = sorted(set((*cfg.extrapolation_orders, cfg.extrapolation_order)))

    if cfg.extrapolation_points is not None:
        rows = []
        for order in orders:
            value = extrapolate_thermodynamic(cfg.extrapolation_points, order=order)
            rows.append([order, value])
            print(f"extrapolate[synthetic] order={order}: tc(inf) = {value!r}")
        if cfg.output_csv:
            write_table(cfg.output_csv, meta, ["order", "tc_infinity"], rows)
        return 0

    ens = Ensemble(EnsembleKind(cfg.ensemble_kind))
    t_window = (cfg.temperature_min or 0.02, cfg.temperature_max or 20.0)
    results = {
        order: extrapolation_analysis(
            sizes=cfg.extrapolation_sizes,
            ens=ens,
            order=order,
            eta_us=cfg.extrapolation_eta_us,
            t_window=t_window,
        )
        for order in orders
    }
    headline = results[cfg.extrapolation_order]
    print(
        f"extrapolate: tc_max = {headline.tc_max:.4f} at U = {headline.u_max:.3f} "
        f"(targets {TARGET_TC_MAX} at {TARGET_U_MAX}; deviations "
        f"{headline.tc_max - TARGET_TC_MAX:+.4f}, {headline.u_max - TARGET_U_MAX:+.3f})"
    )
    print(
        f"extrapolate: eta(inf) = {headline.eta_infinity:.4f} "
        f"(target {TARGET_ETA}; deviation {headline.eta_infinity - TARGET_ETA:+.4f})"
    )
    for order, res in results.items():
        tag = " (headline)" if order == cfg.extrapolation_order else ""
        print(
            f"  order {order}{tag}: tc_max={res.tc_max:.4f} u_max={res.u_max:.3f} "
            f"eta_inf={res.eta_infinity:.4f}"
        )
        meta[f"order{order}.tc_max"] = repr(res.tc_max)
        meta[f"order{order}.u_max"] = repr(res.u_max)
        meta[f"order{order}.eta_infinity"] = repr(res.eta_infinity)

    if cfg.output_csv:
        # extrapolated curve over the configured U grid, one column per order
        u_values = cfg.u_values() if cfg.ugrid_values or cfg.ugrid_min else tuple(
            float(u) for u in (0.5, 1, 1.5, 2, 3, 4, 5, 6, 8, 10, 12, 16, 24, 32, 48, 64)
        )
        table = ChainTcTable(cfg.extrapolation_sizes, ens, t_window, t=cfg.model_t)
        columns = ["U"] + [f"tc_n{n}" for n in cfg.extrapolation_sizes] + [
            f"tc_inf_order{order}" for order in orders
        ]
        rows = []
        for u in u_values:
            per_n = [table.tc(n, u) for n in cfg.extrapolation_sizes]
            rows.append([u, *per_n, *(table.extrapolated(u, order) for order in orders)])
        write_table(cfg.output_csv, meta, columns, rows)
        print(f"extrapolate: curve over {len(rows)} U values -> {cfg.output_csv}")
    return 0


def _qmc_over_grid(cfg: RunConfig, temps, log_path):
    geom, params = cfg.geometry(), cfg.params()

    def make_config(index_temp):
        index, temperature = index_temp
        return QmcConfig(
            geometry=geom,
            params=params,
            beta=1.0 / temperature,
            delta_tau=cfg.qmc_delta_tau,
            warmup_sweeps=cfg.qmc_warmup_sweeps,
            measure_sweeps=cfg.qmc_measure_sweeps,
            bin_size=cfg.qmc_bin_size,
            stabilization_interval=cfg.qmc_stabilization_interval,
            rng_seed=cfg.qmc_seed + index,
        )

    try:
        configs = [make_config(item) for item in enumerate(temps)]
    except QmcError as exc:
        raise ConfigError([f"temperature grid incompatible with qmc.delta_tau: {exc}"])

    workers = _threads(cfg)
    if log_path is not None:
        # keep the append-only log in grid order
        return [run_qmc(c, log_path=log_path) for c in configs]
    return _parallel_map(run_qmc, configs, workers)


def cmd_qmc_run(cfg: RunConfig) -> int:
    temps = cfg.temperatures()
    estimates = _qmc_over_grid(cfg, temps, log_path=cfg.output_log)
    meta = cfg.metadata("qmc-run", __version__)
    bracket = qmc_tc_bracket(estimates, n_sigma=2.0)
    if bracket is not None:
        meta["tc_bracket_low"] = repr(bracket[0])
        meta["tc_bracket_high"] = repr(bracket[1])
        meta["tc_bracket_sigma"] = "2.0"
    rows = [
        [e.temperature,
         e.chi_z.mean, e.chi_z.err,
         e.l0_z.mean, e.l0_z.err,
         e.witness_e.mean, e.witness_e.err,
         e.filling.mean, e.filling.err,
         e.energy.mean, e.energy.err,
         e.acceptance_rate, e.stability_warnings]
        for e in estimates
    ]
    write_table(cfg.output_csv, meta, QMC_COLUMNS, rows)
    print(f"qmc-run: {len(rows)} temperatures -> {cfg.output_csv}")
    if bracket is not None:
        print(f"qmc-run: witness sign change bracketed in T = [{bracket[0]!r}, {bracket[1]!r}] (2 sigma)")
    else:
        print("qmc-run: no significant witness sign change on this grid")
    warned = sum(e.stability_warnings for e in estimates)
    if warned:
        print(f"qmc-run: {warned} stability warnings; inspect max_green_deviation", file=sys.stderr)
    return 0


_PLOT_TEMPLATE = '''\
#!/usr/bin/env python3
"""Auto-generated plot script ({kind} panels). Renders {n} CSV file(s)."""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_table(path):
    metadata, columns, rows = {{}}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                metadata[key.strip()] = value.strip()
            elif columns is None:
                columns = line.split(",")
            else:
                rows.append([cell if cell else None for cell in line.split(",")])
    return metadata, columns, rows


def column(columns, rows, name, rows_filter=None):
    k = columns.index(name)
    out = []
    for row in rows:
        if rows_filter is not None and not rows_filter(columns, row):
            continue
        out.append(float(row[k]) if row[k] is not None else float("nan"))
    return out


paths = {paths!r}
fig, ax = plt.subplots(figsize=(5.0, 3.6))
{body}
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig({out_png!r}, dpi=160)
print("wrote", {out_png!r})
'''

_PLOT_BODIES = {
    "witness": """\
for path in paths:
    meta, columns, rows = read_table(path)
    label = f"U={meta.get('model.u', '?')} {meta.get('ensemble.kind', '')}"
    temps = column(columns, rows, "T")
    values = column(columns, rows, "witness_e")
    if "err_witness_e" in columns:
        ax.errorbar(temps, values, yerr=column(columns, rows, "err_witness_e"),
                    fmt="o-", ms=3, lw=1, label=label)
    else:
        ax.plot(temps, values, lw=1.2, label=label)
ax.axhline(0.0, color="k", lw=0.6)
ax.set_xlabel("T / t")
ax.set_ylabel("witness")
ax.set_xlim(0, 5)
""",
    "tc": """\
for path in paths:
    meta, columns, rows = read_table(path)
    ok = lambda cols, row: row[cols.index("status")] == "ok"
    us = column(columns, rows, "U", ok)
    tcs = column(columns, rows, "Tc", ok)
    style = "--" if meta.get("geometry.kind") == "ring" else "-"
    label = f"{meta.get('geometry.kind','?')} {meta.get('geometry.dims','?')} {meta.get('ensemble.kind','')}"
    ax.plot(us, tcs, style, lw=1.2, label=label)
ax.set_xscale("log")
ax.set_xlabel("U / t")
ax.set_ylabel("T_c / t")
""",
    "qmc": """\
for path in paths:
    meta, columns, rows = read_table(path)
    label = f"{meta.get('geometry.kind','?')} {meta.get('geometry.dims','?')} U={meta.get('model.u','?')}"
    temps = column(columns, rows, "T")
    ax.errorbar(temps, column(columns, rows, "witness_e"),
                yerr=column(columns, rows, "err_witness_e"),
                fmt="o", ms=3, lw=1, label=label)
ax.axhline(0.0, color="k", lw=0.6)
ax.set_xlabel("T / t")
ax.set_ylabel("witness")
""",
}


def cmd_plot(kind: str, csv_paths: list[str], out: str) -> int:
    script = _PLOT_TEMPLATE.format(
        kind=kind,
        n=len(csv_paths),
        paths=list(csv_paths),
        body=_PLOT_BODIES[kind],
        out_png=out.rsplit(".", 1)[0] + ".png",
    )
    with open(out, "w") as fh:
        fh.write(script)
    print(f"plot: wrote {out} (not executed)")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file; flags override its values")
    for (section, key), (_, _, help_text) in SCHEMA.items():
        parser.add_argument(f"--{section}-{key.replace('_', '-')}", dest=f"{section}-{key}",
                            metavar="V", help=help_text)


def _collect_overrides(args: argparse.Namespace) -> dict[str, str]:
    return {
        flag: value
        for flag, value in vars(args).items()
        if "-" in flag and value is not None
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hubwit",
        description="Thermal entanglement witness for the half-filled Hubbard model",
    )
    parser.add_argument("--version", action="version", version=f"hubwit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("witness-scan", "witness vs temperature for one cluster (ED or QMC)"),
        ("tc-vs-u", "critical temperature vs interaction strength"),
        ("extrapolate", "thermodynamic-limit extrapolation from chain sizes"),
        ("qmc-run", "determinant QMC estimates over a temperature grid"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)

    plot = sub.add_parser("plot", help="emit a matplotlib script for existing CSVs")
    plot.add_argument("csv", nargs="+", help="CSV files produced by the other commands")
    plot.add_argument("--kind", choices=sorted(_PLOT_BODIES), required=True)
    plot.add_argument("--out", required=True, help="path of the generated .py script")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "plot":
        return cmd_plot(args.kind, args.csv, args.out)

    try:
        cfg = load_config(args.config, _collect_overrides(args))
        validate(cfg, args.command)
        if args.command != "extrapolate" and not cfg.output_csv:
            raise ConfigError(["output.csv is required"])
        handler = {
            "witness-scan": cmd_witness_scan,
            "tc-vs-u": cmd_tc_vs_u,
            "extrapolate": cmd_extrapolate,
            "qmc-run": cmd_qmc_run,
        }[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
