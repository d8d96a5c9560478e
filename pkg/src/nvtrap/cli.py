"""Command-line interface.

Subcommands: stability-map, preselect, pumpdown, sweep-power, sweep-pressure,
synth-odmr, fit-odmr, invert-temp. Every run writes its outputs atomically
into --out together with a manifest (config echo, package version, seed).
Exit codes: 0 success, 1 configuration/usage error, 2 runtime protocol error.
"""

import argparse
import os
import sys
from dataclasses import replace
from importlib import resources

from . import __version__, configio, output, protocols
from .errors import ConfigError, NvtrapError
from .odmr import NoiseSpec, fit_double_gaussian, read_spectrum_csv, \
    synthesize_spectrum, write_spectrum_csv
from .spin import zfs_slope
from .thermometry import ThermoEstimate, invert_zfs

GOLDEN_SPECTRUM_TOKEN = "builtin:golden"


def golden_spectrum_path():
    """Filesystem path of the shipped synthetic reference spectrum."""
    return str(resources.files("nvtrap").joinpath("data/golden_esr_spectrum.csv"))


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the CLI contract wants 1
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def _build_parser():
    parser = _Parser(prog="nvtrap", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("stability-map", "preselect", "pumpdown", "sweep-power",
                 "sweep-pressure", "synth-odmr", "fit-odmr", "invert-temp"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the [run] seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="table output format (spectra are always CSV)")
    return parser


def _table_payload(columns, rows):
    return [dict(zip(columns, row)) for row in rows]


def _write_table(outdir, stem, columns, rows, fmt):
    if fmt == "json":
        name = f"{stem}.json"
        output.write_json(os.path.join(outdir, name),
                          _table_payload(columns, rows))
    else:
        name = f"{stem}.csv"
        output.write_csv(os.path.join(outdir, name), columns, rows)
    return [name]


def _sweep_svgs(outdir, stem, table):
    written = []
    controls = [r.control for r in table.rows]
    for field_name, label, suffix in (
            ("t_inferred", "inferred temperature (K)", "temperature"),
            ("contrast_fit", "ESR contrast", "contrast")):
        ys = [getattr(r, field_name) for r in table.rows]
        svg = output.svg_line_plot(controls, ys, table.control_label, label,
                                   f"{stem} {suffix}")
        name = f"{stem}_{suffix}.svg"
        output.atomic_write_text(os.path.join(outdir, name), svg)
        written.append(name)
    return written


def _cmd_sweep_power(args, cfg, outdir, fmt):
    pc = configio.build_protocol_config(cfg, "sweep_power", args.seed)
    table = protocols.run_power_sweep(pc)
    written = _write_table(outdir, "sweep_power", table.columns(),
                           table.to_rows(), fmt)
    written += _sweep_svgs(outdir, "sweep_power", table)
    return written, pc.seed


def _cmd_sweep_pressure(args, cfg, outdir, fmt):
    pc = configio.build_protocol_config(cfg, "sweep_pressure", args.seed)
    table = protocols.run_pressure_sweep(pc)
    written = _write_table(outdir, "sweep_pressure", table.columns(),
                           table.to_rows(), fmt)
    written += _sweep_svgs(outdir, "sweep_pressure", table)
    return written, pc.seed


def _cmd_preselect(args, cfg, outdir, fmt):
    pc = configio.build_protocol_config(cfg, "preselect", args.seed)
    result = protocols.run_preselection(pc)
    output.write_json(os.path.join(outdir, "preselect.json"),
                      result.to_flat_dict())
    return ["preselect.json"], pc.seed


def _cmd_pumpdown(args, cfg, outdir, fmt):
    pc = configio.build_protocol_config(cfg, "pumpdown", args.seed)
    result = protocols.run_pumpdown(pc)
    written = _write_table(outdir, "pumpdown", result.COLUMNS,
                           result.to_rows(), fmt)
    output.write_json(os.path.join(outdir, "pumpdown_summary.json"), {
        "ramp_q_relative_spread": result.ramp_q_spread,
        "end_v_pp_volts": result.end_trap.v_pp,
        "end_drive_freq_hz": result.end_trap.omega_drive / 6.283185307179586,
    })
    written.append("pumpdown_summary.json")
    pressures = [r.pressure_mbar for r in result.rows]
    for field_name, label, suffix in (
            ("equilibrium_shift_m", "equilibrium shift (m)", "displacement"),
            ("micromotion_amplitude_m", "micromotion amplitude (m)",
             "micromotion")):
        ys = [getattr(r, field_name) for r in result.rows]
        svg = output.svg_line_plot(pressures, ys, "pressure_mbar", label,
                                   f"pumpdown {suffix}")
        name = f"pumpdown_{suffix}.svg"
        output.atomic_write_text(os.path.join(outdir, name), svg)
        written.append(name)
    return written, pc.seed


def _cmd_stability_map(args, cfg, outdir, fmt):
    pc = configio.build_protocol_config(cfg, "stability_map", args.seed)
    result = protocols.run_stability_map(pc)
    written = _write_table(outdir, "stability_map", result.COLUMNS,
                           result.to_rows(), fmt)
    return written, pc.seed


def _cmd_synth_odmr(args, cfg, outdir, fmt):
    run = cfg.get("run", {})
    seed = args.seed if args.seed is not None else run.get("seed", 0)
    params, contrast, shape = configio.build_synth_spin(cfg)
    design, _ = configio.build_spectroscopy(cfg)
    noise = None
    if design.noise_scale > 0.0:
        noise = NoiseSpec(kind=design.noise_kind, seed=seed,
                          scale=design.noise_scale)
    try:
        spectrum = synthesize_spectrum(
            params, contrast, design.s_max, design.sigma, design.f_start,
            design.f_stop, design.n_points, noise=noise, shape=shape)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_spectrum_csv(spectrum, os.path.join(outdir, "spectrum.csv"))
    return ["spectrum.csv"], seed


def _resolve_spectrum_path(raw, config_path):
    if raw == GOLDEN_SPECTRUM_TOKEN:
        return golden_spectrum_path()
    if os.path.isabs(raw):
        return raw
    return os.path.join(os.path.dirname(os.path.abspath(config_path)), raw)


def _cmd_fit_odmr(args, cfg, outdir, fmt):
    sec = cfg.get("odmr", {})
    if "spectrum_csv" not in sec:
        raise ConfigError("[odmr] needs spectrum_csv")
    path = _resolve_spectrum_path(sec["spectrum_csv"], args.config)
    if not os.path.isfile(path):
        raise ConfigError(f"spectrum file not found: {path}")
    try:
        spectrum = read_spectrum_csv(path)
    except ValueError as exc:
        raise ConfigError(f"cannot read spectrum {path}: {exc}") from exc
    fit = fit_double_gaussian(spectrum, shape=sec.get("shape", "gaussian"))
    output.write_json(os.path.join(outdir, "fit.json"), fit.to_flat_dict())
    seed = args.seed if args.seed is not None else cfg.get("run", {}).get("seed", 0)
    return ["fit.json"], seed


def _cmd_invert_temp(args, cfg, outdir, fmt):
    sec = cfg.get("invert", {})
    if "d_ghz" not in sec:
        raise ConfigError("[invert] needs d_ghz")
    coeffs = configio.build_zfs(cfg)
    t = invert_zfs(coeffs, sec["d_ghz"])
    sigma_d = sec.get("sigma_d_ghz", 0.0)
    sigma_t = sigma_d / abs(zfs_slope(coeffs, t)) if sigma_d else 0.0
    estimate = ThermoEstimate(temperature=t, sigma_t=sigma_t,
                              d_used=sec["d_ghz"],
                              extrapolated=not coeffs.in_valid_range(t))
    output.write_json(os.path.join(outdir, "temperature.json"),
                      estimate.to_flat_dict())
    seed = args.seed if args.seed is not None else cfg.get("run", {}).get("seed", 0)
    return ["temperature.json"], seed


_COMMANDS = {
    "sweep-power": _cmd_sweep_power,
    "sweep-pressure": _cmd_sweep_pressure,
    "preselect": _cmd_preselect,
    "pumpdown": _cmd_pumpdown,
    "stability-map": _cmd_stability_map,
    "synth-odmr": _cmd_synth_odmr,
    "fit-odmr": _cmd_fit_odmr,
    "invert-temp": _cmd_invert_temp,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    try:
        cfg = configio.load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        written, seed = _COMMANDS[args.command](args, cfg, args.out,
                                                args.format)
        manifest = output.build_manifest(args.command, seed, args.format, cfg,
                                         written, __version__)
        output.write_json(os.path.join(args.out, "manifest.json"), manifest)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NvtrapError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
