"""Config-file parsing for the CLI.

Flat, sectioned key = value text (configparser syntax). Keys carry their
units in the name (pressure_mbar, v_pp_volts, ...) and unknown sections or
keys are hard errors so typos in physics constants cannot pass silently.
"""

import configparser
import os

from .errors import ConfigError
from .gas import GasEnvironment
from .odmr import ContrastModel
from .protocols import (
    ProtocolConfig,
    PumpdownSettings,
    SpectroscopyDesign,
    StabilityMapSettings,
)
from .spin import SpinParams, ZfsCoefficients
from .thermal import AbsorptionModel, LaserBeam
from .trap import ParticleState, TrapConfig


def _parse_float(raw, key):
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number: {raw!r}") from exc


def _parse_int(raw, key):
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: not an integer: {raw!r}") from exc


def _parse_floats(raw, key):
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number list: {raw!r}") from exc


def _parse_str(raw, key):
    return raw.strip()


# section -> key -> parser; every key a config file may contain appears here
_SCHEMA = {
    "run": {"scenario": _parse_str, "seed": _parse_int,
            "description": _parse_str},
    "trap": {"v_pp_volts": _parse_float, "drive_freq_hz": _parse_float,
             "r0_m": _parse_float, "kappa": _parse_float,
             "v_dc_volts": _parse_float, "dc_field_v_per_m": _parse_floats},
    "particle": {"diameter_m": _parse_float, "density_kg_m3": _parse_float,
                 "charge_c": _parse_float},
    "gas": {"pressure_mbar": _parse_float, "temperature_k": _parse_float,
            "molecule_mass_kg": _parse_float,
            "molecule_diameter_m": _parse_float,
            "accommodation": _parse_float},
    "beam": {"power_w": _parse_float, "waist_m": _parse_float,
             "wavelength_m": _parse_float},
    "absorption": {"cross_section_m2": _parse_float,
                   "intensity_overlap": _parse_float},
    "thermal": {"emissivity": _parse_float},
    "zfs": {"a0_ghz": _parse_float, "a1_ghz_per_k": _parse_float,
            "a2_ghz_per_k2": _parse_float, "a3_ghz_per_k3": _parse_float,
            "t_min_k": _parse_float, "t_max_k": _parse_float},
    "contrast": {"c_ref": _parse_float, "t_ref_k": _parse_float,
                 "slope_per_k": _parse_float, "floor": _parse_float},
    "spectroscopy": {"f_start_ghz": _parse_float, "f_stop_ghz": _parse_float,
                     "n_points": _parse_int, "sigma_ghz": _parse_float,
                     "s_max_cps": _parse_float, "noise_scale": _parse_float,
                     "noise_kind": _parse_str, "e_strain_ghz": _parse_float},
    "sweep": {"grid": _parse_floats},
    "preselect": {"accept_threshold_hz": _parse_float},
    "pumpdown": {"v_pp_end_volts": _parse_float, "ramp_steps": _parse_int,
                 "pressures_mbar": _parse_floats,
                 "stray_force_n": _parse_floats,
                 "steps_per_period": _parse_int,
                 "settle_constants": _parse_float,
                 "window_periods": _parse_int},
    "stability_map": {"q_values": _parse_floats, "a_values": _parse_floats,
                      "gamma_norm_values": _parse_floats},
    "odmr": {"spectrum_csv": _parse_str, "shape": _parse_str,
             "d_zfs_ghz": _parse_float, "e_strain_ghz": _parse_float,
             "contrast": _parse_float},
    "invert": {"d_ghz": _parse_float, "sigma_d_ghz": _parse_float},
}


def load_config(path):
    """Parse and validate a config file into {section: {key: value}}."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    out = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        schema = _SCHEMA[section]
        values = {}
        for key, raw in parser.items(section):
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[key] = schema[key](raw, f"[{section}] {key}")
        out[section] = values
    return out


def _section(cfg, name):
    return cfg.get(name, {})


def _build(cls, kwargs):
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid {cls.__name__}: {exc}") from exc


def build_trap(cfg):
    sec = _section(cfg, "trap")
    if not sec:
        return None
    if "v_pp_volts" not in sec or "drive_freq_hz" not in sec:
        raise ConfigError("[trap] needs v_pp_volts and drive_freq_hz")
    kwargs = {"v_pp": sec["v_pp_volts"],
              "omega_drive": 6.283185307179586 * sec["drive_freq_hz"]}
    if "r0_m" in sec:
        kwargs["r0"] = sec["r0_m"]
    if "kappa" in sec:
        kwargs["kappa"] = sec["kappa"]
    if "v_dc_volts" in sec:
        kwargs["v_dc"] = sec["v_dc_volts"]
    if "dc_field_v_per_m" in sec:
        field = sec["dc_field_v_per_m"]
        if len(field) != 3:
            raise ConfigError("[trap] dc_field_v_per_m needs three components")
        kwargs["dc_field"] = field
    return _build(TrapConfig, kwargs)


def build_particle(cfg):
    sec = _section(cfg, "particle")
    if not sec:
        return None
    for key in ("diameter_m", "density_kg_m3", "charge_c"):
        if key not in sec:
            raise ConfigError(f"[particle] needs {key}")
    try:
        return ParticleState.from_diameter(diameter=sec["diameter_m"],
                                           density=sec["density_kg_m3"],
                                           charge=sec["charge_c"])
    except ValueError as exc:
        raise ConfigError(f"invalid particle: {exc}") from exc


def build_gas(cfg):
    sec = _section(cfg, "gas")
    if not sec:
        return None
    if "pressure_mbar" not in sec:
        raise ConfigError("[gas] needs pressure_mbar")
    kwargs = {"pressure_mbar": sec["pressure_mbar"]}
    for src, dst in (("temperature_k", "temperature"),
                     ("molecule_mass_kg", "molecule_mass"),
                     ("molecule_diameter_m", "molecule_diameter"),
                     ("accommodation", "accommodation")):
        if src in sec:
            kwargs[dst] = sec[src]
    return _build(GasEnvironment, kwargs)


def build_beam(cfg):
    sec = _section(cfg, "beam")
    if not sec:
        return None
    if "power_w" not in sec:
        raise ConfigError("[beam] needs power_w")
    kwargs = {"power": sec["power_w"]}
    if "waist_m" in sec:
        kwargs["waist"] = sec["waist_m"]
    if "wavelength_m" in sec:
        kwargs["wavelength"] = sec["wavelength_m"]
    return _build(LaserBeam, kwargs)


def build_absorption(cfg):
    sec = _section(cfg, "absorption")
    if not sec:
        return None
    kwargs = {}
    if "cross_section_m2" in sec:
        kwargs["effective_cross_section"] = sec["cross_section_m2"]
    if "intensity_overlap" in sec:
        kwargs["intensity_overlap"] = sec["intensity_overlap"]
    return _build(AbsorptionModel, kwargs)


def build_zfs(cfg):
    sec = _section(cfg, "zfs")
    kwargs = {}
    for src, dst in (("a0_ghz", "a0"), ("a1_ghz_per_k", "a1"),
                     ("a2_ghz_per_k2", "a2"), ("a3_ghz_per_k3", "a3")):
        if src in sec:
            kwargs[dst] = sec[src]
    if "t_min_k" in sec or "t_max_k" in sec:
        if not ("t_min_k" in sec and "t_max_k" in sec):
            raise ConfigError("[zfs] needs both t_min_k and t_max_k")
        kwargs["valid_range"] = (sec["t_min_k"], sec["t_max_k"])
    return _build(ZfsCoefficients, kwargs)


def build_contrast(cfg):
    sec = _section(cfg, "contrast")
    kwargs = {}
    for src, dst in (("c_ref", "c_ref"), ("t_ref_k", "t_ref"),
                     ("slope_per_k", "slope"), ("floor", "floor")):
        if src in sec:
            kwargs[dst] = sec[src]
    return _build(ContrastModel, kwargs)


def build_spectroscopy(cfg):
    sec = _section(cfg, "spectroscopy")
    kwargs = {}
    for src, dst in (("f_start_ghz", "f_start"), ("f_stop_ghz", "f_stop"),
                     ("n_points", "n_points"), ("sigma_ghz", "sigma"),
                     ("s_max_cps", "s_max"), ("noise_scale", "noise_scale"),
                     ("noise_kind", "noise_kind")):
        if src in sec:
            kwargs[dst] = sec[src]
    design = _build(SpectroscopyDesign, kwargs)
    e_strain = sec.get("e_strain_ghz")
    return design, e_strain


def build_protocol_config(cfg, scenario, seed_override=None):
    """Assemble a :class:`ProtocolConfig` for the requested scenario."""
    run = _section(cfg, "run")
    declared = run.get("scenario")
    if declared is not None and declared != scenario:
        raise ConfigError(
            f"config declares scenario {declared!r} but the command expects "
            f"{scenario!r}")
    seed = seed_override if seed_override is not None else run.get("seed", 0)

    design, e_strain = build_spectroscopy(cfg)
    kwargs = {
        "scenario": scenario,
        "trap": build_trap(cfg),
        "particle": build_particle(cfg),
        "gas": build_gas(cfg),
        "beam": build_beam(cfg),
        "absorption": build_absorption(cfg),
        "zfs": build_zfs(cfg),
        "contrast": build_contrast(cfg),
        "spectroscopy": design,
        "seed": seed,
        "grid": _section(cfg, "sweep").get("grid", ()),
    }
    if e_strain is not None:
        kwargs["e_strain"] = e_strain
    thermal_sec = _section(cfg, "thermal")
    if "emissivity" in thermal_sec:
        kwargs["emissivity"] = thermal_sec["emissivity"]

    pre = _section(cfg, "preselect")
    if "accept_threshold_hz" in pre:
        kwargs["preselect_accept_hz"] = pre["accept_threshold_hz"]

    pd_sec = _section(cfg, "pumpdown")
    if pd_sec:
        pd_kwargs = {}
        for src, dst in (("v_pp_end_volts", "v_pp_end"),
                         ("ramp_steps", "ramp_steps"),
                         ("pressures_mbar", "pressures_mbar"),
                         ("stray_force_n", "stray_force"),
                         ("steps_per_period", "steps_per_period"),
                         ("settle_constants", "settle_constants"),
                         ("window_periods", "window_periods")):
            if src in pd_sec:
                pd_kwargs[dst] = pd_sec[src]
        if "stray_force" in pd_kwargs and len(pd_kwargs["stray_force"]) != 3:
            raise ConfigError("[pumpdown] stray_force_n needs three components")
        kwargs["pumpdown"] = _build(PumpdownSettings, pd_kwargs)

    sm_sec = _section(cfg, "stability_map")
    if sm_sec:
        if "q_values" not in sm_sec:
            raise ConfigError("[stability_map] needs q_values")
        sm_kwargs = {"q_values": sm_sec["q_values"]}
        if "a_values" in sm_sec:
            sm_kwargs["a_values"] = sm_sec["a_values"]
        if "gamma_norm_values" in sm_sec:
            sm_kwargs["gamma_norm_values"] = sm_sec["gamma_norm_values"]
        kwargs["stability_map"] = _build(StabilityMapSettings, sm_kwargs)

    try:
        return ProtocolConfig(**kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def build_synth_spin(cfg):
    """SpinParams + synthesis contrast for the synth-odmr command."""
    sec = _section(cfg, "odmr")
    if "d_zfs_ghz" not in sec:
        raise ConfigError("[odmr] needs d_zfs_ghz for synthesis")
    params = _build(SpinParams, {"d_zfs": sec["d_zfs_ghz"],
                                 "e_strain": sec.get("e_strain_ghz", 0.0)})
    contrast = sec.get("contrast", 0.02)
    shape = sec.get("shape", "gaussian")
    return params, contrast, shape
