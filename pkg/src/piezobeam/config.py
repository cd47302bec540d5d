"""Configuration loading: beam description files and run settings.

Beam files are INI-style with three sections.  Every key is optional and
defaults to the reference laboratory values; unknown keys are rejected by
name so typos cannot silently fall back to defaults.

    [geometry.piezo]
    length = 1.0
    g_b = 0.1
    h_a = 0.0
    h_b = 0.01

    [geometry.substrate]
    length = 1.0
    g_b = 0.1
    h_a = -0.01
    h_b = 0.0

    [material]
    rho_s = 5000.0
    c11_s = 1e5
    rho_p = 7600.0
    c11_p = 1.4e7
    gamma = 1e-3
    beta = 1e6
    mu = 1.2e6

An optional ``[run]`` section may preset run settings (scheme, n, variant,
gain, dt, t_end, snapshot_t, seed).  Precedence is file < environment
(``PIEZOBEAM_*``) < command-line flags.
"""
from __future__ import annotations

import configparser
import json
import os
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .materials import (
    DEFAULT_MATERIAL,
    CompositeParams,
    LayerGeometry,
    MaterialParams,
    composite_params,
    default_piezo_geometry,
    default_substrate_geometry,
)

_GEOMETRY_KEYS = ("length", "g_b", "h_a", "h_b")
_MATERIAL_KEYS = ("rho_s", "c11_s", "rho_p", "c11_p", "gamma", "beta", "mu")
_RUN_KEYS = ("scheme", "n", "variant", "gain", "dt", "t_end", "snapshot_t", "seed")
ENV_PREFIX = "PIEZOBEAM_"


def _section(parser, name, allowed) -> dict:
    if not parser.has_section(name):
        return {}
    out = {}
    for key, value in parser.items(name):
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in section [{name}]")
        out[key] = value
    return out


def load_beam_file(path):
    """Parse a beam description file into (material, piezo, substrate)."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    for section in parser.sections():
        if section not in ("geometry.piezo", "geometry.substrate", "material", "run"):
            raise ConfigError(f"unknown section [{section}]")
    mat_kv = _section(parser, "material", _MATERIAL_KEYS)
    piezo_kv = _section(parser, "geometry.piezo", _GEOMETRY_KEYS)
    sub_kv = _section(parser, "geometry.substrate", _GEOMETRY_KEYS)

    def floats(defaults, overrides, where):
        merged = dict(defaults)
        for key, value in overrides.items():
            try:
                merged[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"key {key!r} in [{where}] is not a number: {value!r}") from exc
        return merged

    material = MaterialParams(**floats(asdict(DEFAULT_MATERIAL), mat_kv, "material"))
    piezo_default = default_piezo_geometry()
    sub_default = default_substrate_geometry()
    piezo = LayerGeometry(**floats(
        {k: getattr(piezo_default, k) for k in _GEOMETRY_KEYS}, piezo_kv, "geometry.piezo"))
    substrate = LayerGeometry(**floats(
        {k: getattr(sub_default, k) for k in _GEOMETRY_KEYS}, sub_kv, "geometry.substrate"))
    return material, piezo, substrate


def load_params(path=None) -> CompositeParams:
    """Composite parameters from a beam file, or the defaults if no file."""
    if path is None:
        return composite_params(DEFAULT_MATERIAL, default_piezo_geometry(),
                                default_substrate_geometry())
    material, piezo, substrate = load_beam_file(path)
    return composite_params(material, piezo, substrate)


@dataclass
class RunConfig:
    """Resolved run settings; echoed into every output directory."""

    schemes: tuple[str, ...] = ("fem",)
    n_list: tuple[int, ...] = (20,)
    variant: str = "standard"
    gain: float = 1.0
    dt: float | None = None
    t_end: float = 50.0
    snapshot_t: float = 845.0
    seed: int = 0
    out_dir: str = "piezobeam-out"
    config_path: str | None = None

    def to_json(self) -> str:
        payload = asdict(self)
        payload["schemes"] = list(self.schemes)
        payload["n_list"] = list(self.n_list)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _parse_schemes(text: str) -> tuple[str, ...]:
    schemes = tuple(s.strip().lower() for s in text.split(",") if s.strip())
    for s in schemes:
        if s not in ("fem", "mfem"):
            raise ConfigError(f"unknown scheme {s!r}, expected fem or mfem")
    if not schemes:
        raise ConfigError("empty scheme list")
    return schemes


def _parse_n_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad segment count list {text!r}") from exc
    if not values or any(v < 1 for v in values):
        raise ConfigError(f"segment counts must be positive, got {text!r}")
    return values


def resolve_run_config(args) -> RunConfig:
    """Merge defaults, the file [run] section, environment, and flags."""
    cfg = RunConfig()
    cfg.config_path = getattr(args, "config", None)

    layered: dict[str, str] = {}
    if cfg.config_path:
        parser = configparser.ConfigParser()
        if not parser.read(cfg.config_path):
            raise ConfigError(f"cannot read config file {cfg.config_path!r}")
        layered.update(_section(parser, "run", _RUN_KEYS))
    for key in _RUN_KEYS:
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            layered[key] = env
    flag_map = {
        "scheme": getattr(args, "scheme", None),
        "n": getattr(args, "n", None),
        "variant": getattr(args, "variant", None),
        "gain": getattr(args, "gain", None),
        "dt": getattr(args, "dt", None),
        "t_end": getattr(args, "t_end", None),
        "snapshot_t": getattr(args, "snapshot_t", None),
        "seed": getattr(args, "seed", None),
    }
    for key, value in flag_map.items():
        if value is not None:
            layered[key] = str(value)

    try:
        if "scheme" in layered:
            cfg.schemes = _parse_schemes(layered["scheme"])
        if "n" in layered:
            cfg.n_list = _parse_n_list(layered["n"])
        if "variant" in layered:
            if layered["variant"] not in ("standard", "paper"):
                raise ConfigError(f"unknown variant {layered['variant']!r}")
            cfg.variant = layered["variant"]
        if "gain" in layered:
            cfg.gain = float(layered["gain"])
        if "dt" in layered:
            cfg.dt = float(layered["dt"])
        if "t_end" in layered:
            cfg.t_end = float(layered["t_end"])
        if "snapshot_t" in layered:
            cfg.snapshot_t = float(layered["snapshot_t"])
        if "seed" in layered:
            cfg.seed = int(layered["seed"])
    except ValueError as exc:
        raise ConfigError(f"bad run setting: {exc}") from exc

    out = getattr(args, "out", None)
    if out is not None:
        cfg.out_dir = out
    return cfg
