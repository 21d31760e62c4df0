"""YAML run configuration: defaults, ``--set`` overrides, validation, builders.

Frequencies are entered as ordinary frequencies in Hz (the code multiplies by
2 pi), lengths in metres and masses in kg. See README for the full schema.
"""

from __future__ import annotations

import copy
import itertools
import math
from pathlib import Path

import jsonschema
import yaml

from .dynamics import InitSpec, NumericsSpec
from .errors import ConfigError
from .trace import Mode
from .units import STANDARD_GRAVITY, PhysicalParams, preset

NUMBER = {"type": "number"}
OPT_NUMBER = {"type": ["number", "null"]}
INTEGER = {"type": "integer", "minimum": 1}
OPT_INTEGER = {"type": ["integer", "null"], "minimum": 4}

DEFAULTS: dict = {
    "units": {
        "species": "Rb87",
        "mass_kg": None,
        "wavelength_m": None,
        "gamma_hz": None,
        "g0_hz": 2.8e6,
        "kappa_hz": 1.0e6,
        "delta_hz": -1.0e12,
        "eta_hz": 39.0e6,
        "n_atoms": 5.0e4,
        "acceleration_ms2": STANDARD_GRAVITY,
        "force_n": None,
        "detector_efficiency": 0.6,
    },
    "bandstructure": {
        "basis_halfwidth": 16,
        "q_points": 101,
        "depths": [1.0, 3.0, 10.0],
        "bands": 4,
        "sign": 1,
    },
    "dynamics": {
        "mode": "full",
        "q0": 0.0,
        "s_guess": 3.0,
        "basis_halfwidth": None,
        "steps_per_period": 4096,
        "samples_per_period": 256,
        "periods": 16,
    },
    "adiabatic": {
        "samples_per_period": 256,
        "periods": 16,
    },
    "analysis": {
        "harmonics": 4,
        "window": "hann",
    },
    "sensing": {
        "epsilon": None,
        "mc_trials": 0,
        "mc_tau_s": 0.05,
        "mc_rate": 1.0e6,
        "mc_epsilon": 0.05,
        "mc_bins_per_period": 32,
    },
    "sweep": {
        "parameters": {},
        "combine": "grid",
        "workers": 1,
    },
    "seed": 0,
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "units": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "species": {"type": ["string", "null"]},
                "mass_kg": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "wavelength_m": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "gamma_hz": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "g0_hz": NUMBER,
                "kappa_hz": {"type": "number", "exclusiveMinimum": 0},
                "delta_hz": NUMBER,
                "eta_hz": NUMBER,
                "n_atoms": {"type": "number", "minimum": 0},
                "acceleration_ms2": OPT_NUMBER,
                "force_n": OPT_NUMBER,
                "detector_efficiency": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "bandstructure": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "basis_halfwidth": {"type": "integer", "minimum": 4},
                "q_points": {"type": "integer", "minimum": 2},
                "depths": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "bands": INTEGER,
                "sign": {"enum": [1, -1]},
            },
        },
        "dynamics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": [m.value for m in Mode]},
                "q0": {"type": "number", "minimum": -1, "maximum": 1},
                "s_guess": {"type": "number", "exclusiveMinimum": 0},
                "basis_halfwidth": OPT_INTEGER,
                "steps_per_period": INTEGER,
                "samples_per_period": INTEGER,
                "periods": INTEGER,
            },
        },
        "adiabatic": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"samples_per_period": INTEGER, "periods": INTEGER},
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"harmonics": INTEGER, "window": {"type": "string"}},
        },
        "sensing": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epsilon": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "mc_trials": {"type": "integer", "minimum": 0},
                "mc_tau_s": {"type": "number", "exclusiveMinimum": 0},
                "mc_rate": {"type": "number", "exclusiveMinimum": 0},
                "mc_epsilon": {"type": "number", "minimum": 0},
                "mc_bins_per_period": {"type": "integer", "minimum": 16},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "parameters": {
                    "type": "object",
                    "additionalProperties": {"type": "array", "minItems": 1},
                },
                "combine": {"enum": ["grid", "zip"]},
                "workers": INTEGER,
            },
        },
        "seed": {"type": "integer", "minimum": 0},
    },
}


def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key != "parameters":
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _coerce_numbers(cfg, schema):
    # PyYAML reads 1e12 (no dot) as a string
    if isinstance(cfg, dict) and schema.get("type") == "object":
        props = schema.get("properties", {})
        return {k: _coerce_numbers(v, props.get(k, {})) for k, v in cfg.items()}
    if isinstance(cfg, list) and "items" in schema:
        return [_coerce_numbers(v, schema["items"]) for v in cfg]
    types = schema.get("type")
    types = [types] if isinstance(types, str) else (types or [])
    if isinstance(cfg, str) and ("number" in types or "integer" in types):
        try:
            value = float(cfg)
        except ValueError:
            return cfg
        if "integer" in types and value.is_integer():
            return int(value)
        return value
    if isinstance(cfg, float) and "integer" in types and "number" not in types and cfg.is_integer():
        return int(cfg)
    return cfg


def validate_dict(cfg: dict) -> dict:
    """Fill defaults, coerce numeric strings and check the schema."""
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a mapping of sections")
    merged = _coerce_numbers(_merge(DEFAULTS, cfg), SCHEMA)
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(merged), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            where = ".".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{where}: {err.message}")
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(lines))
    u = merged["units"]
    if u["species"] is None and None in (u["mass_kg"], u["wavelength_m"], u["gamma_hz"]):
        raise ConfigError("units: without a species preset give mass_kg, wavelength_m and gamma_hz")
    for key in merged["sweep"]["parameters"]:
        _split_key(key)
    _check_sweep_lengths(merged["sweep"])
    return merged


def _split_key(key: str):
    parts = key.split(".")
    if len(parts) == 1 and parts[0] in DEFAULTS and not isinstance(DEFAULTS[parts[0]], dict):
        return parts
    if len(parts) != 2 or parts[0] not in DEFAULTS or not isinstance(DEFAULTS[parts[0]], dict):
        raise ConfigError(f"{key}: expected section.key")
    if parts[1] not in DEFAULTS[parts[0]]:
        raise ConfigError(f"{key}: unknown key {parts[1]!r} in section {parts[0]!r}")
    return parts


def _key_schema(key: str) -> dict:
    parts = _split_key(key)
    node = SCHEMA
    for part in parts:
        node = node["properties"][part]
    return node


def _check_sweep_lengths(sweep):
    if sweep["combine"] == "zip":
        lengths = {len(v) for v in sweep["parameters"].values()}
        if len(lengths) > 1:
            raise ConfigError("sweep.parameters: zip needs equally long value lists")


def load(path) -> dict:
    """Read and parse a YAML config file without validating it."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}:{where}: {getattr(exc, 'problem', exc)}") from None
    return data


def parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    _split_key(key)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        raise ConfigError(f"override {text!r}: cannot parse value") from None
    return key, value


def apply_overrides(cfg: dict, overrides) -> dict:
    out = copy.deepcopy(cfg)
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        parts = _split_key(key)
        if len(parts) == 1:
            out[parts[0]] = value
        else:
            out.setdefault(parts[0], {})[parts[1]] = value
    return out


def resolve(path=None, overrides=()) -> dict:
    raw = load(path) if path is not None else {}
    return validate_dict(apply_overrides(raw, overrides))


def physical_params(cfg: dict) -> PhysicalParams:
    u = cfg["units"]
    fields = preset(u["species"]) if u["species"] else {}
    if u["mass_kg"] is not None:
        fields["atom_mass"] = u["mass_kg"]
    if u["wavelength_m"] is not None:
        fields["wavelength"] = u["wavelength_m"]
    if u["gamma_hz"] is not None:
        fields["gamma"] = 2 * math.pi * u["gamma_hz"]
    # an explicit force takes precedence over the acceleration
    if u["force_n"] is not None:
        force = u["force_n"]
    else:
        force = fields["atom_mass"] * (u["acceleration_ms2"] or 0.0)
    return PhysicalParams(
        g0=2 * math.pi * u["g0_hz"],
        kappa=2 * math.pi * u["kappa_hz"],
        delta=2 * math.pi * u["delta_hz"],
        eta=2 * math.pi * u["eta_hz"],
        n_atoms=u["n_atoms"],
        force=force,
        detector_efficiency=u["detector_efficiency"],
        **fields,
    )


def numerics_spec(cfg: dict) -> NumericsSpec:
    d = cfg["dynamics"]
    return NumericsSpec(
        basis_halfwidth=d["basis_halfwidth"],
        steps_per_period=d["steps_per_period"],
        samples_per_period=d["samples_per_period"],
        periods=d["periods"],
    )


def init_spec(cfg: dict) -> InitSpec:
    d = cfg["dynamics"]
    return InitSpec(q0=d["q0"], s_guess=d["s_guess"])


def sweep_points(cfg: dict) -> list[dict]:
    """Expand ``sweep.parameters`` into a list of ``{key: value}`` overrides."""
    params = cfg["sweep"]["parameters"]
    if not params:
        return []
    keys = list(params)
    params = {k: [_coerce_numbers(v, _key_schema(k)) for v in params[k]] for k in keys}
    if cfg["sweep"]["combine"] == "zip":
        combos = zip(*(params[k] for k in keys))
    else:
        combos = itertools.product(*(params[k] for k in keys))
    return [dict(zip(keys, values)) for values in combos]


def validate_file(path, strict: bool = False) -> list[str]:
    """Schema and physics-validity check; returns warnings, raises ConfigError on errors."""
    cfg = resolve(path)
    notes = physical_params(cfg).validity_warnings()
    if strict and notes:
        raise ConfigError("strict mode: " + "; ".join(notes))
    return notes
