"""Run configuration: JSON schema, validation and object construction.

Chain parameters are dimensionless (units of J_c).  Physical units enter
only through the optional ``physical`` section.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import re

import jsonschema
import numpy as np

from .errors import ConfigError
from .model import MG25_MASS, ChainParams, PhysicalParams

SCHEMA_VERSION = 1

DEFAULT_TOLERANCES = {
    "stability": 1e-10,
    "tail": 1e-12,
    "k_points": 2048,
    "edge_threshold": 0.1,
    "quadrature": 1e-8,
    "rtol": 1e-9,
}

_ANGLE = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*-?\s*(\d+(\.\d*)?\s*\*?\s*)?pi(\s*/\s*\d+(\.\d*)?)?\s*$"},
    ]
}

_RANGE = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "start": {"type": "number"},
                "stop": {"type": "number"},
                "num": {"type": "integer", "minimum": 1},
            },
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
        {"type": "array", "items": {"type": "number"}},
    ]
}

_ANGLE_RANGE = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"start": _ANGLE, "stop": _ANGLE, "num": {"type": "integer", "minimum": 1}},
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
        {"type": "array", "items": _ANGLE},
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "chain": {
            "type": "object",
            "properties": {
                "n_sites": {"type": "integer", "minimum": 1},
                "delta": {"type": "number"},
                "g": {"type": "number"},
                "gamma": {"type": "number", "minimum": 0},
                "delta_phi": _ANGLE,
                "j_c": {"type": "number", "minimum": 0},
                "hopping_range": {"type": ["integer", "null"], "minimum": 1},
            },
            "required": ["n_sites", "delta", "g", "gamma", "delta_phi"],
            "additionalProperties": False,
        },
        "physical": {
            "type": "object",
            "properties": {
                "frequency_scale_hz": {"type": "number", "exclusiveMinimum": 0},
                "trap_frequency_hz": {"type": "number", "exclusiveMinimum": 0},
                "ion_mass_kg": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["frequency_scale_hz"],
            "additionalProperties": False,
        },
        "drive": {
            "type": "object",
            "properties": {
                "site": {"type": "integer", "minimum": 1},
                "amplitude": {"type": "number"},
                "phase": {"type": "number"},
                "amplitudes_re": {"type": "array", "items": {"type": "number"}},
                "amplitudes_im": {"type": "array", "items": {"type": "number"}},
                "detuning": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "sensor": {
            "type": "object",
            "properties": {
                "force_detuning": {"type": "number"},
                "classical_noise_m": {"type": "number", "minimum": 0},
                "sense_site": {"type": "integer", "minimum": 1},
                "detect_site": {"type": "integer", "minimum": 1},
                "force_phase": {"type": "number"},
                "applied_force_n": {"type": "number", "minimum": 0},
                "drive_amplitude": {"type": "number", "minimum": 0},
            },
            "required": ["force_detuning"],
            "additionalProperties": False,
        },
        "omega": {"type": "number"},
        "grid": {
            "type": "object",
            "properties": {
                "omega": _RANGE,
                "gamma": _RANGE,
                "delta_phi": _ANGLE_RANGE,
                "n_sites": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "force_detuning": _RANGE,
            },
            "additionalProperties": False,
        },
        "dynamics": {
            "type": "object",
            "properties": {
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "samples": {"type": "integer", "minimum": 2},
                "site": {"type": "integer", "minimum": 1},
                "envelope": {"enum": ["position", "coherence"]},
            },
            "additionalProperties": False,
        },
        "table": {
            "type": "object",
            "properties": {
                "sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "scales_hz": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "trap_frequency_hz": {"type": "number", "exclusiveMinimum": 0},
                "classical_noise_m": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {
                "stability": {"type": "number", "exclusiveMinimum": 0},
                "tail": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "k_points": {"type": "integer", "minimum": 16},
                "edge_threshold": {"type": "number", "exclusiveMinimum": 0},
                "quadrature": {"type": "number", "exclusiveMinimum": 0},
                "rtol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "required": ["version"],
    "additionalProperties": False,
}


def parse_angle(value) -> float:
    """Radians from a number or a string such as ``"pi/4"``, ``"-3*pi/4"``, ``"0.5pi"``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"not an angle: {value!r}")
    m = re.fullmatch(r"\s*(-)?\s*(?:(\d+(?:\.\d*)?)\s*\*?\s*)?pi(?:\s*/\s*(\d+(?:\.\d*)?))?\s*", value)
    if not m:
        raise ConfigError(f"not an angle: {value!r}")
    sign = -1.0 if m.group(1) else 1.0
    num = float(m.group(2)) if m.group(2) else 1.0
    den = float(m.group(3)) if m.group(3) else 1.0
    if den == 0:
        raise ConfigError(f"zero denominator in angle {value!r}")
    return sign * num * math.pi / den


def validate(config: dict) -> dict:
    """Schema-check a config dict and return a deep copy with tolerances filled in."""
    try:
        jsonschema.validate(config, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {path}: {exc.message}") from None
    out = copy.deepcopy(config)
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(out.get("tolerances", {}))
    out["tolerances"] = tol
    return out


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return validate(raw)


def apply_overrides(config: dict, overrides) -> dict:
    """Apply ``key=value`` tolerance overrides, then re-validate."""
    if not overrides:
        return config
    raw = copy.deepcopy(config)
    tol = raw.setdefault("tolerances", {})
    for item in overrides:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"bad tolerance override {item!r}")
        try:
            tol[key] = int(value) if key == "k_points" else float(value)
        except ValueError:
            raise ConfigError(f"bad tolerance value in {item!r}") from None
    return validate(raw)


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def require(config: dict, *sections: str):
    for s in sections:
        if s not in config:
            raise ConfigError(f"config needs a '{s}' section for this command")


def chain_params(config: dict) -> ChainParams:
    require(config, "chain")
    c = dict(config["chain"])
    c["delta_phi"] = parse_angle(c["delta_phi"])
    return ChainParams(**c)


def physical_params(config: dict) -> PhysicalParams:
    require(config, "physical")
    p = config["physical"]
    return PhysicalParams.from_hz(p["frequency_scale_hz"], p.get("trap_frequency_hz", 2.0e6),
                                  p.get("ion_mass_kg", MG25_MASS))


def drive_amplitudes(config: dict, n_sites: int) -> tuple[np.ndarray, float]:
    """Complex amplitudes (units of J_c) and detuning from the ``drive`` section."""
    d = config.get("drive", {})
    detuning = float(d.get("detuning", 0.0))
    if "amplitudes_re" in d or "amplitudes_im" in d:
        re_ = np.asarray(d.get("amplitudes_re", [0.0] * n_sites), dtype=float)
        im_ = np.asarray(d.get("amplitudes_im", [0.0] * n_sites), dtype=float)
        if re_.shape != (n_sites,) or im_.shape != (n_sites,):
            raise ConfigError(f"drive amplitudes need {n_sites} entries")
        return re_ + 1j * im_, detuning
    site = d.get("site", 1)
    if site > n_sites:
        raise ConfigError(f"drive site {site} outside 1..{n_sites}")
    eps = np.zeros(n_sites, dtype=complex)
    eps[site - 1] = d.get("amplitude", 1.0) * np.exp(1j * d.get("phase", 0.0))
    return eps, detuning


def grid_values(spec, angles: bool = False) -> np.ndarray:
    conv = parse_angle if angles else float
    if isinstance(spec, list):
        return np.array([conv(v) for v in spec], dtype=float)
    return np.linspace(conv(spec["start"]), conv(spec["stop"]), spec["num"])
