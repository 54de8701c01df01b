"""Strict scenario configuration: YAML in, fully resolved parameters out.

Unknown keys are rejected and every missing required key is reported in one
pass, so a config either round-trips exactly or fails loudly.  Validation
errors are categorized: "schema" for structural problems (unknown, missing,
mistyped) and "domain" for well-formed values that are physically invalid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import yaml

from .errors import ConfigError

__all__ = ["ScenarioConfig", "validate_config", "SCENARIOS", "describe_scenarios"]


@dataclass(frozen=True)
class Key:
    type: type | tuple
    required: bool = False
    default: Any = None
    domain: Callable[[Any], str | None] | None = None
    children: dict | None = None
    help: str = ""


def _positive(name):
    def check(v):
        return None if v > 0 else f"{name} must be strictly positive, got {v}"

    return check


def _non_negative(name):
    def check(v):
        return None if v >= 0 else f"{name} must be >= 0, got {v}"

    return check


def _choice(name, options):
    def check(v):
        return None if v in options else f"{name} must be one of {sorted(options)}, got {v!r}"

    return check


def _even_positive(name):
    def check(v):
        return None if (v > 0 and v % 2 == 0) else f"{name} must be a positive even integer, got {v}"

    return check


_SIGMAS_CHILDREN = {
    "plus": Key(float, required=True, domain=_positive("sigmas.plus")),
    "minus": Key(float, required=True, domain=_positive("sigmas.minus")),
}

_SPDC_CHILDREN = {
    "w0": Key(float, required=True, domain=_positive("spdc_params.w0"), help="pump waist, m"),
    "L": Key(float, required=True, domain=_positive("spdc_params.L"), help="crystal length, m"),
    "lambda_p": Key(float, required=True, domain=_positive("spdc_params.lambda_p"), help="pump wavelength, m"),
    "n_p": Key(float, required=True, domain=_positive("spdc_params.n_p"), help="refractive index at the pump wavelength"),
}

_DETECTOR_CHILDREN = {
    "gain": Key(float, default=80.0, domain=_positive("detector.gain")),
    "dark_mean": Key(float, default=10.0),
    "read_std": Key(float, default=3.0, domain=_non_negative("detector.read_std")),
}

SCENARIOS: dict[str, dict[str, Key]] = {
    "fig1-demo": {
        "n": Key(int, default=512, domain=_even_positive("n")),
        "dk": Key(float, default=0.02, domain=_positive("dk")),
        "sigma_minus": Key(float, default=0.7, domain=_positive("sigma_minus")),
        "mask_frequency": Key(float, default=3.0, domain=_positive("mask_frequency"),
                              help="k-frequency of the cos+sin demonstration mask"),
    },
    "zernike-gallery": {
        "n": Key(int, default=128, domain=_even_positive("n")),
        "amplitude": Key(float, default=math.pi, help="phase amplitude per polynomial, rad"),
        "pupil_fraction": Key(float, default=0.8,
                              domain=lambda v: None if 0 < v <= 1 else f"pupil_fraction must be in (0, 1], got {v}"),
    },
    "parity-experiment": {
        "seed": Key(int, required=True),
        "n": Key(int, default=256, domain=_even_positive("n")),
        "sigma_minus": Key(float, default=0.05, domain=_positive("sigma_minus")),
        "parity": Key(str, default="odd", domain=_choice("parity", {"odd", "even", "all"})),
        "n_masks": Key(int, default=10, domain=_positive("n_masks")),
        "mask_amplitude": Key(float, default=2 * math.pi, domain=_non_negative("mask_amplitude")),
        "pupil_fraction": Key(float, default=0.8,
                              domain=lambda v: None if 0 < v <= 1 else f"pupil_fraction must be in (0, 1], got {v}"),
    },
    "strong-disorder-2d": {
        "seed": Key(int, required=True),
        "n": Key(int, default=256, domain=_even_positive("n"), help="delta-path grid size"),
        "schmidt_target": Key(float, default=1600.0,
                              domain=lambda v: None if v >= 1 else f"schmidt_target must be >= 1, got {v}"),
        "sigmas": Key(dict, children=_SIGMAS_CHILDREN, help="grid-unit widths, alternative to schmidt_target/spdc_params"),
        "spdc_params": Key(dict, children=_SPDC_CHILDREN, help="SI source parameters, alternative to schmidt_target/sigmas"),
        "dk": Key(float, default=1.0, domain=_positive("dk"),
                  help="momentum spacing; rad/m when spdc_params (SI) are used"),
        "mask_rms": Key(float, default=2.2, domain=_non_negative("mask_rms")),
        "mask_correlation_length": Key(float, default=6.0, domain=_positive("mask_correlation_length")),
        "full_path": Key(bool, default=True, help="also run the exact pair path on an n_full grid"),
        "n_full": Key(int, default=64, domain=_even_positive("n_full")),
        "cut_offsets": Key(list, default=[0.0, 0.64], help="y1-y2 offsets of the CSV cross-sections"),
    },
    "emccd-pipeline": {
        "seed": Key(int, required=True),
        "sensor": Key(int, default=96, domain=_positive("sensor")),
        "n_frames": Key(int, default=50000, domain=_positive("n_frames")),
        "pairs_per_frame": Key(float, default=60.0, domain=_non_negative("pairs_per_frame")),
        "centroid_sigma": Key(float, default=12.0, domain=_positive("centroid_sigma")),
        "window": Key(int, default=16, domain=_positive("window")),
        "mask_n": Key(int, default=32, domain=_even_positive("mask_n")),
        "mask_sigma_minus": Key(float, default=0.15, domain=_positive("mask_sigma_minus")),
        "mask_rms": Key(float, default=2.0, domain=_non_negative("mask_rms")),
        "mask_correlation_length": Key(float, default=2.0, domain=_positive("mask_correlation_length")),
        "detector": Key(dict, children=_DETECTOR_CHILDREN, default={}),
        "save_frames": Key(bool, default=False),
    },
    "schmidt-estimate": {
        "seed": Key(int, required=True),
        "sensor": Key(int, default=320, domain=_positive("sensor")),
        "n_frames": Key(int, default=3000, domain=_positive("n_frames")),
        "pairs_per_frame": Key(float, default=500.0, domain=_positive("pairs_per_frame")),
        "sigma_j_px": Key(float, default=2.5, domain=_positive("sigma_j_px"),
                          help="target standard deviation of the coordinate sum, pixels"),
        "sigmas": Key(dict, children=_SIGMAS_CHILDREN),
        "spdc_params": Key(dict, children=_SPDC_CHILDREN),
        "sigma_ratio": Key(float, default=50.0,
                           domain=lambda v: None if v > 0 else f"sigma_ratio must be positive, got {v}"),
        "detector": Key(dict, children=_DETECTOR_CHILDREN, default={}),
    },
    "speckle-contrast": {
        "seed": Key(int, required=True),
        "n": Key(int, default=128, domain=_even_positive("n")),
        "pupil_fraction": Key(float, default=0.4,
                              domain=lambda v: None if 0 < v <= 1 else f"pupil_fraction must be in (0, 1], got {v}"),
        "n_realizations": Key(int, default=10, domain=_positive("n_realizations")),
        "compare_doubled_phase": Key(bool, default=True,
                                     help="also report contrast with the doubled (pump-wavelength) phase"),
    },
}

_COMMON: dict[str, Key] = {
    "scenario": Key(str, required=True),
    "output_dir": Key(str, required=True),
    "render": Key(bool, default=False),
}

# Keys that are alternatives for the source widths; at most one may appear.
_SIGMA_SOURCES = ("sigmas", "spdc_params", "schmidt_target", "sigma_ratio")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    output_dir: str
    render: bool
    params: dict[str, Any] = field(default_factory=dict)
    source_path: str | None = None


def _coerce(value, expected: type | tuple):
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def _validate_level(data: dict, schema: dict[str, Key], prefix: str, errors: list) -> dict:
    resolved: dict[str, Any] = {}
    for key in data:
        if key not in schema:
            errors.append(("schema", f"unknown key '{prefix}{key}'"))
    for name, spec in schema.items():
        path = f"{prefix}{name}"
        if name not in data:
            if spec.required:
                errors.append(("schema", f"missing required key '{path}'"))
            elif spec.children is not None and spec.default is not None:
                resolved[name] = _validate_level(dict(spec.default), spec.children, path + ".", errors)
            elif spec.default is not None or spec.type is bool:
                resolved[name] = spec.default
            continue
        value = _coerce(data[name], spec.type)
        if spec.children is not None:
            if not isinstance(value, dict):
                errors.append(("schema", f"'{path}' must be a mapping"))
                continue
            resolved[name] = _validate_level(value, spec.children, path + ".", errors)
            continue
        if not isinstance(value, spec.type) or isinstance(value, bool) and spec.type is not bool:
            errors.append(("schema", f"'{path}' must be of type {getattr(spec.type, '__name__', spec.type)}, "
                                     f"got {type(value).__name__}"))
            continue
        if spec.domain is not None:
            problem = spec.domain(value)
            if problem:
                errors.append(("domain", f"'{path}': {problem}"))
                continue
        resolved[name] = value
    return resolved


def validate_config(path) -> ScenarioConfig:
    """Load, check, and resolve a scenario config; raises ConfigError on any problem."""
    path = Path(path)
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError([("schema", f"config file not found: {path}")])
    except yaml.YAMLError as exc:
        raise ConfigError([("schema", f"config is not valid YAML: {exc}")])
    if not isinstance(doc, dict):
        raise ConfigError([("schema", "config root must be a mapping")])
    errors: list[tuple[str, str]] = []
    scenario = doc.get("scenario")
    if scenario not in SCENARIOS:
        errors.append(("schema", f"'scenario' must be one of {sorted(SCENARIOS)}, got {scenario!r}"))
        raise ConfigError(errors)
    schema = dict(_COMMON)
    schema.update(SCENARIOS[scenario])
    resolved = _validate_level(doc, schema, "", errors)
    present_sources = [k for k in _SIGMA_SOURCES if k in schema and doc.get(k) is not None]
    if len(present_sources) > 1:
        errors.append(("schema", f"keys {present_sources} are mutually exclusive; give exactly one"))
    if errors:
        raise ConfigError(errors)
    params = {k: v for k, v in resolved.items() if k not in _COMMON}
    return ScenarioConfig(
        scenario=resolved["scenario"],
        output_dir=resolved["output_dir"],
        render=bool(resolved.get("render", False)),
        params=params,
        source_path=str(path),
    )


def describe_scenarios() -> str:
    """Human-readable catalogue of scenarios with their keys and defaults."""
    lines = []
    for name, schema in SCENARIOS.items():
        lines.append(name)
        merged = dict(_COMMON)
        merged.update(schema)
        for key, spec in merged.items():
            if key == "scenario":
                continue
            flag = "required" if spec.required else f"default {spec.default!r}"
            note = f"  {spec.help}" if spec.help else ""
            lines.append(f"  {key:<28} {flag}{note}")
        lines.append("")
    return "\n".join(lines)
