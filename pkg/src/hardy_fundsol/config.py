"""Experiment configuration: JSON schema, validation, defaults."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
import jsonschema

from .analysis import SolverConfig
from .closed_forms import (
    DimensionParams,
    MuParams,
    PotentialSpec,
    dimension_params,
    inverse_square_potential,
    mu_params,
    vrho_potential,
)
from .errors import ConfigInvalid
from .grid import LogGrid

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["dimension", "mu", "potential"],
    "additionalProperties": False,
    "properties": {
        "dimension": {"type": "integer", "minimum": 3},
        "mu": {"type": "number", "exclusiveMinimum": 0},
        "potential": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["inverse_square", "vrho"]},
                "rho": {"type": "number", "minimum": 1},
            },
        },
        "k": {"type": "number", "minimum": 0},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "r_min": {"type": "number", "exclusiveMinimum": 0},
                "r_max": {"type": "number", "exclusiveMinimum": 0},
                "nodes": {"type": "integer", "minimum": 16},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol_ode": {"type": "number", "exclusiveMinimum": 0},
                "tol_bvp": {"type": "number", "exclusiveMinimum": 0},
                "tol_min": {"type": "number", "exclusiveMinimum": 0},
                "tol_fp": {"type": "number", "exclusiveMinimum": 0},
                "tol_cert": {"type": "number", "exclusiveMinimum": 0},
                "tol_bisect": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "r_schedule": {
            "type": "array", "minItems": 2,
            "items": {"type": "number", "exclusiveMinimum": 0},
        },
        "probe_r": {"type": "number", "exclusiveMinimum": 0},
        "max_iters": {"type": "integer", "minimum": 1},
        "divergence_cap": {"type": "number", "exclusiveMinimum": 0},
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "target": {"enum": ["phi_mu", "gamma_mu"]},
                "test_function_radii": {
                    "type": "array", "minItems": 1,
                    "items": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "exponent": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "windows": {
                    "type": "array", "minItems": 1,
                    "items": {
                        "type": "array", "minItems": 2, "maxItems": 2,
                        "items": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "allow_log": {"type": "boolean"},
            },
        },
        "certify_exist": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "variant": {"enum": ["subcritical", "barrier", "critical"]},
                "mu_prime": {"type": "number"},
                "c5": {"type": "number", "minimum": 0},
                "varrho": {"type": "number"},
            },
        },
        "certify_nonexist": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "beta": {"type": "number"},
                "epsilon": {"type": ["number", "null"]},
            },
        },
        "threshold": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bracket": {
                    "type": "array", "minItems": 2, "maxItems": 2,
                    "items": {"type": "number"},
                },
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "numeric_budget": {"type": "integer", "minimum": 0},
            },
        },
        "iterate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "store_iterates": {"type": "boolean"},
            },
        },
    },
}

DEFAULTS = {
    "k": 1.0,
    "grid": {"r_min": 1e-6, "r_max": 1e6, "nodes": 4001},
    "tolerances": {
        "tol_ode": 1e-10, "tol_bvp": 1e-8, "tol_min": 1e-8,
        "tol_fp": 1e-7, "tol_cert": 1e-7, "tol_bisect": 1e-6,
    },
    "r_schedule": [1e1, 1e2, 1e3, 1e4, 1e5, 1e6],
    "probe_r": 1e-3,
    "max_iters": 800,
    "divergence_cap": 1e12,
    "verify": {"target": "phi_mu", "test_function_radii": [0.5, 1.0, 2.0]},
    "exponent": {"windows": [[1e-6, 1e-4], [1e3, 1e5]], "allow_log": False},
    "certify_exist": {"variant": "subcritical"},
    "certify_nonexist": {"beta": 9.0, "epsilon": None},
    "threshold": {"bracket": [1.05, 9.0], "tol": 1e-6, "numeric_budget": 8},
    "iterate": {"store_iterates": False},
}


@dataclass
class ExperimentConfig:
    """Validated configuration with resolved defaults."""

    raw: dict
    dim: DimensionParams
    params: MuParams
    potential: PotentialSpec
    grid: LogGrid
    k: float
    solver: SolverConfig
    resolved: dict = field(default_factory=dict)


def _merge_defaults(data: dict) -> dict:
    out = {}
    for key, default in DEFAULTS.items():
        given = data.get(key)
        if isinstance(default, dict):
            merged = dict(default)
            if isinstance(given, dict):
                merged.update(given)
            out[key] = merged
        else:
            out[key] = given if given is not None else default
    for key in ("dimension", "mu", "potential"):
        out[key] = data[key]
    return out


def load_config(path: str) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigInvalid(f"config file not found: {path}", field=path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        if exc.validator == "required":
            missing = exc.message.split("'")[1]
            path = missing if path == "<root>" else f"{path}.{missing}"
        raise ConfigInvalid(f"invalid config at {path}: {exc.message}",
                            field=path) from exc

    resolved = _merge_defaults(data)
    dim = dimension_params(resolved["dimension"])
    mu = float(resolved["mu"])
    if not 0.0 < mu <= dim.mu0:
        raise ConfigInvalid(
            f"invalid config at mu: must lie in (0, {dim.mu0}]", field="mu")
    params = mu_params(mu, dim)

    pot_block = resolved["potential"]
    if pot_block["kind"] == "inverse_square":
        potential = inverse_square_potential()
    else:
        if "rho" not in pot_block:
            raise ConfigInvalid("invalid config at potential.rho: required "
                                "for the vrho kind", field="potential.rho")
        potential = vrho_potential(float(pot_block["rho"]))

    gb = resolved["grid"]
    if not gb["r_min"] < gb["r_max"]:
        raise ConfigInvalid("invalid config at grid: r_min must be < r_max",
                            field="grid")
    grid = LogGrid.from_radii(gb["r_min"], gb["r_max"], gb["nodes"])

    schedule = resolved["r_schedule"]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigInvalid(
            "invalid config at r_schedule: must be strictly increasing",
            field="r_schedule")
    if not resolved["probe_r"] < schedule[0]:
        raise ConfigInvalid(
            "invalid config at probe_r: must lie below the first schedule "
            "radius", field="probe_r")

    tols = resolved["tolerances"]
    solver = SolverConfig(
        grid=grid,
        r_schedule=tuple(resolved["r_schedule"]),
        probe_r=resolved["probe_r"],
        k=resolved["k"],
        tol_ode=tols["tol_ode"], tol_bvp=tols["tol_bvp"],
        tol_min=tols["tol_min"], tol_fp=tols["tol_fp"],
        tol_cert=tols["tol_cert"], tol_bisect=tols["tol_bisect"],
        max_iters=resolved["max_iters"],
        divergence_cap=resolved["divergence_cap"],
        numeric_budget=resolved["threshold"]["numeric_budget"],
    )
    return ExperimentConfig(raw=data, dim=dim, params=params,
                            potential=potential, grid=grid,
                            k=resolved["k"], solver=solver,
                            resolved=resolved)


def worker_count() -> int:
    """Worker pool size, capped by HARDY_FUNDSOL_THREADS when set."""
    cap = os.environ.get("HARDY_FUNDSOL_THREADS", "").strip()
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigInvalid(
                f"HARDY_FUNDSOL_THREADS must be an integer, got {cap!r}")
    return max(1, min(n, 8))
