"""Deterministic report and table emission.

Reports carry a config echo with resolved defaults and a provenance block;
floats are rendered with 17 significant digits so identical runs produce
byte-identical files. Wall-clock timings go to a separate sidecar file that
is excluded from the determinism contract.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from . import __version__
from .grid import LogGrid, RadialFunction


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _normalize(obj):
    """Make results JSON-ready with stable float rendering."""
    if isinstance(obj, dict):
        return {k: _normalize(obj[k]) for k in obj}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return fmt(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    return obj


def grid_hash(grid: LogGrid) -> str:
    payload = f"{grid.s_min:.17g}|{grid.s_max:.17g}|{grid.count}"
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def provenance(grid: LogGrid) -> dict:
    from .backend import active_backend
    return {
        "artifact_version": __version__,
        "grid_hash": grid_hash(grid),
        "kernel_backend": active_backend(),
    }


def write_report(out_dir: str, subcommand: str, config_echo: dict,
                 results: dict, grid: LogGrid) -> str:
    os.makedirs(out_dir, exist_ok=True)
    doc = {
        "subcommand": subcommand,
        "config": _normalize(config_echo),
        "provenance": provenance(grid),
        "results": _normalize(results),
    }
    path = os.path.join(out_dir, "report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    lines = [f"hardy-fundsol {subcommand} report", ""]

    def render(prefix, obj):
        if isinstance(obj, dict):
            for k in obj:
                render(f"{prefix}{k}.", obj[k])
        elif isinstance(obj, list):
            lines.append(f"{prefix[:-1]} = [{', '.join(str(v) for v in obj)}]")
        else:
            lines.append(f"{prefix[:-1]} = {obj}")

    render("", doc)
    txt_path = os.path.join(out_dir, "report.txt")
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_timings(out_dir: str, timings: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "timings.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: f"{v:.6f}" for k, v in timings.items()}, fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    return path


def write_solution_table(out_dir: str, u: RadialFunction, phi: np.ndarray,
                         gamma: np.ndarray, name: str = "solution.csv") -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    r = u.grid.r
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("r,u,phi_mu,gamma_mu,ratio_u_phi\n")
        for i in range(u.grid.count):
            row = (r[i], u.values[i], phi[i], gamma[i], u.values[i] / phi[i])
            fh.write(",".join(fmt(float(v)) for v in row) + "\n")
    return path


def write_plots(out_dir: str, u: RadialFunction, phi: np.ndarray,
                gamma: np.ndarray, k: float) -> list:
    """Log-log overview plot as a vector graphic (emitted only on request)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    r = u.grid.r
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    pos = u.values > 0
    ax.loglog(r[pos], u.values[pos], label="u", lw=1.6)
    ax.loglog(r, k * phi, "--", label="k phi_mu", lw=1.0)
    ax.loglog(r, gamma, ":", label="gamma_mu", lw=1.0)
    ax.set_xlabel("r")
    ax.set_ylabel("value")
    ax.legend(frameon=False)
    ax.set_title("radial profiles")
    fig.tight_layout()
    path = os.path.join(out_dir, "profiles.svg")
    fig.savefig(path)
    plt.close(fig)
    return [path]
