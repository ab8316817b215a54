"""Config-driven experiments and run-directory reports.

Run directory layout::

    manifest.json      config echo, seed, versions, status, checks / final values
    monitors/*.csv     one (time, value) series per monitor, or the residual table
    fields/*.csv       optional field snapshots
    report.txt         the human-readable summary printed by ``report``
"""
from __future__ import annotations

import csv
import json
import logging
import platform
import sys
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .dynamics import compare_flows, evolve
from .grid import TWO_PI, Grid, write_field_csv
from .hamiltonians import get_model
from .madelung import madelung
from .states import AlgebraElement, PolarDecomposition, WaveFunction, from_polar
from .verification import ALL_SUITES, run_verify

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_IDENTITY_FAILURE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

EXPERIMENTS = ("verify", "evolve-nls", "evolve-qhd", "compare")

_MODE = {
    "type": "object",
    "properties": {
        "k": {"oneOf": [{"type": "integer"}, {"type": "array", "items": {"type": "integer"}, "minItems": 1, "maxItems": 2}]},
        "re": {"type": "number"},
        "im": {"type": "number"},
    },
    "required": ["k"],
    "additionalProperties": False,
}
_MODES = {"type": "array", "items": _MODE}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["experiment", "grid"],
    "additionalProperties": False,
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "seed": {"type": "integer", "minimum": 0},
        "grid": {
            "type": "object",
            "required": ["N"],
            "additionalProperties": False,
            "properties": {
                "N": {"type": "integer", "minimum": 8, "multipleOf": 2},
                "dim": {"enum": [1, 2]},
                "L": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "model": {
            "type": "object",
            "required": ["name"],
            "additionalProperties": False,
            "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
        },
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["rk4", "strang"]},
                "nls_method": {"enum": ["rk4", "strang"]},
                "qhd_method": {"enum": ["rk4"]},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "T": {"type": "number", "exclusiveMinimum": 0},
                "stride": {"type": "integer", "minimum": 1},
                "snapshots": {"type": "boolean"},
            },
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"rho": _MODES, "tau": _MODES},
        },
        "symmetry": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "elements": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name"],
                        "additionalProperties": False,
                        "properties": {
                            "name": {"type": "string"},
                            "v": {"type": "array", "items": _MODES},
                            "alpha": _MODES,
                        },
                    },
                }
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer", "minimum": 1},
                "suites": {"type": "array", "items": {"enum": list(ALL_SUITES)}},
            },
        },
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
    },
}


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.absolute_path)
        if err.validator == "required":
            missing = err.message.split("'")[1]
            where = f"{where}.{missing}" if where else missing
            raise ConfigError(f"{where}: missing required key")
        raise ConfigError(f"{where or '<root>'}: {err.message}")


# -- config -> objects -------------------------------------------------------


def _keyed(key: str, fn, *args, **kwargs):
    """Call ``fn`` and turn value errors into a :class:`ConfigError` naming ``key``."""
    try:
        return fn(*args, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def build_grid(cfg: dict) -> Grid:
    g = cfg["grid"]
    return _keyed("grid", Grid.uniform, g["N"], g.get("L", TWO_PI), g.get("dim", 1))


def build_model(cfg: dict):
    m = cfg.get("model", {})
    return _keyed("model", get_model, m.get("name", "gross_pitaevskii"), **m.get("params", {}))


def _field(grid: Grid, key: str, modes):
    for i, mode in enumerate(modes):
        k = mode["k"]
        if len(k if isinstance(k, list) else [k]) != grid.dim:
            raise ConfigError(f"{key}.{i}.k: need {grid.dim} wavenumber(s)")
    return grid.field_from_modes(modes)


def build_initial(grid: Grid, cfg: dict) -> WaveFunction:
    init = cfg.get("initial", {})
    zero = [{"k": [0] * grid.dim, "re": 1.0}]
    rho = _field(grid, "initial.rho", init.get("rho", zero))
    tau = _field(grid, "initial.tau", init.get("tau", []))
    # VacuumError and ResolutionError are ValueErrors, so a bad density or phase lands here too
    return _keyed("initial", lambda: from_polar(PolarDecomposition(grid, rho, tau)))


def build_elements(grid: Grid, cfg: dict) -> dict:
    out = {}
    for i, el in enumerate(cfg.get("symmetry", {}).get("elements", [])):
        key = f"symmetry.elements.{i}"
        comps = el.get("v", [[] for _ in range(grid.dim)])
        if len(comps) != grid.dim:
            raise ConfigError(f"{key}.v: need {grid.dim} components")
        v = np.stack([_field(grid, f"{key}.v.{a}", c) for a, c in enumerate(comps)])
        out[el["name"]] = AlgebraElement(grid, v, _field(grid, f"{key}.alpha", el.get("alpha", [])))
    return out


def _integrator(cfg: dict) -> dict:
    icfg = dict(cfg.get("integrator", {}))
    icfg.setdefault("dt", 1e-3)
    icfg.setdefault("T", 0.5)
    n = round(icfg["T"] / icfg["dt"])
    if n < 1 or abs(n * icfg["dt"] - icfg["T"]) > 1e-9 * max(1.0, icfg["T"]):
        raise ConfigError(f"integrator.dt: {icfg['dt']} does not divide integrator.T={icfg['T']}")
    return icfg


def prepare(cfg: dict) -> dict:
    """Build every object the experiment needs, so config mistakes surface before any output."""
    grid = build_grid(cfg)
    ctx = {"grid": grid}
    if cfg["experiment"] != "verify":
        ctx.update(
            model=build_model(cfg),
            initial=build_initial(grid, cfg),
            elements=build_elements(grid, cfg),
            integrator=_integrator(cfg),
        )
        if cfg["experiment"] == "evolve-nls" and ctx["integrator"].get("method") is None:
            ctx["integrator"]["method"] = "strang"
        if cfg["experiment"] == "evolve-qhd" and ctx["integrator"].get("method", "rk4") != "rk4":
            raise ConfigError("integrator.method: QHD supports rk4 only")
    return ctx


def _versions() -> dict:
    try:
        pkg = metadata.version("madelung-lab")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"madelung_lab": pkg, "numpy": np.__version__, "python": platform.python_version()}


def _write_series(path: Path, times, values, header=("time", "value")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, v in zip(times, values):
            w.writerow([repr(float(t)), repr(float(v))])


# -- experiments -------------------------------------------------------------


def _run_verify(cfg, ctx, seed, tol_scale, out: Path) -> dict:
    vcfg = cfg.get("verify", {})
    checks = run_verify(ctx["grid"], seed, vcfg.get("samples"), vcfg.get("suites"), tol_scale)
    with open(out / "monitors" / "residuals.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["identity", "samples", "max_residual", "tolerance", "passed"])
        for c in checks:
            w.writerow([c.name, c.samples, repr(c.max_residual), repr(c.tolerance), int(c.passed)])
    ok = all(c.passed for c in checks)
    return {"checks": [c.as_dict() for c in checks], "exit_code": EXIT_OK if ok else EXIT_IDENTITY_FAILURE}


def _run_evolve(ctx, kind, out: Path) -> dict:
    grid, icfg = ctx["grid"], ctx["integrator"]
    state = ctx["initial"] if kind == "nls" else madelung(ctx["initial"])
    method = icfg.get("method", "rk4")
    traj = evolve(state, ctx["model"], icfg["dt"], icfg["T"], method, ctx["elements"], icfg.get("stride"))
    for name, vals in traj.monitors.items():
        _write_series(out / "monitors" / f"{name}.csv", traj.times, vals)
    if icfg.get("snapshots", False):
        for i, s in enumerate(traj.snapshots):
            if kind == "nls":
                write_field_csv(out / "fields" / f"psi_{i:04d}.csv", grid, s.psi)
            else:
                write_field_csv(out / "fields" / f"mu_{i:04d}.csv", grid, s.mu)
                write_field_csv(out / "fields" / f"rho_{i:04d}.csv", grid, s.rho)
    drifts = {k: traj.drift(k) for k in traj.monitors if k != "spectral_tail"}
    return {
        "method": method,
        "failed": traj.failed,
        "failure_time": traj.failure_time,
        "failure_reason": traj.failure_reason,
        "final": {
            "time": traj.times[-1],
            "drifts": drifts,
            "max_spectral_tail": float(np.max(traj.monitors["spectral_tail"])),
        },
        "exit_code": EXIT_RUNTIME if traj.failed else EXIT_OK,
    }


def _run_compare(cfg, ctx, tol_scale, out: Path) -> dict:
    icfg = ctx["integrator"]
    tol = cfg.get("tolerance", 1e-4)
    times, res, failed = compare_flows(
        ctx["initial"],
        ctx["model"],
        icfg["dt"],
        icfg["T"],
        icfg.get("nls_method", "strang"),
        icfg.get("qhd_method", "rk4"),
        icfg.get("stride", 1),
    )
    _write_series(out / "monitors" / "madelung_residual.csv", times, res)
    final = res[-1]
    passed = (not failed) and final <= tol * tol_scale
    check = {
        "name": "flow_equivalence",
        "samples": len(res),
        "max_residual": float(max(res)),
        "final_residual": float(final),
        "tolerance": tol,
        "passed": passed,
    }
    code = EXIT_RUNTIME if failed else (EXIT_OK if passed else EXIT_IDENTITY_FAILURE)
    return {
        "checks": [check],
        "failed": failed,
        "failure_time": times[-1] if failed else None,
        "failure_reason": "vacuum or blow-up during the joint run" if failed else None,
        "exit_code": code,
    }


def run(config_path, seed: int | None = None, out_dir=None, tolerance_scale: float = 1.0) -> tuple[int, Path | None]:
    """Execute one experiment; returns ``(exit_code, run_directory)``."""
    try:
        cfg = load_config(config_path)
        ctx = prepare(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, None
    seed = seed if seed is not None else cfg.get("seed", 0)
    out = Path(out_dir or f"runs/{cfg['experiment']}-seed{seed}")
    (out / "monitors").mkdir(parents=True, exist_ok=True)
    (out / "fields").mkdir(exist_ok=True)
    manifest = {
        "experiment": cfg["experiment"],
        "config": cfg,
        "seed": seed,
        "tolerance_scale": tolerance_scale,
        "versions": _versions(),
    }
    try:
        if cfg["experiment"] == "verify":
            manifest.update(_run_verify(cfg, ctx, seed, tolerance_scale, out))
        elif cfg["experiment"] == "evolve-nls":
            manifest.update(_run_evolve(ctx, "nls", out))
        elif cfg["experiment"] == "evolve-qhd":
            manifest.update(_run_evolve(ctx, "qhd", out))
        else:
            manifest.update(_run_compare(cfg, ctx, tolerance_scale, out))
    except Exception as exc:  # recorded in the manifest, surfaced through the exit code
        logger.exception("run failed")
        manifest.update({"failed": True, "failure_reason": f"{type(exc).__name__}: {exc}", "exit_code": EXIT_RUNTIME})
    manifest["status"] = {EXIT_OK: "pass", EXIT_IDENTITY_FAILURE: "fail"}.get(manifest["exit_code"], "error")
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=float)
    (out / "report.txt").write_text(format_report(manifest))
    return manifest["exit_code"], out


# -- reporting ---------------------------------------------------------------


def read_manifest(run_dir) -> dict:
    path = Path(run_dir) / "manifest.json"
    if not path.is_file():
        raise FileNotFoundError(f"{run_dir}: no manifest.json")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: corrupt manifest ({exc})") from exc


def format_report(manifest: dict, run_dir=None) -> str:
    lines = [
        f"experiment: {manifest['experiment']}   seed: {manifest['seed']}   status: {manifest.get('status', '?')}",
    ]
    if manifest.get("tolerance_scale", 1.0) != 1.0:
        lines.append(f"tolerance scale: {manifest['tolerance_scale']} (residuals shown unscaled)")
    if manifest.get("checks"):
        lines.append(f"{'identity':<28} {'samples':>7} {'max residual':>13} {'tolerance':>10}  result")
        for c in manifest["checks"]:
            lines.append(
                f"{c['name']:<28} {c['samples']:>7d} {c['max_residual']:>13.3e} {c['tolerance']:>10.1e}  "
                f"{'PASS' if c['passed'] else 'FAIL'}"
            )
    final = manifest.get("final")
    if final:
        lines.append(f"final time: {final['time']:.6g}   max spectral tail: {final['max_spectral_tail']:.2e}")
        lines.append(f"{'monitor':<28} {'relative drift':>14}")
        for k, v in final["drifts"].items():
            lines.append(f"{k:<28} {v:>14.3e}")
    if manifest.get("failed"):
        lines.append(f"FAILED at t={manifest.get('failure_time')}: {manifest.get('failure_reason', '')}")
    if run_dir is not None:
        mon = sorted((Path(run_dir) / "monitors").glob("*.csv"))
        if mon:
            lines.append("monitor files: " + ", ".join(p.name for p in mon))
    return "\n".join(lines) + "\n"


def report(run_dir, gnuplot: bool = False) -> str:
    """Summary of a run directory; with ``gnuplot`` also write whitespace-separated ``.dat`` copies of the monitors."""
    manifest = read_manifest(run_dir)
    text = format_report(manifest, run_dir)
    if gnuplot:
        dest = Path(run_dir) / "gnuplot"
        dest.mkdir(exist_ok=True)
        for p in sorted((Path(run_dir) / "monitors").glob("*.csv")):
            with open(p, newline="") as fh:
                rows = list(csv.reader(fh))
            with open(dest / (p.stem + ".dat"), "w") as fh:
                fh.write("# " + " ".join(rows[0]) + "\n")
                for r in rows[1:]:
                    fh.write(" ".join(r) + "\n")
    return text
