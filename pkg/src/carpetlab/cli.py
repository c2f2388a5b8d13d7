"""Command-line front end: ``carpetlab <experiment> [--config FILE] [flags]``.

Parameters come from built-in defaults, then an optional ``key = value``
config file, then command-line flags (flags win). Unknown keys abort before
any computation. Every run writes ``manifest.json`` first, the results
second and a ``COMPLETE`` marker last.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error. Failures also leave ``error.json`` in the output directory
when it is writable.
"""

from __future__ import annotations

import argparse
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy
from scipy import fft

from . import __version__
from . import bohm, energy, fractal, madelung, slit
from .io import dumps, write_field_csv, write_json
from .spectral import (
    BOX,
    FAST,
    GOLDEN,
    KERR,
    NAIVE,
    BasisSpec,
    ComplexField,
    CoefficientLaw,
    ScalingTriple,
    SpaceTimeGrid,
    StateError,
    build_state,
    evaluate_series,
    hamiltonian_norms,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
THREADS_ENV = "CARPETLAB_THREADS"
MARKER = "COMPLETE"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parameter tables


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


def _grid(text: str) -> tuple[int, int]:
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise ValueError("grid must look like <x-points>x<t-samples>")
    return int(parts[0]), int(parts[1])


def _optional_float(text):
    return None if text in (None, "", "none", "None") else float(text)


COMMON = {
    "seed": (int, 0, "random seed"),
    "out": (str, "out", "output directory"),
    "threads": (int, None, f"worker threads for transforms (default: ${THREADS_ENV} or 1)"),
}

STATE = {
    "basis": (str, "box", "box | kerr"),
    "law": (str, "uniform", "uniform | power | kerr_zeta"),
    "modes": (int, 4095, "number of retained modes N"),
    "alpha": (float, 3.0, "power-law exponent (power law only)"),
    "phases": (str, "unit", "unit | random phases (power law only)"),
    "length": (float, 1.0, "box length L"),
    "mass": (float, 1.0, "particle mass"),
    "hbar": (float, 1.0, "reduced Planck constant"),
    "omega": (float, 1.0, "Kerr linear frequency"),
    "kappa": (float, 1.0, "Kerr quadratic coefficient"),
}

EXPERIMENTS = {
    "carpet": {
        **STATE,
        "grid": (_grid, "1024x256", "x-points x time samples over one revival"),
        "memory_budget_mb": (float, 4096.0, "warn above this estimated memory use"),
    },
    "classify": {
        "alpha": (float, 1.625, "coefficient decay exponent"),
        "beta": (float, 2.0, "energy growth exponent"),
        "gamma": (float, -0.25, "eigenfunction amplitude exponent"),
    },
    "energy": {
        **STATE,
        "cauchy_tol": (float, 1e-8, "final-decade increment threshold"),
    },
    "madelung": {
        **STATE,
        "divisions": (_int_list, "512,1024,2048,4096", "lattice cell counts for the fixed-state refinement"),
        "sweep": (_int_list, "", "mode counts for the coupled (N, h) sweep (uniform law)"),
        "cells_per_mode": (int, 8, "cells per mode in the coupled sweep"),
        "t_fraction": (float, GOLDEN / 10.0, "time as a fraction of the revival period"),
        "stencil_order": (int, 2, "finite-difference order (2, 4 or 6)"),
    },
    "trajectories": {
        **STATE,
        "count": (int, 1000, "ensemble size"),
        "times": (_float_list, "0.125", "sample times as fractions of the revival period"),
        "rtol": (float, 1e-8, "relative tolerance"),
        "probe_alphas": (_float_list, "", "power-law exponents for the velocity convergence probe"),
    },
    "fractal": {
        **STATE,
        "source": (str, "state", "state | synthetic"),
        "section": (str, "spatial", "spatial | temporal"),
        "fixed": (_optional_float, None, "fixed coordinate as a fraction of its period (default golden)"),
        "observable": (str, "density", "re_psi | im_psi | density | re_dpsi"),
        "resolution": (int, 1 << 15, "samples along the section"),
        "z": (float, 1.0, "synthetic series exponent"),
    },
    "slit": {
        "width": (float, 1.0, "slit width"),
        "p0": (float, 0.0, "carrier momentum"),
        "mass": (float, 1.0, "particle mass"),
        "hbar": (float, 1.0, "reduced Planck constant"),
        "x_min": (float, -1.5, "first x"),
        "x_max": (float, 1.5, "last x"),
        "x_count": (int, 61, "number of x samples"),
        "t": (float, 0.1, "time"),
        "tol": (float, 1e-6, "absolute error tolerance per point"),
    },
    "kerr": {
        "modes": (int, 100_000, "retained number states"),
        "omega": (float, 1.0, "Kerr linear frequency"),
        "kappa": (float, 1.0, "Kerr quadratic coefficient"),
        "hbar": (float, 1.0, "reduced Planck constant"),
        "hermite_min": (int, 100, "smallest n in the amplitude scan"),
        "hermite_max": (int, 2000, "largest n in the amplitude scan"),
        "interval": (_float_list, "-2,2", "quadrature interval for the scan"),
        "cauchy_tol": (float, 1e-8, "final-decade increment threshold"),
    },
}

# experiment-specific defaults for the state block
_STATE_DEFAULTS = {
    "energy": {"law": "uniform", "modes": 100_000},
    "madelung": {"law": "power", "modes": 32},
    "trajectories": {"law": "power", "modes": 32},
}


@dataclass
class RunConfig:
    experiment: str
    params: dict
    out: Path
    seed: int
    threads: int
    sources: dict = field(default_factory=dict)  # key -> default | config | flag

    def resolved(self) -> dict:
        p = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items()}
        return {"experiment": self.experiment, "seed": self.seed, "threads": self.threads, "out": str(self.out), **p}


def read_config_file(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _table(experiment: str) -> dict:
    table = {**COMMON, **EXPERIMENTS[experiment]}
    for k, v in _STATE_DEFAULTS.get(experiment, {}).items():
        kind, _, help_ = table[k]
        table[k] = (kind, v, help_)
    return table


def resolve(experiment: str, file_values: dict, flag_values: dict) -> RunConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {sorted(EXPERIMENTS)}")
    table = _table(experiment)
    unknown = sorted(set(file_values) - set(table))
    if unknown:
        raise ConfigError(f"unknown config keys for {experiment}: {unknown}")
    params, sources = {}, {}
    for key, (kind, default, _) in table.items():
        if key in flag_values:
            raw, src = flag_values[key], "flag"
        elif key in file_values:
            raw, src = file_values[key], "config"
        else:
            raw, src = default, "default"
        try:
            params[key] = None if raw is None else kind(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
        sources[key] = src
    threads = params.pop("threads")
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        try:
            threads = int(env) if env else 1
        except ValueError as exc:
            raise ConfigError(f"${THREADS_ENV} must be an integer, got {env!r}") from exc
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    out = Path(params.pop("out"))
    seed = params.pop("seed")
    cfg = RunConfig(experiment, params, out, seed, threads, sources)
    _check(cfg)
    return cfg


# ---------------------------------------------------------------------------
# validation


def _basis(p: dict) -> BasisSpec:
    if p["basis"] == BOX:
        return BasisSpec.box(p["length"], p["mass"], p["hbar"])
    if p["basis"] == KERR:
        return BasisSpec.kerr(p["omega"], p["kappa"], p["hbar"])
    raise ConfigError(f"basis must be 'box' or 'kerr', got {p['basis']!r}")


def _law(p: dict, seed: int) -> CoefficientLaw:
    law = p["law"]
    if law == "uniform":
        return CoefficientLaw.uniform(p["modes"])
    if law == "power":
        if p["phases"] not in ("unit", "random"):
            raise ConfigError("phases must be 'unit' or 'random'")
        return CoefficientLaw.power_law(p["alpha"], p["modes"], p["phases"], seed)
    if law == "kerr_zeta":
        return CoefficientLaw.kerr_zeta(p["modes"])
    raise ConfigError(f"law must be uniform, power or kerr_zeta, got {law!r}")


def _state(cfg: RunConfig):
    p = cfg.params
    try:
        return build_state(_basis(p), _law(p, cfg.seed))
    except StateError as exc:
        raise ConfigError(str(exc)) from exc


def _check(cfg: RunConfig):
    p = cfg.params
    e = cfg.experiment
    if "modes" in p and p["modes"] < 1:
        raise ConfigError("modes must be at least 1 (N >= 1)")
    if "basis" in p:
        _basis(p)
        # coefficient checks (alpha > 1/2, law/basis compatibility) without
        # filling large coefficient arrays
        probe = dict(p, modes=1)
        try:
            build_state(_basis(probe), _law(probe, cfg.seed))
        except StateError as exc:
            raise ConfigError(str(exc)) from exc
    if e in ("carpet", "madelung", "trajectories") and p["basis"] != BOX:
        raise ConfigError(f"{e} runs on the box basis")
    if e == "fractal":
        if p["source"] not in ("state", "synthetic"):
            raise ConfigError("source must be 'state' or 'synthetic'")
        if p["section"] not in (fractal.SPATIAL, fractal.TEMPORAL):
            raise ConfigError("section must be 'spatial' or 'temporal'")
        if p["observable"] not in fractal.OBSERVABLES:
            raise ConfigError(f"observable must be one of {fractal.OBSERVABLES}")
        if p["source"] == "state" and p["basis"] != BOX:
            raise ConfigError("state sections run on the box basis")
    if e == "madelung" and p["stencil_order"] not in (2, 4, 6):
        raise ConfigError("stencil_order must be 2, 4 or 6")
    if e == "trajectories":
        if p["count"] < 1:
            raise ConfigError("count must be at least 1")
        if any(v < 0 for v in p["times"]):
            raise ConfigError("times must be non-negative")
        if any(not a > 0.5 for a in p["probe_alphas"]):
            raise ConfigError("probe exponents need alpha > 1/2 for a square-integrable state")
    if e == "carpet" and min(p["grid"]) < 2:
        raise ConfigError("grid needs at least two points in each direction")
    if e == "slit":
        if not p["width"] > 0 or p["x_count"] < 1 or p["t"] < 0:
            raise ConfigError("slit needs width > 0, x_count >= 1 and t >= 0")
    if e == "kerr" and p["hermite_max"] <= p["hermite_min"]:
        raise ConfigError("hermite_max must exceed hermite_min")


def resource_estimate(cfg: RunConfig) -> dict:
    """Rough size of the dominant computation (no work is done)."""
    p = cfg.params
    e = cfg.experiment
    modes = p.get("modes", 0)
    points = 0
    if e == "carpet":
        points = p["grid"][0] * p["grid"][1]
    elif e == "fractal":
        points = p["resolution"] + 1
    elif e == "madelung":
        points = max(p["divisions"] or [0])
    elif e == "trajectories":
        points = p["count"] * max(len(p["times"]), 1)
    elif e == "slit":
        points = p["x_count"]
    work = int(modes) * int(points)
    memory_mb = 16.0 * points * 4 / 2**20
    return {"modes": int(modes), "grid_points": int(points), "mode_grid_products": work, "memory_mb": memory_mb}


def validate(cfg: RunConfig) -> dict:
    est = resource_estimate(cfg)
    budget = cfg.params.get("memory_budget_mb", 4096.0)
    warnings = []
    if est["memory_mb"] > budget:
        warnings.append(f"estimated memory {est['memory_mb']:.1f} MB exceeds budget {budget:.1f} MB")
    return {"valid": True, "config": cfg.resolved(), "resources": est, "warnings": warnings}


# ---------------------------------------------------------------------------
# experiments


def _run_carpet(cfg: RunConfig) -> dict:
    state = _state(cfg)
    nx, nt = cfg.params["grid"]
    b = state.basis
    grid = SpaceTimeGrid.box(b, nx, b.revival_time * np.arange(nt) / nt, endpoints=True)
    values = evaluate_series(state, grid)
    prov = FAST if state.size * grid.x_count > (1 << 22) else NAIVE
    write_field_csv(cfg.out / "field.csv", ComplexField(values, grid, b, prov), {"state": _state_meta(state)})
    return {"files": ["field.csv", "field.json"]}


def _state_meta(state) -> dict:
    return {"basis": state.basis.to_dict(), "law": state.law.to_dict(), "modes": state.size}


def _run_classify(cfg: RunConfig) -> dict:
    p = cfg.params
    report = energy.classify_scaling(ScalingTriple(p["alpha"], p["beta"], p["gamma"]))
    write_json(cfg.out / "classification.json", report.to_dict())
    return {"files": ["classification.json"], "counterexample": report.to_dict()["counterexample"]}


def _run_energy(cfg: RunConfig) -> dict:
    state = _state(cfg)
    moments = energy.energy_moment_partial_sums(state, cauchy_tol=cfg.params["cauchy_tol"])
    norms = hamiltonian_norms(state)
    result = {"state": _state_meta(state), "moments": moments.to_dict(), "h_psi_l2": norms.to_dict()}
    if state.scaling is not None:
        result["classification"] = energy.classify_scaling(state.scaling).to_dict()
    write_json(cfg.out / "energy.json", result)
    return {"files": ["energy.json"]}


def _run_madelung(cfg: RunConfig) -> dict:
    p = cfg.params
    state = _state(cfg)
    t = [p["t_fraction"] * state.basis.revival_time]
    rows = madelung.refinement_table(state, p["divisions"], t, p["stencil_order"]) if p["divisions"] else []
    sweep = []
    if p["sweep"]:
        parent = build_state(state.basis, _law(dict(p, modes=max(p["sweep"])), cfg.seed))
        sweep = madelung.coupled_sweep(parent.truncated, p["sweep"], t, p["cells_per_mode"], p["stencil_order"])
    write_json(
        cfg.out / "madelung.json",
        {"state": _state_meta(state), "stencil_order": p["stencil_order"], "t": t[0], "refinement_table": rows, "coupled_sweep": sweep},
    )
    return {"files": ["madelung.json"]}


def _run_trajectories(cfg: RunConfig) -> dict:
    p = cfg.params
    state = _state(cfg)
    T = state.basis.revival_time
    times = sorted({0.0, *[f * T for f in p["times"]]})
    ens = bohm.Ensemble.sample(state, p["count"], cfg.seed)
    report = bohm.evolve_ensemble(state, ens, times, rtol=p["rtol"])
    report.dump_csv(cfg.out / "trajectories.csv")
    write_json(cfg.out / "ensemble.json", report.to_dict())
    files = ["trajectories.csv", "ensemble.json"]
    if p["probe_alphas"]:
        probes = [bohm.velocity_convergence_probe(a, phases=p["phases"], seed=cfg.seed).to_dict() for a in p["probe_alphas"]]
        write_json(cfg.out / "velocity_probe.json", {"probes": probes})
        files.append("velocity_probe.json")
    return {"files": files}


def _run_fractal(cfg: RunConfig) -> dict:
    p = cfg.params
    if p["source"] == "synthetic":
        samples = fractal.synthetic_fourier_series(p["z"], p["modes"], cfg.seed)
    else:
        state = _state(cfg)
        b = state.basis
        period = b.revival_time if p["section"] == fractal.SPATIAL else b.length
        fixed = None if p["fixed"] is None else p["fixed"] * period
        samples = fractal.extract_section(state, p["section"], fixed, p["observable"], p["resolution"])
    box = fractal.box_count_dimension(samples)
    var = fractal.variation_dimension(samples)
    samples.dump_csv(cfg.out / "section.csv")
    write_json(
        cfg.out / "fractal.json",
        {"section": samples.section, "out_of_regime": samples.out_of_regime, "estimates": [box.to_dict(), var.to_dict()]},
    )
    return {"files": ["section.csv", "fractal.json"], "D": box.D}


def _run_slit(cfg: RunConfig) -> dict:
    p = cfg.params
    basis = BasisSpec.slit(p["width"], p["p0"], p["mass"], p["hbar"])
    x = np.linspace(p["x_min"], p["x_max"], p["x_count"])
    ev = slit.evaluate_slit_wavefunction(basis, x, p["t"], p["tol"])
    table = np.column_stack([x, np.full(x.size, p["t"]), ev.values.real, ev.values.imag, ev.error])
    np.savetxt(cfg.out / "slit.csv", table, delimiter=",", fmt="%.17g", header="x,t,re_psi,im_psi,error", comments="")
    write_json(cfg.out / "slit.json", {"basis": basis.to_dict(), "max_error": float(ev.error.max()), "tol": p["tol"]})
    return {"files": ["slit.csv", "slit.json"]}


def _run_kerr(cfg: RunConfig) -> dict:
    p = cfg.params
    basis = BasisSpec.kerr(p["omega"], p["kappa"], p["hbar"])
    state = build_state(basis, CoefficientLaw.kerr_zeta(p["modes"]))
    moments = energy.energy_moment_partial_sums(state, cauchy_tol=p["cauchy_tol"])
    interval = tuple(p["interval"])
    if len(interval) != 2:
        raise ConfigError("interval needs two numbers")
    scan = energy.hermite_amplitude_exponent((p["hermite_min"], p["hermite_max"]), interval)
    check = energy.verify_counterexample(state)
    result = {
        "state": _state_meta(state),
        "classification": energy.classify_scaling(state.scaling).to_dict(),
        "moments": moments.to_dict(),
        "hermite_scan": {
            "ns": scan.ns,
            "sup": scan.sup,
            "fit": scan.fit.to_dict(),
            "regime_mismatch": scan.regime_mismatch,
        },
        "counterexample_check": check.to_dict(),
    }
    write_json(cfg.out / "kerr.json", result)
    return {"files": ["kerr.json"]}


RUNNERS = {
    "carpet": _run_carpet,
    "classify": _run_classify,
    "energy": _run_energy,
    "madelung": _run_madelung,
    "trajectories": _run_trajectories,
    "fractal": _run_fractal,
    "slit": _run_slit,
    "kerr": _run_kerr,
}

NUMERICAL_ERRORS = (
    ArithmeticError,
    FloatingPointError,
    bohm.DegenerateDensityError,
    fractal.InsufficientScalesError,
    madelung.EmptyDecompositionError,
    StateError,
    ValueError,
)


def _versions() -> dict:
    return {
        "artifact": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def run(cfg: RunConfig) -> dict:
    """Execute one experiment; writes manifest, results, then the marker."""
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        marker = cfg.out / MARKER
        if marker.exists():
            marker.unlink()
        manifest = {"config": cfg.resolved(), "sources": cfg.sources, "versions": _versions(), "status": "running"}
        write_json(cfg.out / "manifest.json", manifest)
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc

    start = time.perf_counter()
    with fft.set_workers(cfg.threads):
        summary = RUNNERS[cfg.experiment](cfg)
    elapsed = time.perf_counter() - start

    try:
        manifest.update(status="complete", timings={"run_seconds": elapsed}, outputs=summary["files"])
        write_json(cfg.out / "manifest.json", manifest)
        (cfg.out / MARKER).write_text("ok\n")
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    return summary


class _IOFailure(OSError):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def _flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carpetlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(EXPERIMENTS) + ["validate"]:
        sp = sub.add_parser(name, help=f"run the {name} experiment" if name != "validate" else "dry-run checks")
        sp.add_argument("--config", help="key = value parameter file")
        if name == "validate":
            sp.add_argument("--experiment", required=True, choices=sorted(EXPERIMENTS))
            keys = sorted(set().union(*(_table(e) for e in EXPERIMENTS)))
            table = {k: (str, None, "") for k in keys}
        else:
            table = _table(name)
        for key, (_, default, help_) in table.items():
            sp.add_argument(_flag_name(key), dest=key, default=argparse.SUPPRESS, help=f"{help_} [default: {default}]")
    return parser


def _error(out: Path | None, code: int, kind: str, message: str) -> int:
    payload = {"error": kind, "message": message, "exit_code": code}
    sys.stderr.write(dumps(payload))
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            write_json(out / "error.json", payload)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    values = {k: v for k, v in vars(args).items() if k not in ("command", "config", "experiment")}
    out = Path(values["out"]) if "out" in values else None
    try:
        file_values = read_config_file(args.config) if args.config else {}
        experiment = args.experiment if args.command == "validate" else args.command
        if args.command == "validate":
            extra = sorted(set(values) - set(_table(experiment)))
            if extra:
                raise ConfigError(f"unknown flags for {experiment}: {[_flag_name(k) for k in extra]}")
        cfg = resolve(experiment, file_values, values)
        out = cfg.out
        if args.command == "validate":
            sys.stdout.write(dumps(validate(cfg)))
            return EXIT_OK
        summary = run(cfg)
        sys.stdout.write(dumps({"status": "ok", **summary}))
        return EXIT_OK
    except ConfigError as exc:
        return _error(out, EXIT_CONFIG, "config", str(exc))
    except _IOFailure as exc:
        return _error(None, EXIT_IO, "io", str(exc))
    except OSError as exc:
        return _error(None, EXIT_IO, "io", str(exc))
    except NUMERICAL_ERRORS as exc:
        return _error(out, EXIT_NUMERICAL, type(exc).__name__, str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
