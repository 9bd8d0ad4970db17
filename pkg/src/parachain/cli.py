"""Command-line front end: ``parachain <command> --config run.json --out result.csv``.

Exit codes: 0 success, 2 configuration error, 3 steady state requested on an
unstable system, 4 numerical failure.  Output is written only on success
and is byte-identical for identical inputs regardless of ``--threads``.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import config as cfgmod
from .dynamics import DriveSpec, integrate_coherences, relaxation_time
from .errors import ConfigError, ParachainError, SingularProbeError, UnstableSystemError
from .model import build_dynamical_matrix
from .parallel import default_threads, ordered_map
from .response import (
    default_frequency_grid,
    frobenius_gain,
    greens_function,
    nonreciprocity,
    svd_of_inverse_propagator,
)
from .sensing import SensorConfig, drive_to_force, frequency_scan, sensing_report, sensing_table
from .steadystate import lyapunov_steady_state, phonon_numbers, stability
from .topology import phase_diagram, winding_number

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_NUMERICAL = 0, 2, 3, 4


@dataclass
class SweepResult:
    """Ordered rows with a fixed column list; complex cells become _re/_im pairs."""

    columns: list
    rows: list
    meta: dict = field(default_factory=dict)


def _expand(columns, rows):
    cols = []
    for c in columns:
        if any(isinstance(r.get(c), complex) for r in rows):
            cols += [f"{c}_re", f"{c}_im"]
        else:
            cols.append(c)
    flat = []
    for r in rows:
        out = {}
        for c in columns:
            v = r.get(c)
            if f"{c}_re" in cols:
                v = complex(v) if v is not None else complex(math.nan, math.nan)
                out[f"{c}_re"], out[f"{c}_im"] = v.real, v.imag
            else:
                out[c] = v
        flat.append(out)
    return cols, flat


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    s = str(v)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _jsonable(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def emit(result: SweepResult, fmt: str) -> str:
    """Serialise a sweep as CSV (``#`` provenance lines, header, rows) or JSON."""
    cols, flat = _expand(result.columns, result.rows)
    if fmt == "json":
        doc = {"meta": result.meta,
               "columns": cols,
               "rows": [{c: _jsonable(r[c]) for c in cols} for r in flat]}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ConfigError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    for key, value in result.meta.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True, separators=(',', ':'))}\n")
    buf.write(",".join(cols) + "\n")
    for r in flat:
        buf.write(",".join(_cell(r[c]) for c in cols) + "\n")
    return buf.getvalue()


# -- commands -----------------------------------------------------------------

def _err(exc) -> str:
    return f"error: {type(exc).__name__}: {exc}"


def cmd_greens(cfg, threads):
    params = cfgmod.chain_params(cfg)
    h = build_dynamical_matrix(params)
    grid = cfg.get("grid", {})
    omegas = cfgmod.grid_values(grid["omega"]) if "omega" in grid else default_frequency_grid()

    def one(w):
        try:
            gf = greens_function(h, float(w))
            chi = nonreciprocity(gf) if params.n_sites > 1 else math.nan
            return {"omega": float(w), "g_n1_abs": abs(gf.end_to_end()),
                    "gbar_n1_abs": abs(gf.idler_end_to_end()), "chi": chi,
                    "frobenius_gain": frobenius_gain(gf), "g_n1": gf.end_to_end(),
                    "gbar_n1": gf.idler_end_to_end(), "status": "ok"}
        except (SingularProbeError, ConfigError) as exc:
            nan = math.nan
            return {"omega": float(w), "g_n1_abs": nan, "gbar_n1_abs": nan, "chi": nan,
                    "frobenius_gain": nan, "g_n1": complex(nan, nan),
                    "gbar_n1": complex(nan, nan), "status": _err(exc)}

    rows = ordered_map(one, omegas, threads)
    cols = ["omega", "g_n1_abs", "gbar_n1_abs", "chi", "frobenius_gain", "g_n1", "gbar_n1", "status"]
    return SweepResult(cols, rows)


def cmd_svd(cfg, threads):
    params = cfgmod.chain_params(cfg)
    h = build_dynamical_matrix(params)
    omega = float(cfg.get("omega", 0.0))
    diag = svd_of_inverse_propagator(h, omega, cfg["tolerances"]["edge_threshold"])
    rows = [{"kind": "singular_value", "index": i, "value": float(s)}
            for i, s in enumerate(diag.singular_values)]
    for which in ("right", "left"):
        prof = diag.site_profile(which)
        rows += [{"kind": f"{which}_profile", "index": i + 1, "value": float(p)}
                 for i, p in enumerate(prof)]
    meta = {"omega": omega, "gap_ratio": diag.gap_ratio, "has_edge": diag.has_edge,
            "localization_length": diag.localization_length, "fit_r2": diag.fit_r2}
    return SweepResult(["kind", "index", "value"], rows, meta)


def cmd_winding(cfg, threads):
    params = cfgmod.chain_params(cfg)
    tol = cfg["tolerances"]
    grid = cfg.get("grid", {})
    kw = dict(k_points=tol["k_points"], tail_tolerance=tol["tail"])
    if "gamma" in grid:
        omega = float(cfg.get("omega", 0.0))
        xs, key = cfgmod.grid_values(grid["gamma"]), "gamma"

        def run(x):
            return winding_number(params.replace(gamma=float(x)), omega, **kw)
    else:
        xs = cfgmod.grid_values(grid["omega"]) if "omega" in grid else np.array([cfg.get("omega", 0.0)])
        key = "omega"

        def run(x):
            return winding_number(params, float(x), **kw)

    def one(x):
        try:
            r = run(x)
            return {key: float(x), "nu": r.nu, "raw": r.raw_integral, "status": "ok"}
        except ParachainError as exc:
            return {key: float(x), "nu": None, "raw": math.nan, "status": _err(exc)}

    return SweepResult([key, "nu", "raw", "status"], ordered_map(one, xs, threads))


def cmd_phase_diagram(cfg, threads):
    params = cfgmod.chain_params(cfg)
    cfgmod.require(cfg, "grid")
    grid = cfg["grid"]
    if "gamma" not in grid or "delta_phi" not in grid:
        raise ConfigError("phase-diagram needs grid.gamma and grid.delta_phi")
    tol = cfg["tolerances"]
    pts = phase_diagram(cfgmod.grid_values(grid["gamma"]),
                        cfgmod.grid_values(grid["delta_phi"], angles=True), params,
                        float(cfg.get("omega", 0.0)), tol["k_points"], threads,
                        tol["stability"], tol["tail"])
    rows = [asdict(p) for p in pts]
    return SweepResult(["gamma", "delta_phi", "nu", "stable", "label", "margin", "status"], rows)


def cmd_steady(cfg, threads):
    params = cfgmod.chain_params(cfg)
    h = build_dynamical_matrix(params)
    c = lyapunov_steady_state(h, tolerance=cfg["tolerances"]["stability"])
    n_ph = phonon_numbers(c)
    rows = [{"site": i + 1, "phonon_number": float(n_ph[i]), "pair_moment": c.pair_moment(i + 1)}
            for i in range(params.n_sites)]
    meta = {"method": c.method, "margin": stability(h).margin}
    return SweepResult(["site", "phonon_number", "pair_moment"], rows, meta)


def cmd_stability_scan(cfg, threads):
    params = cfgmod.chain_params(cfg)
    grid = cfg.get("grid", {})
    if "gamma" not in grid:
        raise ConfigError("stability-scan needs grid.gamma")
    sizes = grid.get("n_sites", [params.n_sites])
    tol = cfg["tolerances"]["stability"]
    cells = [(int(n), float(g)) for n in sizes for g in cfgmod.grid_values(grid["gamma"])]

    def one(cell):
        n, g = cell
        p = params.replace(n_sites=n, gamma=g)
        if p.hopping_range is not None and p.hopping_range > n - 1:
            p = p.replace(hopping_range=max(n - 1, 1) if n > 1 else None)
        rep = stability(build_dynamical_matrix(p), tol)
        return {"n_sites": n, "gamma": g, "stable": rep.stable, "margin": rep.margin}

    return SweepResult(["n_sites", "gamma", "stable", "margin"], ordered_map(one, cells, threads))


def cmd_dynamics(cfg, threads):
    params = cfgmod.chain_params(cfg)
    h = build_dynamical_matrix(params)
    eps, detuning = cfgmod.drive_amplitudes(cfg, params.n_sites)
    drive = DriveSpec(eps, detuning)
    opts = cfg.get("dynamics", {})
    site = opts.get("site", params.n_sites)
    rtol = cfg["tolerances"]["rtol"]
    res = relaxation_time(h, drive, site=site, t_end=opts.get("t_end"),
                          envelope=opts.get("envelope", "position"), rtol=rtol)
    samples = opts.get("samples", 1001)
    times = np.linspace(0.0, res.t_end, samples)
    traj = integrate_coherences(h, drive, res.t_end, t_eval=times, rtol=rtol)
    rows = []
    for t, a in zip(traj.times, traj.a):
        row = {"t": float(t)}
        row.update({f"a{i + 1}": complex(a[i]) for i in range(params.n_sites)})
        rows.append(row)
    meta = {"tau": res.tau, "site": res.site, "envelope": res.envelope,
            "window": res.window, "steady_envelope": res.steady_envelope,
            "fraction": res.fraction}
    if "physical" in cfg:
        scale = cfgmod.physical_params(cfg).frequency_scale
        meta["tau_seconds"] = res.tau / scale
    cols = ["t"] + [f"a{i + 1}" for i in range(params.n_sites)]
    return SweepResult(cols, rows, meta)


def _sensor(cfg):
    params = cfgmod.chain_params(cfg)
    phys = cfgmod.physical_params(cfg)
    cfgmod.require(cfg, "sensor")
    s = cfg["sensor"]
    sensor = SensorConfig(phys, params, s["force_detuning"],
                          s.get("classical_noise_m", 0.2e-6), s.get("sense_site", 1),
                          s.get("detect_site"), s.get("force_phase", 0.0))
    if "applied_force_n" in s:
        force = s["applied_force_n"]
    else:
        force = drive_to_force(s.get("drive_amplitude", 1.0), phys)
    return sensor, force


def cmd_sense(cfg, threads):
    sensor, force = _sensor(cfg)
    grid = cfg.get("grid", {})
    if "force_detuning" in grid:
        pts = frequency_scan(sensor, cfgmod.grid_values(grid["force_detuning"]), force,
                             k_points=cfg["tolerances"]["k_points"], threads=threads)
        cols = ["force_detuning", "signal_gain", "idler_gain", "displacement_amplitude",
                "snr", "nu", "in_band", "status"]
        return SweepResult(cols, [asdict(p) for p in pts], {"applied_force_n": force})
    rep = sensing_report(sensor, force)
    row = asdict(rep)
    return SweepResult(list(row), [row])


def cmd_table1(cfg, threads):
    t = cfg.get("table", {})
    kw = {}
    if "sizes" in t:
        kw["sizes"] = tuple(t["sizes"])
    if "scales_hz" in t:
        kw["scales_hz"] = tuple(t["scales_hz"])
    if "trap_frequency_hz" in t:
        kw["trap_frequency_hz"] = t["trap_frequency_hz"]
    if "classical_noise_m" in t:
        kw["classical_noise"] = t["classical_noise_m"]
    if "chain" in cfg:
        c = dict(cfg["chain"])
        c["delta_phi"] = cfgmod.parse_angle(c["delta_phi"])
        c.pop("n_sites")
        kw["chain"] = c
    if "sensor" in cfg:
        kw["force_detuning"] = cfg["sensor"]["force_detuning"]
    rows = [asdict(r) for r in sensing_table(threads=threads, **kw)]
    cols = ["n_sites", "scale_hz", "tau", "f_min_quantum", "sensitivity_quantum",
            "f_min_total", "sensitivity_total", "displacement_amplitude", "shot_noise"]
    return SweepResult(cols, rows, {"units": "tau [s], forces [N], sensitivities [N/sqrt(Hz)], lengths [m]"})


COMMANDS = {
    "greens": cmd_greens,
    "svd": cmd_svd,
    "winding": cmd_winding,
    "phase-diagram": cmd_phase_diagram,
    "steady": cmd_steady,
    "stability-scan": cmd_stability_scan,
    "dynamics": cmd_dynamics,
    "sense": cmd_sense,
    "table1": cmd_table1,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parachain", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"parachain {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration (optional for table1)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], help="default: from --out suffix, else csv")
    p.add_argument("--threads", type=int, help="worker threads (default: PARACHAIN_THREADS or CPU count)")
    p.add_argument("--tolerance-override", action="append", default=[], metavar="KEY=VALUE",
                   help="override a tolerance; repeatable")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command != "table1":
                raise ConfigError(f"{args.command} needs --config")
            cfg = cfgmod.validate({"version": cfgmod.SCHEMA_VERSION})
        else:
            cfg = cfgmod.load_config(args.config)
        cfg = cfgmod.apply_overrides(cfg, args.tolerance_override)
        fmt = args.format or ("json" if (args.out or "").endswith(".json") else "csv")
        threads = default_threads() if args.threads is None else max(1, args.threads)
        result = COMMANDS[args.command](cfg, threads)
    except ConfigError as exc:
        print(f"parachain: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnstableSystemError as exc:
        print(f"parachain: unstable system: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (ParachainError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"parachain: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    result.meta = {"tool": f"parachain {__version__}", "command": args.command,
                   "config_sha256": cfgmod.config_hash(cfg),
                   "tolerances": cfg["tolerances"], "config": cfg, **result.meta}
    text = emit(result, fmt)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
