"""Config-driven command line front end.

Subcommands: run (integrate and write trace/snapshots/meta), check (evaluate
checks against a stored trace directory), sweep (cartesian product of
sweep.* keys into isolated subdirectories), presets (print the warp
catalog).  Config files are line-oriented `dotted.key = value` text with
`#` comments.

All floats are written with 17 significant digits and every reduction has a
fixed evaluation order, so identical configs produce byte-identical
trace.csv and report.json.

Exit codes: 0 run completed / all checks passed, 1 a check failed, 2 the
flow terminated with an event, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .warp import PRESETS, make_warp, radial_potential
from .manifold import make_base
from .geometry import GraphState, snapshot
from .flow import FlowConfig, FlowTrace, FlowEvent, run, TRACE_COLUMNS
from . import verify as _verify

__all__ = ["main", "parse_config", "ConfigError", "load_trace"]

FMT = "%.17g"

CHECK_IDS = ("growth_and_support", "H_floor", "asymptotics_roundness",
             "asymptotics_obstruction", "evolution_residuals", "A_bounded")


class ConfigError(Exception):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"config error ({', '.join(where)}): " if where else "config error: "
        super().__init__(prefix + message)


def parse_config(path):
    """Dotted-key config text -> ordered {key: (value_string, line_no)}."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(exc))
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=i)
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not key or not all(p.isidentifier() for p in key.split(".")):
            raise ConfigError(f"malformed key {key!r}", line=i)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", line=i, field=key)
        out[key] = (val, i)
    return out


def _take(cfg, key, conv, default=None, required=False):
    if key not in cfg:
        if required:
            raise ConfigError("missing required key", field=key)
        return default
    val, line = cfg.pop(key)
    try:
        return conv(val)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad value {val!r}: {exc}", line=line, field=key)


def _parse_modes(s):
    modes = []
    if not s:
        return modes
    for part in s.split(","):
        part = part.strip()
        if not part:
            continue
        l, _, a = part.partition(":")
        modes.append((int(l), float(a)))
    return modes


def _parse_floats(s):
    return [float(x) for x in s.split(",") if x.strip()]


def _parse_ids(s):
    ids = [x.strip() for x in s.split(",") if x.strip()]
    for x in ids:
        if x not in CHECK_IDS:
            raise ValueError(f"unknown check id {x!r} (known: {', '.join(CHECK_IDS)})")
    return ids


def _extract_checks(cfg):
    checks = _take(cfg, "checks", _parse_ids, default=[])
    overrides = {}
    for key in list(cfg):
        if key.startswith("check."):
            parts = key.split(".")
            if len(parts) != 3 or parts[1] not in CHECK_IDS:
                raise ConfigError("expected check.<id>.<param>", field=key)
            val = _take(cfg, key, str)
            overrides.setdefault(parts[1], {})[parts[2]] = val
    return checks, overrides


def build_setup(cfg):
    """Consume config entries into (warp, base, phi0, FlowConfig, checks)."""
    cfg = dict(cfg)
    preset = _take(cfg, "warp.preset", str, required=True)
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}", field="warp.preset")
    params = {}
    for key in list(cfg):
        if key.startswith("warp."):
            name = key.split(".", 1)[1]
            params[name] = _take(cfg, key, float)
    try:
        wspec = make_warp(preset, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field="warp.*")

    kind = _take(cfg, "base.kind", str, required=True)
    resolution = _take(cfg, "base.resolution", int, default=1)
    rho = _take(cfg, "base.rho", float)
    kw = {} if rho is None else {"rho": rho}
    dim = _take(cfg, "base.d", int)
    if dim is not None:
        kw["d"] = dim
    try:
        base = make_base(kind, resolution, **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field="base.kind")

    phi_lit = _take(cfg, "initial.phi", _parse_floats)
    r0 = _take(cfg, "initial.r0", float)
    modes = _take(cfg, "initial.modes", _parse_modes, default=[])
    if phi_lit is not None:
        phi0 = np.array(phi_lit, dtype=float)
        if phi0.size != base.n_nodes:
            raise ConfigError(f"initial.phi has {phi0.size} values, base has "
                              f"{base.n_nodes} nodes", field="initial.phi")
        phi0 = phi0.reshape(base.shape)
    else:
        if r0 is None:
            raise ConfigError("need initial.r0 or initial.phi", field="initial.r0")
        if base.kind == "point":
            if modes:
                raise ConfigError("modes need an angular base", field="initial.modes")
            r = np.full(base.shape, r0)
        else:
            theta = base.theta if base.kind in ("circle", "axisphere") \
                else base.x[:, None] + 0.0 * base.x[None, :]
            r = np.full(base.shape, r0)
            for l, a in modes:
                r = r + a * np.cos(l * theta)
        phi0 = radial_potential(wspec, r)

    fc = FlowConfig(
        t_end=_take(cfg, "flow.t_end", float, required=True),
        integrator=_take(cfg, "flow.integrator", str, default="rk4"),
        safety=_take(cfg, "flow.safety", float, default=0.25),
        dt_max=_take(cfg, "flow.dt_max", float, default=1e-3),
        snapshot_every=_take(cfg, "flow.snapshot_every", float, default=1.0),
        record_every=_take(cfg, "flow.record_every", float, default=0.1),
        theta_min=_take(cfg, "flow.theta_min", float, default=1e-3),
    )

    checks, overrides = _extract_checks(cfg)
    cfg.pop("output_dir", None)
    for key, (_, line) in cfg.items():
        if not key.startswith("sweep."):
            raise ConfigError(f"unknown key {key!r}", line=line, field=key)
    return wspec, base, phi0, fc, checks, overrides


# ---------------------------------------------------------------------------
# serialization

def _fmt(x):
    return FMT % float(x)


def write_outputs(trace, outdir, config_echo):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["t," + ",".join(TRACE_COLUMNS)]
    for i, t in enumerate(trace.times):
        row = [_fmt(t)] + [_fmt(trace.columns[c][i]) for c in TRACE_COLUMNS]
        lines.append(",".join(row))
    (outdir / "trace.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    snapdir = outdir / "snapshots"
    snapdir.mkdir(exist_ok=True)
    for t, state, snap in trace.snapshots:
        base = trace.base
        if base.kind == "axisphere":
            coord_name, coords = "theta", base.theta
        elif base.kind == "circle":
            coord_name, coords = "theta", base.theta
        else:
            coord_name, coords = "index", np.arange(base.n_nodes)
        cols = [coords, snap.r.ravel(), state.phi.ravel(),
                snap.theta.ravel(), snap.H.ravel(), snap.omega.ravel()]
        rows = [f"{coord_name},r,phi,Theta,H,omega"]
        for vals in zip(*cols):
            rows.append(",".join(_fmt(v) for v in vals))
        (snapdir / f"t={float(t)!r}.csv").write_text("\n".join(rows) + "\n",
                                                     encoding="utf-8")

    terminal = ({"status": "completed"} if trace.completed
                else {"status": "event", **trace.terminal.as_dict()})
    meta = {
        "config": config_echo,
        "n": trace.n,
        "terminal": terminal,
        "versions": {
            "imcflow": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    (outdir / "meta.json").write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_trace(outdir):
    """Rebuild a FlowTrace from a run directory written by write_outputs.

    Diagnostics come bit-exactly from trace.csv; snapshot geometry is
    recomputed from the stored phi fields through the same snapshot code
    the run used.
    """
    outdir = Path(outdir)
    meta_path = outdir / "meta.json"
    trace_path = outdir / "trace.csv"
    if not meta_path.is_file() or not trace_path.is_file():
        raise ConfigError(f"no trace in {outdir} (need meta.json and trace.csv)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    cfg = {k: (v, None) for k, v in meta["config"].items()}
    wspec, base, _, fc, _, _ = build_setup(cfg)

    rows = trace_path.read_text(encoding="utf-8").strip().splitlines()
    header = rows[0].split(",")
    data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    times = data[:, 0]
    columns = {name: data[:, j] for j, name in enumerate(header) if j > 0}

    snaps = []
    snapdir = outdir / "snapshots"
    if snapdir.is_dir():
        entries = sorted(snapdir.glob("t=*.csv"),
                         key=lambda p: float(p.stem[2:]))
        for p in entries:
            t = float(p.stem[2:])
            lines = p.read_text(encoding="utf-8").strip().splitlines()
            names = lines[0].split(",")
            vals = np.array([[float(x) for x in ln.split(",")]
                             for ln in lines[1:]])
            phi = vals[:, names.index("phi")].reshape(base.shape)
            state = GraphState(base, wspec, phi, t)
            snaps.append((t, state, snapshot(state)))

    if meta["terminal"]["status"] == "completed":
        terminal = "completed"
    else:
        ev = meta["terminal"]
        terminal = FlowEvent(ev["kind"], ev["t"], ev["node"], ev["value"])
    return FlowTrace(base=base, warp=wspec, config=fc, times=times,
                     columns=columns, snapshots=snaps, terminal=terminal)


# ---------------------------------------------------------------------------
# checks

def _conv_override(name, val):
    if name == "which":
        return [x.strip() for x in val.split(",") if x.strip()]
    return float(val)


def run_checks(trace, check_ids, overrides):
    reports = []
    for cid in check_ids:
        kw = {k: _conv_override(k, v)
              for k, v in overrides.get(cid, {}).items()}
        if cid == "growth_and_support":
            rep = _verify.check_growth_and_support(trace, **kw)
        elif cid == "H_floor":
            rep = _verify.check_H_floor(trace, **kw)
        elif cid == "asymptotics_roundness":
            rep = _verify.check_asymptotics(trace, "expect_roundness", **kw)
        elif cid == "asymptotics_obstruction":
            rep = _verify.check_asymptotics(trace, "expect_obstruction", **kw)
        elif cid == "evolution_residuals":
            rep = _verify.evolution_residuals(trace, **kw)
        else:
            rep = _verify.check_A_bounded(trace)
        reports.append(rep)
    return reports


def write_report(reports, outdir):
    doc = {"checks": [r.as_dict() for r in reports],
           "all_passed": all(r.passed is not False for r in reports)}
    path = Path(outdir) / "report.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return doc


# ---------------------------------------------------------------------------
# subcommands

def _echo(cfg):
    return {k: v for k, (v, _) in sorted(cfg.items())}


def cmd_run(config_path, outdir):
    cfg = parse_config(config_path)
    echo = _echo(cfg)
    if outdir is None:
        outdir = cfg.get("output_dir", (None, None))[0]
    if outdir is None:
        raise ConfigError("no output directory (use --out or output_dir)")
    wspec, base, phi0, fc, checks, overrides = build_setup(cfg)
    initial = GraphState(base, wspec, phi0, 0.0)
    trace = run(initial, fc)
    write_outputs(trace, outdir, echo)
    code = 0
    if checks:
        reports = run_checks(trace, checks, overrides)
        write_report(reports, outdir)
        if any(r.passed is False for r in reports):
            code = 1
    if not trace.completed:
        code = 2
    return code


def cmd_check(config_path, outdir):
    cfg = parse_config(config_path)
    if outdir is None:
        outdir = cfg.get("output_dir", (None, None))[0]
    if outdir is None:
        raise ConfigError("no trace directory (use --out or output_dir)")
    # only the check keys matter here; run keys describe the stored trace
    checks, overrides = _extract_checks(dict(cfg))
    if not checks:
        raise ConfigError("no checks requested", field="checks")
    trace = load_trace(outdir)
    reports = run_checks(trace, checks, overrides)
    write_report(reports, outdir)
    return 1 if any(r.passed is False for r in reports) else 0


def _sweep_label(assignment):
    return "__".join(f"{k.split('.', 1)[1]}={v}" for k, v in assignment)


def cmd_sweep(config_path, outdir, jobs):
    cfg = parse_config(config_path)
    if outdir is None:
        outdir = cfg.get("output_dir", (None, None))[0]
    if outdir is None:
        raise ConfigError("no output directory (use --out or output_dir)")
    sweep_keys = sorted(k for k in cfg if k.startswith("sweep."))
    if not sweep_keys:
        raise ConfigError("sweep needs at least one sweep.* key")
    axes = []
    for k in sweep_keys:
        val, line = cfg.pop(k)
        vals = [v.strip() for v in val.split(",") if v.strip()]
        if not vals:
            raise ConfigError("empty sweep axis", line=line, field=k)
        axes.append([(k, v) for v in vals])

    tasks = []
    for combo in product(*axes):
        sub = dict(cfg)
        assignment = []
        for k, v in combo:
            target = k.split(".", 1)[1]
            sub[target] = (v, None)
            assignment.append((k, v))
        subdir = Path(outdir) / _sweep_label(assignment)
        tasks.append((sub, subdir))

    def one(task):
        sub, subdir = task
        echo = _echo(sub)
        try:
            wspec, base, phi0, fc, checks, overrides = build_setup(sub)
        except ConfigError as exc:
            print(exc, file=sys.stderr)
            return 3
        trace = run(GraphState(base, wspec, phi0, 0.0), fc)
        write_outputs(trace, subdir, echo)
        code = 0
        if checks:
            reports = run_checks(trace, checks, overrides)
            write_report(reports, subdir)
            if any(r.passed is False for r in reports):
                code = 1
        if not trace.completed:
            code = 2
        return code

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(one, tasks))
    else:
        codes = [one(t) for t in tasks]
    return max(codes) if codes else 0


def cmd_presets():
    for name in sorted(PRESETS):
        info = PRESETS[name]
        print(f"{name}: {info['summary']}")
        print(f"  params: {info['params']}")
        print(f"  conditions: {info['conditions']}")
    return 0


# ---------------------------------------------------------------------------
# fixture seeding

def seed_fixtures(outdir):
    """Regenerate fixtures/calibration.json via the residual refinement study.

    Four axisphere runs of the reference euclidean perturbation spanning a
    2x2 grid in (resolution, snapshot spacing).  For each identity the study
    records the envelope coefficient c = max_residual / (dt_snap + dx_min^2)
    at every grid point plus the refinement ratio between the coarsest and
    finest corners, then checks the frozen DEFAULT_C_RES values keep at
    least 1.5x headroom over the worst measured coefficient.
    """
    from .verify import evolution_residuals, DEFAULT_C_RES

    def study(M, dt_snap):
        base = make_base("axisphere", M)
        wspec = make_warp("euclidean")
        r = 1.0 + 0.3 * np.cos(base.theta)
        phi = radial_potential(wspec, r)
        fc = FlowConfig(t_end=0.5, integrator="rk4", dt_max=1e-3,
                        safety=0.5, snapshot_every=dt_snap,
                        record_every=dt_snap)
        return run(GraphState(base, wspec, phi, 0.0), fc)

    grid = [(100, 0.05), (100, 0.0125), (200, 0.05), (200, 0.0125)]
    ids = ("omega_eq", "u_eq", "H_eq", "tw_eq")
    points = {}
    for M, dt_snap in grid:
        trace = study(M, dt_snap)
        rep = evolution_residuals(trace, which=ids,
                                  c_res={k: np.inf for k in ids})
        delta = dt_snap + trace.base.dx_min ** 2
        points[(M, dt_snap)] = {
            w: rep.details["per_identity"][w]["max_residual"] / delta
            for w in ids}

    calib = {}
    ok = True
    for w in ids:
        worst = max(c[w] for c in points.values())
        ratio = points[(100, 0.05)][w] / points[(200, 0.0125)][w]
        frozen = DEFAULT_C_RES[w]
        margin = frozen / worst
        ok = ok and margin >= 1.5
        calib[w] = {
            "coefficients": {f"M={M},dt={dt}": c[w]
                             for (M, dt), c in points.items()},
            "worst_coefficient": worst,
            "refinement_ratio": ratio,
            "frozen_c_res": frozen,
            "margin": margin,
        }
        print(f"{w}: worst c = {worst:.4g}, frozen = {frozen}, "
              f"margin = {margin:.2f}, coarse/fine ratio = {ratio:.2f}")

    doc = {
        "tol_osc": 1e-3,
        "obstruction_floor": 1e-2,
        "c_res": dict(DEFAULT_C_RES),
        "calibration": {
            "setup": {"base": "axisphere", "warp": "euclidean",
                      "initial_r": "1 + 0.3 cos(theta)", "t_end": 0.5,
                      "integrator": "rk4", "safety": 0.5, "dt_max": 1e-3},
            "grid": [{"M": M, "dt_snap": dt} for M, dt in grid],
            "identities": calib,
        },
    }
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "calibration.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    print(f"wrote {path}")
    if not ok:
        print("warning: frozen c_res below 1.5x headroom, recalibrate")
        return 1
    return 0


# ---------------------------------------------------------------------------

def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="imcflow",
        description="inverse mean curvature flow simulator and checker")
    parser.add_argument("command", nargs="?",
                        choices=["run", "check", "sweep", "presets"])
    parser.add_argument("--config", help="path to config file")
    parser.add_argument("--out", help="output (run/sweep) or trace (check) directory")
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep runs")
    parser.add_argument("--seed-fixtures", action="store_true",
                        help="regenerate fixtures/calibration.json and exit")
    args = parser.parse_args(argv)

    try:
        if args.seed_fixtures:
            return seed_fixtures(args.out or "fixtures")
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 3
        if args.command == "presets":
            return cmd_presets()
        if not args.config:
            raise ConfigError("--config is required")
        if args.command == "run":
            return cmd_run(args.config, args.out)
        if args.command == "check":
            return cmd_check(args.config, args.out)
        return cmd_sweep(args.config, args.out, args.jobs)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
