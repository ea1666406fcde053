"""Command-line front end: reproducible experiments with machine-readable output.

Subcommands: gamma, bounds, simulate, moments, scan, verify.  JSON is the
canonical format (schema_version field, keys sorted, floats in full
round-trip precision); CSV is a flat projection with the resolved config
as '# key=value' header lines.  Every report embeds its fully resolved
configuration, including the seed (auto-generated when not supplied), so
any run can be replayed exactly.  Options can also be supplied through
CPBOUNDS_* environment variables; explicit flags win.

Exit codes: 0 all requested checks passed, 1 a check failed, 2 bad input.
Timing goes to stderr so output bytes depend only on config + seed.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
import time

import numpy as np

from . import bounds as bounds_mod
from . import moment_ode, random_walk, sim
from .errors import AccuracyError

SCHEMA_VERSION = 1


# ---------------------------------------------------------------- rendering

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _render(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(_render(x) for x in v) + "]"
    return str(v)


def emit_csv(config: dict, fieldnames: list[str], rows: list[dict]) -> str:
    lines = [f"# {k}={_render(v)}" for k, v in sorted(config.items())]
    lines.append(",".join(fieldnames))
    for r in rows:
        lines.append(",".join(_render(r[f]) for f in fieldnames))
    return "\n".join(lines) + "\n"


def _parse_cell(s: str):
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            continue
    return s


def parse_csv(text: str) -> tuple[dict, list[str], list[dict]]:
    """Inverse of emit_csv: (config as raw strings, fieldnames, typed rows)."""
    lines = text.splitlines()
    config = {}
    i = 0
    while i < len(lines) and lines[i].startswith("# "):
        key, _, val = lines[i][2:].partition("=")
        config[key] = val
        i += 1
    fieldnames = lines[i].split(",")
    rows = [dict(zip(fieldnames, map(_parse_cell, ln.split(","))))
            for ln in lines[i + 1:] if ln]
    return config, fieldnames, rows


# ------------------------------------------------------------- config logic

def _env(name: str) -> str | None:
    return os.environ.get("CPBOUNDS_" + name.upper().replace("-", "_"))


def _resolve(args, dest: str, default=None, parse=None, required=False):
    v = getattr(args, dest, None)
    if v is None:
        raw = _env(dest)
        if raw is not None:
            v = parse(raw) if parse else raw
    if v is None:
        v = default
    if v is None and required:
        raise ValueError(f"--{dest.replace('_', '-')} is required for this command")
    return v


def _parse_floats(raw: str) -> list[float]:
    return [float(x) for x in raw.replace(",", " ").split()]


def _resolve_seed(args) -> int:
    seed = _resolve(args, "seed", parse=int)
    if seed is None:
        seed = secrets.randbits(62)
    return int(seed)


def _model_params(args, gamma_value=None):
    """Resolve (d, L, lambda, a, b); a, b default to the optimal weights."""
    d = int(_resolve(args, "d", default=3, parse=int))
    side = int(_resolve(args, "L", default=16, parse=int))
    lam = _resolve(args, "lam", parse=float, required=True)
    a = _resolve(args, "a", parse=float)
    b = _resolve(args, "b", parse=float)
    if a is None or b is None:
        if gamma_value is None:
            gamma_value = random_walk.gamma(d).value
        a_star, b_star = bounds_mod.optimal_ab(gamma_value)
        a = a_star if a is None else a
        b = b_star if b is None else b
    return sim.ModelParams(d=d, side=side, lam=float(lam), a=float(a), b=float(b))


# ------------------------------------------------------------- subcommands

def cmd_gamma(args):
    d = int(_resolve(args, "d", default=3, parse=int))
    method = _resolve(args, "method", default="quadrature")
    seed = _resolve_seed(args)
    methods = ["quadrature", "solver", "mc"] if method == "all" else [method]
    config = {
        "subcommand": "gamma", "d": d, "method": method,
        "solver_radius": int(_resolve(args, "solver_radius", default=30, parse=int)),
        "max_steps": int(_resolve(args, "max_steps", default=10000, parse=int)),
        "replicas": int(_resolve(args, "replicas", default=100000, parse=int)),
        "seed": seed,
    }
    results = []
    for m in methods:
        if m == "quadrature":
            est = random_walk.gamma(d)
        elif m == "solver":
            est = random_walk.gamma_solver(d, config["solver_radius"])
        elif m == "mc":
            est = random_walk.gamma_mc(d, config["max_steps"],
                                       config["replicas"], seed)
        else:
            raise ValueError(f"unknown method {m!r}")
        results.append({"d": est.d, "value": float(est.value),
                        "error": float(est.error), "method": est.method})
    report = {"schema_version": SCHEMA_VERSION, "config": config,
              "results": results}
    return report, (["d", "value", "error", "method"], results), True


def cmd_bounds(args):
    d_range = getattr(args, "d_range", None)
    if d_range is None:
        d = int(_resolve(args, "d", default=3, parse=int))
        d_min = d_max = d
    else:
        d_min, d_max = map(int, d_range)
    gamma_override = _resolve(args, "gamma", parse=float)
    if gamma_override is not None and d_min != d_max:
        raise ValueError("--gamma override only makes sense for a single --d")
    a = _resolve(args, "a", parse=float)
    b = _resolve(args, "b", parse=float)
    if (a is None) != (b is None):
        raise ValueError("--a and --b must be given together")
    config = {"subcommand": "bounds", "d_min": d_min, "d_max": d_max,
              "gamma_override": gamma_override, "a": a, "b": b}
    gamma_values = {d_min: gamma_override} if gamma_override is not None else None
    rows = []
    for bs in bounds_mod.bound_table(d_min, d_max, gamma_values):
        row = {"d": bs.d, "gamma": bs.gamma, "alpha1": bs.alpha1,
               "alpha2": bs.alpha2, "beta": bs.beta, "lower": bs.lower,
               "optimal_a": bs.optimal_a, "optimal_b": bs.optimal_b}
        if a is not None:
            row["custom_a"] = float(a)
            row["custom_b"] = float(b)
            row["custom_bound"] = float(
                bounds_mod.general_upper_bound(bs.d, a, b, bs.gamma))
        rows.append(row)
    fields = list(rows[0].keys())
    report = {"schema_version": SCHEMA_VERSION, "config": config, "results": rows}
    return report, (fields, rows), True


def cmd_simulate(args):
    seed = _resolve_seed(args)
    params = _model_params(args)
    ts = _resolve(args, "t", default=[1.0], parse=_parse_floats)
    replicas = int(_resolve(args, "replicas", default=1000, parse=int))
    dump = _resolve(args, "dump")
    config = {
        "subcommand": "simulate", "d": params.d, "L": params.side,
        "lambda": params.lam, "a": params.a, "b": params.b,
        "t": [float(t) for t in ts], "replicas": replicas, "seed": seed,
        "dump": dump,
    }
    t0 = time.monotonic()
    ests = sim.estimate_survival(params, ts, replicas, seed)
    results = [{"t": float(t), "survival": e.value, "se": e.se}
               for t, e in zip(ts, ests)]
    report = {"schema_version": SCHEMA_VERSION, "config": config,
              "results": results}
    if dump is not None:
        run = sim.simulate_coupled(params, max(ts), seed, snapshot_times=ts)
        rows = []
        for i, f in enumerate(run.fields):
            xi = f.values
            for site in range(params.n_sites):
                rows.append({"time": f.time, "site": site,
                             "xi": float(xi[site]), "eta": int(run.eta[i, site])})
        with open(dump, "w") as fh:
            fh.write(emit_csv(config, ["time", "site", "xi", "eta"], rows))
        report["dump"] = {"path": dump, "events": run.events,
                          "rng_draws": run.draws}
    print(f"simulate: {time.monotonic() - t0:.2f}s wall", file=sys.stderr)
    return report, (["t", "survival", "se"], results), True


def cmd_moments(args):
    seed = _resolve_seed(args)
    params = _model_params(args)
    ts = _resolve(args, "t", default=[1.0], parse=_parse_floats)
    replicas = int(_resolve(args, "replicas", default=2000, parse=int))
    radius = int(_resolve(args, "radius", default=2, parse=int))
    config = {
        "subcommand": "moments", "d": params.d, "L": params.side,
        "lambda": params.lam, "a": params.a, "b": params.b,
        "t": [float(t) for t in ts], "replicas": replicas,
        "radius": radius, "seed": seed,
    }
    t0 = time.monotonic()
    ests = sim.estimate_moments(params, ts, radius, replicas, seed)
    results = []
    rows = []
    for m in ests:
        second = []
        for j, x in enumerate(m.box.displacements()):
            second.append({"x": list(x), "value": float(m.second_values[j]),
                           "se": float(m.second_se[j])})
            rows.append({"kind": "second", "t": m.time,
                         "x": " ".join(map(str, x)),
                         "value": float(m.second_values[j]),
                         "se": float(m.second_se[j])})
        results.append({"t": m.time, "mean": m.mean.value,
                        "mean_se": m.mean.se, "second": second})
        rows.append({"kind": "mean", "t": m.time, "x": "",
                     "value": m.mean.value, "se": m.mean.se})
    print(f"moments: {time.monotonic() - t0:.2f}s wall", file=sys.stderr)
    report = {"schema_version": SCHEMA_VERSION, "config": config,
              "results": results}
    return report, (["kind", "t", "x", "value", "se"], rows), True


def cmd_scan(args):
    seed = _resolve_seed(args)
    lam_min = float(_resolve(args, "lambda_min", parse=float, required=True))
    lam_max = float(_resolve(args, "lambda_max", parse=float, required=True))
    points = int(_resolve(args, "points", default=7, parse=int))
    d = int(_resolve(args, "d", default=3, parse=int))
    side = int(_resolve(args, "L", default=16, parse=int))
    ts = _resolve(args, "t", default=[10.0], parse=_parse_floats)
    if len(ts) != 1:
        raise ValueError("scan uses a single --t")
    replicas = int(_resolve(args, "replicas", default=500, parse=int))
    gamma_value = random_walk.gamma(d).value
    a_star, b_star = bounds_mod.optimal_ab(gamma_value)
    config = {"subcommand": "scan", "d": d, "L": side,
              "lambda_min": lam_min, "lambda_max": lam_max, "points": points,
              "t": float(ts[0]), "replicas": replicas, "seed": seed}
    t0 = time.monotonic()
    results = []
    for lam in np.linspace(lam_min, lam_max, points):
        params = sim.ModelParams(d=d, side=side, lam=float(lam),
                                 a=a_star, b=b_star)
        est = sim.estimate_survival(params, float(ts[0]), replicas, seed)
        results.append({"lambda": float(lam), "survival": est.value,
                        "se": est.se})
    dead = [r["lambda"] for r in results if r["survival"] <= 3 * r["se"]]
    alive = [r["lambda"] for r in results if r["survival"] > 3 * r["se"]]
    report = {"schema_version": SCHEMA_VERSION, "config": config,
              "results": results,
              "bracket": {"dead_max": max(dead) if dead else None,
                          "alive_min": min(alive) if alive else None}}
    print(f"scan: {time.monotonic() - t0:.2f}s wall", file=sys.stderr)
    return report, (["lambda", "survival", "se"], results), True


def cmd_verify(args):
    d = int(_resolve(args, "d", default=3, parse=int))
    lam = float(_resolve(args, "lam", parse=float, required=True))
    radius = int(_resolve(args, "radius", default=8, parse=int))
    t_end = float(_resolve(args, "t", default=[5.0], parse=_parse_floats)[0])
    dt = float(_resolve(args, "dt", default=0.01, parse=float))
    residual_tol = float(_resolve(args, "residual_tol", default=1e-6, parse=float))
    ceiling_tol = float(_resolve(args, "ceiling_tol", default=1e-6, parse=float))
    green = random_walk.green_table(d, radius)
    gamma_value = green.gamma_value()
    a = _resolve(args, "a", parse=float)
    b = _resolve(args, "b", parse=float)
    a_star, b_star = bounds_mod.optimal_ab(gamma_value)
    a = float(a) if a is not None else a_star
    b = float(b) if b is not None else b_star
    config = {"subcommand": "verify", "d": d, "lambda": lam, "a": a, "b": b,
              "radius": radius, "t": t_end, "dt": dt,
              "residual_tol": residual_tol, "ceiling_tol": ceiling_tol}
    t0 = time.monotonic()
    params = _VerifyParams(d, lam, a, b)
    op = moment_ode.build_G(params, radius)
    K = moment_ode.build_K(params, green, radius)
    residual = moment_ode.residual_GK(op, K)
    ts = [round(x, 10) for x in np.linspace(0.0, t_end, 11)]
    traj = moment_ode.integrate_F(op, ts, dt=dt)
    f_o = traj.origin_series
    residual_ok = residual < residual_tol
    ceiling_ok = bool(np.all(f_o <= K.second_moment_ceiling + ceiling_tol))
    report = {
        "schema_version": SCHEMA_VERSION, "config": config,
        "results": {
            "residual": float(residual),
            "lambda_threshold": float(bounds_mod.lambda_threshold(d, a, b, gamma_value)),
            "c": float(K.c),
            "inf_K": float(K.inf_value),
            "K_O": float(K.origin_value),
            "ceiling": float(K.second_moment_ceiling),
            "survival_floor": float(K.survival_floor),
            "integrator_error": float(traj.error_estimate),
            "F_O_trajectory": [{"t": float(t), "F_O": float(v)}
                               for t, v in zip(ts, f_o)],
        },
        "checks": {"residual_ok": residual_ok, "ceiling_ok": ceiling_ok},
    }
    print(f"verify: {time.monotonic() - t0:.2f}s wall", file=sys.stderr)
    return report, None, residual_ok and ceiling_ok


class _VerifyParams:
    """Rate/weight bundle for operator construction (no torus involved)."""

    def __init__(self, d, lam, a, b):
        self.d, self.lam, self.a, self.b = d, lam, a, b


HANDLERS = {"gamma": cmd_gamma, "bounds": cmd_bounds, "simulate": cmd_simulate,
            "moments": cmd_moments, "scan": cmd_scan, "verify": cmd_verify}


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cpbounds",
        description="Contact-process critical-value bounds: compute, simulate, verify.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--d", type=int, help="lattice dimension (default 3)")
        sp.add_argument("--L", type=int, help="torus side, even >= 4 (default 16)")
        sp.add_argument("--lambda", dest="lam", type=float, help="infection rate")
        sp.add_argument("--a", type=float, help="linear-system weight a (default optimal)")
        sp.add_argument("--b", type=float, help="linear-system weight b (default optimal)")
        sp.add_argument("--t", type=float, nargs="+", help="time grid")
        sp.add_argument("--replicas", type=int, help="Monte Carlo replicas")
        sp.add_argument("--radius", type=int, help="displacement box radius")
        sp.add_argument("--seed", type=int, help="RNG seed (auto if omitted)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=["json", "csv"], help="output format")

    sp = sub.add_parser("gamma", help="no-return probability gamma_d")
    common(sp)
    sp.add_argument("--method", choices=["quadrature", "solver", "mc", "all"])
    sp.add_argument("--max-steps", dest="max_steps", type=int,
                    help="MC walk length (default 10000)")
    sp.add_argument("--solver-radius", dest="solver_radius", type=int,
                    help="harmonic-solve box radius (default 30)")

    sp = sub.add_parser("bounds", help="table of critical-value bounds")
    common(sp)
    sp.add_argument("--d-range", dest="d_range", type=int, nargs=2,
                    metavar=("DMIN", "DMAX"))
    sp.add_argument("--gamma", type=float, help="override gamma (single d only)")

    sp = sub.add_parser("simulate", help="survival probability by coupled simulation")
    common(sp)
    sp.add_argument("--dump", help="write one trajectory's snapshots to CSV")

    sp = sub.add_parser("moments", help="Monte Carlo first/second moments of the field")
    common(sp)

    sp = sub.add_parser("scan", help="survival curve over a lambda grid")
    common(sp)
    sp.add_argument("--lambda-min", dest="lambda_min", type=float)
    sp.add_argument("--lambda-max", dest="lambda_max", type=float)
    sp.add_argument("--points", type=int, help="grid points (default 7)")

    sp = sub.add_parser("verify", help="null-vector residual and moment ceiling checks")
    common(sp)
    sp.add_argument("--dt", type=float, help="ODE step (default 0.01)")
    sp.add_argument("--residual-tol", dest="residual_tol", type=float)
    sp.add_argument("--ceiling-tol", dest="ceiling_tol", type=float)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, rows, ok = HANDLERS[args.cmd](args)
        fmt = _resolve(args, "format", default="json")
        if fmt == "csv":
            if rows is None:
                raise ValueError(f"{args.cmd} has no CSV projection; use --format json")
            fieldnames, data = rows
            text = emit_csv(report["config"], fieldnames, data)
        else:
            text = canonical_json(report)
    except (ValueError, ArithmeticError, AccuracyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = _resolve(args, "out")
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
