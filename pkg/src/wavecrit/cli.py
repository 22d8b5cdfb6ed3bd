"""Command line entry point: ``wavecrit {classify,simulate,sweep,catalog,oracle}``.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical
instability, 4 inconclusive.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import catalog, gronwall
from .config import ConfigError, exact, load
from .decay import DEFAULT_EPSILON, INF, DataSpec, WaveSystem, classify
from .fitting import FitError
from .simulator import (
    ConfigurationError, Grid, NumericalInstability, detect_blowup, evolve,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_INCONCLUSIVE = 0, 2, 3, 4

DEFAULT_GRID = {"h": 2.0 ** -7, "v_max": 2.0 ** 14, "stretch": 2.0 ** -5}
SWEEP_GRID = {"h": 2.0 ** -5, "v_max": 2.0 ** 14, "stretch": 2.0 ** -5}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers


def output_dir(arg: str | None) -> Path:
    out = Path(arg or os.environ.get("WAVECRIT_OUT") or "wavecrit-out")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out} is not writable")
    return out


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def with_amplitude(system: WaveSystem, amplitude: float | None) -> WaveSystem:
    if amplitude is None:
        return system
    data = {name: replace(system.data.get(name) or DataSpec(), amplitude=amplitude)
            for name in (system.data or {system.fields[0]: None})}
    return replace(system, data=data)


def make_grid(args, file_grid: dict, defaults: dict) -> Grid:
    spec = {**defaults, **file_grid}
    for key, flag in (("h", "h"), ("v_max", "vmax"), ("u_max", "umax"), ("stretch", "stretch")):
        value = getattr(args, flag, None)
        if value is not None:
            spec[key] = value
    spec.setdefault("u_max", spec["v_max"] / 2)
    if not 0 < spec["h"] <= 0.5:
        raise UsageError("--h must lie in (0, 1/2]")
    return Grid(**spec)


def parse_range(text: str) -> list[Fraction]:
    """Inclusive exact range 'a:b:step'."""
    try:
        a, b, step = (exact(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"range must be 'start:stop:step', got {text!r}") from None
    if step <= 0:
        raise UsageError("range step must be positive")
    values = []
    x = a
    while x <= b:
        values.append(x)
        x += step
    if not values:
        raise UsageError(f"empty range {text!r}")
    return values


def set_parameter(system: WaveSystem, path: str, value: Fraction) -> WaveSystem:
    """Return a copy with ``term.<k|*>.<field>`` or ``data.<name>.<field>`` replaced."""
    parts = path.split(".")
    if len(parts) != 3:
        raise UsageError(f"parameter path must have three parts, got {path!r}")
    kind, which, attr = parts
    if kind == "term":
        if attr not in ("power", "coefficient", "t_weight", "u_weight"):
            raise UsageError(f"cannot sweep term attribute {attr!r}")
        idx = range(len(system.terms)) if which == "*" else [int(which)]
        terms = list(system.terms)
        for k in idx:
            if not 0 <= k < len(terms):
                raise UsageError(f"no term with index {k}")
            v = float(value) if attr == "coefficient" else value
            terms[k] = replace(terms[k], **{attr: v})
        return replace(system, terms=tuple(terms))
    if kind == "data":
        if which not in system.fields:
            raise UsageError(f"no field named {which!r}")
        if attr not in ("amplitude", "tail_exponent", "radius"):
            raise UsageError(f"cannot sweep data attribute {attr!r}")
        spec = system.data.get(which) or DataSpec()
        v = value if attr == "tail_exponent" else float(value)
        data = dict(system.data)
        data[which] = replace(spec, **{attr: v})
        return replace(system, data=data)
    raise UsageError(f"unknown parameter kind {kind!r}")


def _fits(ev, field: int) -> dict:
    out = {}
    probes = {
        "rho_0.5": ev.probe("fixed_rho", 0.5, field, samples=80),
        "r_1": ev.probe("fixed_r", 1.0, field, samples=80),
        "scri_u0": ev.probe("scri", 0.0, field, samples=80, t_min=2.0),
    }
    for name, probe in probes.items():
        try:
            out[name] = probe.fit().as_dict()
        except FitError as exc:
            out[name] = {"error": str(exc)}
    return out, probes


# ---------------------------------------------------------------------------
# commands


def run_classify(args) -> int:
    cfg = load(args.config)
    pred = classify(cfg.system, args.epsilon, seed=args.seed)
    payload = pred.as_dict()
    payload["seed"] = args.seed
    out = output_dir(args.out)
    write_json(out / "classify.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def run_simulate(args) -> int:
    cfg = load(args.config)
    system = with_amplitude(cfg.system, args.amplitude)
    grid = make_grid(args, cfg.grid, DEFAULT_GRID)
    out = output_dir(args.out)
    ev = evolve(system, grid, threshold=args.threshold)
    summary = {"grid": {"h": grid.h, "u_max": grid.u_max, "v_max": grid.v_max,
                        "stretch": grid.stretch, "nodes": [ev.nu, ev.nv]},
               "fields": {}, "blowup": None, "certificate": None}
    code = EXIT_OK
    if ev.blowup is not None:
        summary["blowup"] = vars(ev.blowup)
        if args.certify:
            cert = detect_blowup(system, grid, threshold=args.threshold)
            if cert is None:
                code = EXIT_INCONCLUSIVE
            else:
                summary["certificate"] = cert.as_dict()
                write_json(out / "certificate.json", cert.as_dict())
    for i, name in enumerate(system.fields):
        fits, probes = _fits(ev, i)
        probes["moment"] = ev.moment(i, radius=max((d.radius for d in system.data.values()),
                                                   default=1.0))
        for pname, probe in probes.items():
            (out / f"{name}_{pname}.csv").write_text(probe.to_csv())
        summary["fields"][name] = fits
    if args.snapshot:
        ev.write_snapshot(out / "snapshot.wcrt")
    write_json(out / "simulate.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return code


def _sweep_job(job):
    system, mode, grid, epsilon, seed = job
    if mode == "classify":
        pred = classify(system, epsilon, seed=seed)
        s = pred.s or ()
        return [pred.verdict] + ["inf" if v is INF else str(v) for v in s]
    ev = evolve(system, grid)
    row = ["blowup" if ev.blowup else "global"]
    for i in range(len(system.fields)):
        try:
            row.append(f"{ev.probe('fixed_rho', 0.5, i, samples=80).fit().exponent:.6f}")
        except FitError:
            row.append("nan")
    return row


def run_sweep(args) -> int:
    cfg = load(args.config)
    values = parse_range(args.range)
    systems = [set_parameter(cfg.system, args.param, v) for v in values]
    grid = make_grid(args, cfg.grid, SWEEP_GRID) if args.mode == "simulate" else None
    jobs = [(s, args.mode, grid, args.epsilon, args.seed) for s in systems]
    workers = args.jobs or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        rows = [_sweep_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    names = cfg.system.fields
    head = ["param", "verdict"] + ([f"s_{n}" for n in names] if args.mode == "classify"
                                   else [f"rate_{n}" for n in names])
    lines = [",".join(head)]
    for v, row in zip(values, rows):
        row = row + [""] * (len(head) - 1 - len(row))
        lines.append(",".join([f"{float(v):.6g}", *row]))
    text = "\n".join(lines) + "\n"
    out = output_dir(args.out)
    (out / "sweep.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _surd_json(x) -> dict:
    x = catalog.QuadSurd.lift(x)
    return {"exact": repr(x), "value": float(x)}


def run_catalog(args) -> int:
    params = [exact(p) for p in args.params.split(",")] if args.params else []
    name = args.name
    if name in catalog.EXPONENTS:
        payload = {"name": name, "n": args.n, **_surd_json(catalog.EXPONENTS[name](args.n))}
    else:
        table = {**catalog.CURVES, "kitamura": catalog.kitamura_condition,
                 "initial_tail": catalog.initial_tail_condition}
        if name not in table:
            raise UsageError(f"unknown catalog entry {name!r}; choose from "
                             + ", ".join(sorted([*catalog.EXPONENTS, *table])))
        try:
            verdict = table[name](*params, n=args.n)
        except TypeError:
            raise UsageError(f"wrong number of parameters for {name!r}") from None
        payload = {"name": name, "n": args.n, "params": [str(p) for p in params],
                   "verdict": verdict}
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def run_oracle(args) -> int:
    if args.strauss_glassey:
        q1, q2 = _floats(args.strauss_glassey)
        system = gronwall.strauss_glassey_comparison(q1, q2, eps=args.eps).first_order()
    else:
        if not args.p:
            raise UsageError("give --p (and optionally --c, --alpha, --x0) or --strauss-glassey")
        p = _floats(args.p)
        k = len(p)
        c = _floats(args.c) if args.c else (1.0,) * k
        alpha = _floats(args.alpha) if args.alpha else (0.0,) * k
        x0 = _floats(args.x0) if args.x0 else (1.0,) * k
        try:
            system = gronwall.GronwallSystem(c, alpha, p, x0)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    result = gronwall.integrate(system, t_max=args.tmax, rtol=args.rtol)
    out = output_dir(args.out)
    (out / "trajectory.csv").write_text(result.trajectory_csv())
    payload = result.as_dict()
    payload["trajectory"] = str(out / "trajectory.csv")
    write_json(out / "oracle.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_INCONCLUSIVE if result.verdict == "inconclusive" else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavecrit",
        description="Decay classification, characteristic simulation and blow-up checks "
                    "for systems of semilinear wave equations.",
        epilog="Exit codes: 0 ok, 2 config/usage error, 3 numerical instability, "
               "4 inconclusive. Output goes to --out, else $WAVECRIT_OUT, else ./wavecrit-out.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory (default $WAVECRIT_OUT or ./wavecrit-out)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized robustness checks")

    def grid_flags(p):
        p.add_argument("--h", type=float, help="lattice step near the origin")
        p.add_argument("--vmax", type=float, help="largest v on the lattice")
        p.add_argument("--umax", type=float, help="largest u on the lattice (default vmax/2)")
        p.add_argument("--stretch", type=float, help="relative spacing growth far out (0 = uniform)")

    p = sub.add_parser("classify", help="predict stability from the exponent systems")
    p.add_argument("config")
    p.add_argument("--epsilon", type=exact, default=DEFAULT_EPSILON,
                   help="perturbation size for borderline detection")
    common(p)
    p.set_defaults(func=run_classify)

    p = sub.add_parser("simulate", help="evolve a three-dimensional system and fit decay rates")
    p.add_argument("config")
    grid_flags(p)
    p.add_argument("--amplitude", type=float, help="override every data amplitude")
    p.add_argument("--threshold", type=float, default=1e6,
                   help="blow-up threshold as a multiple of the data amplitude")
    p.add_argument("--certify", action="store_true",
                   help="on blow-up, rerun at h/2 and h/4 and emit a certificate")
    p.add_argument("--snapshot", action="store_true", help="dump the lattice as a binary snapshot")
    common(p)
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("sweep", help="classify or simulate across a parameter range")
    p.add_argument("config")
    p.add_argument("--param", required=True,
                   help="term.<k|*>.<power|coefficient|t_weight|u_weight> or data.<field>.<attr>")
    p.add_argument("--range", required=True, help="inclusive start:stop:step (exact)")
    p.add_argument("--mode", choices=("classify", "simulate"), default="classify")
    p.add_argument("--epsilon", type=exact, default=DEFAULT_EPSILON)
    p.add_argument("--jobs", type=int, help="worker processes (default: logical cores)")
    grid_flags(p)
    common(p)
    p.set_defaults(func=run_sweep)

    p = sub.add_parser("catalog", help="closed-form critical exponents and curves")
    p.add_argument("name")
    p.add_argument("--n", type=int, default=3, help="space dimension")
    p.add_argument("--params", help="comma separated parameters, e.g. 1.8,3")
    p.set_defaults(func=run_catalog)

    p = sub.add_parser("oracle", help="integrate a cyclic Gronwall comparison system")
    p.add_argument("--c", help="coefficients, comma separated")
    p.add_argument("--alpha", help="time weights, comma separated")
    p.add_argument("--p", help="powers, comma separated")
    p.add_argument("--x0", help="initial data at t = 1")
    p.add_argument("--strauss-glassey", metavar="Q1,Q2",
                   help="use the moment comparison for the Strauss-Glassey pair")
    p.add_argument("--eps", type=float, default=0.1, help="growth trade for --strauss-glassey")
    p.add_argument("--tmax", type=float, default=1e10)
    p.add_argument("--rtol", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=run_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError, UsageError, ValueError) as exc:
        print(f"wavecrit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstability as exc:
        print(f"wavecrit: numerical instability: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
