"""Command-line front end.

Every subcommand writes one output file plus a sidecar ``<output>.config.json``
holding the fully resolved configuration.  Settings come from built-in
defaults, then an optional flat ``key = value`` config file, then flags.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import acceptance, actions, bifurcation, dynamics, elliptic, errors, monodromy
from .dynamics import format_float, write_csv
from .geometry import EllipsoidSpec, PhasePoint, Symmetry, random_leaf_point

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

VALIDATION_ERRORS = (
    errors.InvalidSpec, errors.DegenerateAxes, errors.WrongSymmetry, errors.DegeneratePoint,
    errors.OffLeaf, errors.OutsideImage, errors.LoopOutsideImage, errors.DomainError,
    errors.ZeroMomentum, errors.AxisPoint, errors.CoordinateSingularity, errors.LeafIncompatible,
)

DEFAULTS = {
    "h": 0.5,
    "seed": 0,
    "format": "csv",
    "t_end": 100.0,
    "dt": 1e-3,
    "stride": 100,
    "grid": "-1:1:21,-1:2:31",
    "loop": "0.5,0.5,64",
    "center": "0,0",
    "samples": 512,
    "case": "both",
    "n": 21,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    alphas: list[float] | None
    h: float
    seed: int
    output_path: str
    format: str
    tolerances: dict[str, float] = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def spec(self) -> EllipsoidSpec:
        if self.alphas is None:
            raise ConfigError("--alphas is required")
        return EllipsoidSpec(tuple(self.alphas))

    def write_sidecar(self) -> str:
        path = self.output_path + ".config.json"
        with open(path, "w", newline="\n") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what}: cannot parse '{text}' as comma-separated numbers") from None


def read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def resolve(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "func"):
            merged[key] = value
    tolerances = {}
    tol_items = merged.pop("tol", None) or []
    if isinstance(tol_items, str):
        tol_items = [t for t in tol_items.split(",") if t.strip()]
    for item in tol_items:
        if "=" not in item:
            raise ConfigError(f"--tol expects name=value, got '{item}'")
        k, v = item.split("=", 1)
        tolerances[k] = float(v)
    alphas = merged.pop("alphas", None)
    if alphas is not None and not isinstance(alphas, list):
        alphas = parse_floats(alphas, "alphas")
    command = merged.pop("command")
    output = merged.pop("output", None) or f"{command}.{merged.get('format', 'csv')}"
    fmt = merged.pop("format")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got '{fmt}'")
    cfg = RunConfig(command, alphas, float(merged.pop("h")), int(merged.pop("seed")), output, fmt,
                    tolerances, {k: merged[k] for k in sorted(merged)})
    if alphas is not None:
        cfg.spec()  # validate before any computation
    return cfg


def _truthy(value) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


# --- subcommands ------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig) -> int:
    spec = cfg.spec()
    opt = cfg.options
    if _truthy(opt.get("random")):
        p0 = random_leaf_point(spec, np.random.default_rng(cfg.seed), h=cfg.h)
    elif opt.get("p0"):
        vals = np.array(parse_floats(opt["p0"], "p0"))
        if vals.size != 2 * spec.dim:
            raise ConfigError(f"p0 needs {2 * spec.dim} numbers")
        p0 = dynamics.project_to_leaf(spec, vals)
    else:
        raise ConfigError("give --random or --p0")
    t_end, dt, stride = float(opt["t_end"]), float(opt["dt"]), int(opt["stride"])
    traj = dynamics.integrate(spec, p0, t_end, dt, stride=stride)
    names, values = traj.quantities()
    drift = (values - values[0]) / float(np.max(np.abs(values[0])))
    header = (["t"] + [f"x{i}" for i in range(spec.dim)] + [f"y{i}" for i in range(spec.dim)]
              + names + [f"drift_{n}" for n in names])
    write_csv(cfg.output_path, header, np.column_stack([traj.t, traj.z, values, drift]))
    rel = dynamics.relative_drift(values)
    print(f"max relative drift: {float(np.max(rel)):.3e} ({', '.join(f'{n}={d:.2e}' for n, d in zip(names, rel))})")
    if spec.symmetry is Symmetry.SPHERE_LIKE:
        period = 2 * math.pi * math.sqrt(spec.alphas[0]) / math.sqrt(2 * cfg.h)
        end = dynamics.integrate(spec, p0, period, dt).z[-1]
        print(f"great-circle closure error after one period {period:.6f}: "
              f"{float(np.max(np.abs(end - p0.as_array()))):.3e}")
    return EXIT_OK


def cmd_bifurcation(cfg: RunConfig) -> int:
    spec = cfg.spec()
    samples = int(cfg.options["samples"])
    if spec.symmetry is Symmetry.GENERIC and spec.dim == 4:
        diag = bifurcation.generic_diagram(spec, cfg.h, samples)
    elif spec.symmetry is Symmetry.EQUAL_MIDDLE:
        diag = bifurcation.symmetric_diagram(spec, cfg.h, samples)
    else:
        raise errors.WrongSymmetry(f"no bifurcation diagram for symmetry {spec.symmetry.value}")
    if cfg.format == "json":
        diag.dump_json(cfg.output_path)
    else:
        diag.to_csv(cfg.output_path)
    kinds = {}
    for c in diag.curves:
        kinds[c.kind] = kinds.get(c.kind, 0) + 1
    ranks = {}
    for p in diag.points:
        ranks[p.corank] = ranks.get(p.corank, 0) + 1
    print("curves: " + ", ".join(f"{n} {k}" for k, n in kinds.items())
          + "; points: " + ", ".join(f"{n} corank-{r}" for r, n in sorted(ranks.items(), reverse=True)))
    for p in diag.points:
        u, v = p.location.coords
        print(f"  {p.label:12s} ({u:.6g}, {v:.6g}) {p.type}")
    return EXIT_OK


def _grid_axis(text: str, what: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{what}: expected min:max:n, got '{text}'")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ConfigError(f"{what}: n must be positive")
    return np.linspace(lo, hi, n)


def cmd_actions(cfg: RunConfig) -> int:
    spec = cfg.spec()
    spec.require(Symmetry.EQUAL_MIDDLE, what="actions")
    jtxt, gtxt = cfg.options["grid"].split(",")
    js, gs = _grid_axis(jtxt, "j grid"), _grid_axis(gtxt, "g grid")
    header = ["h", "j", "g", "I1", "I2", "I3", "dI2_dj", "dI3_dj", "side", "status"]
    nan = float("nan")
    lines = []
    for j in js:
        for g in gs:
            j, g = float(j), float(g)
            side = "j_pos" if j >= 0 else "j_neg"
            try:
                fr = actions.action_frame(spec, cfg.h, g, j)
                vals = list(fr.I) + [fr.dI_djgh[1, 0], fr.dI_djgh[2, 0]]
                status = "ok"
            except errors.OutsideImage:
                vals, status = [nan] * 5, "outside_image"
            except errors.PoleCollision:
                vals, status = [nan] * 5, "pole_collision"
            lines.append([format_float(v) for v in [cfg.h, j, g] + vals] + [side, status])
    with open(cfg.output_path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in lines:
            fh.write(",".join(row) + "\n")
    n_ok = sum(r[-1] == "ok" for r in lines)
    print(f"{n_ok} of {len(lines)} grid cells inside the image")
    return EXIT_OK


def cmd_monodromy(cfg: RunConfig) -> int:
    spec = cfg.spec()
    loop = parse_floats(cfg.options["loop"], "loop")
    if len(loop) != 3:
        raise ConfigError("loop expects rj,rg,n")
    center = parse_floats(cfg.options["center"], "center")
    res = monodromy.monodromy(spec, cfg.h, (loop[0], loop[1]), int(loop[2]), center=tuple(center))
    res.dump_json(cfg.output_path)
    print(f"M = {res.M.tolist()}")
    print(f"N = {res.N.tolist()}  T = {res.T.tolist()}")
    return EXIT_OK


def cmd_revolution(cfg: RunConfig) -> int:
    opt = cfg.options
    if opt.get("alpha0") is None or opt.get("alpha1") is None:
        raise ConfigError("revolution needs --alpha0 and --alpha1")
    a0, a1 = float(opt["alpha0"]), float(opt["alpha1"])
    a3 = float(opt["alpha3"]) if opt.get("alpha3") is not None else a1 * a1 / a0
    cases = {"axis0": a0, "axis3": a3}
    chosen = list(cases) if opt["case"] == "both" else [opt["case"]]
    for c in chosen:
        if c not in cases:
            raise ConfigError(f"case must be axis0, axis3 or both, got '{c}'")
    n = int(opt["n"])
    rows = []
    for c in chosen:
        for jh in np.linspace(-1.0, 1.0, n):
            params = elliptic.RevolutionParams.from_jhat(cfg.h, float(jh), cases[c], a1)
            closed = elliptic.revolution_action(params)
            quad = elliptic.revolution_action_quadrature(params)
            rows.append((c, params.rho, float(jh), closed, quad, abs(closed - quad)))
    with open(cfg.output_path, "w", newline="\n") as fh:
        fh.write("case_id,rho,jhat,I_l,I_l_quadrature,abs_diff\n")
        for c, *vals in rows:
            fh.write(c + "," + ",".join(format_float(v) for v in vals) + "\n")
    print(f"max |closed form - quadrature| = {max(r[-1] for r in rows):.2e}")
    return EXIT_OK


def cmd_selftest(cfg: RunConfig) -> int:
    results = acceptance.run_all()
    with open(cfg.output_path, "w", newline="\n") as fh:
        for r in results:
            print(r.line())
            fh.write(r.line() + "\n")
    return EXIT_OK if all(r.passed for r in results) else 1


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--alphas", help="comma-separated squared semi-axes, nondecreasing")
    common.add_argument("--h", type=float, help="energy (default 0.5)")
    common.add_argument("--seed", type=int, help="RNG seed (default 0)")
    common.add_argument("-o", "--output", help="output path")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="named tolerance, repeatable")

    parser = argparse.ArgumentParser(prog="ellipsoid-geodesics", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="integrate a geodesic")
    p.add_argument("--random", action="store_true", default=None, help="random start on the leaf")
    p.add_argument("--p0", help="8 comma-separated numbers x0..x3,y0..y3")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--stride", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bifurcation", parents=[common], help="bifurcation diagram at fixed energy")
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_bifurcation)

    p = sub.add_parser("actions", parents=[common], help="action values on a (j, g) grid")
    p.add_argument("--grid", help="jmin:jmax:n,gmin:gmax:m")
    p.set_defaults(func=cmd_actions)

    p = sub.add_parser("monodromy", parents=[common], help="monodromy around the focus-focus value")
    p.add_argument("--loop", help="rj,rg,n")
    p.add_argument("--center", help="jc,gc")
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("revolution", parents=[common], help="actions of an ellipsoid of revolution")
    p.add_argument("--alpha0", type=float)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha3", type=float, help="second symmetry axis (default alpha1^2/alpha0)")
    p.add_argument("--case", help="axis0, axis3 or both")
    p.add_argument("--n", type=int, help="number of jhat grid points")
    p.set_defaults(func=cmd_revolution)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        code = args.func(cfg)
        cfg.write_sidecar()
        return code
    except (ConfigError, OSError, *VALIDATION_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (errors.EllipsoidError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
