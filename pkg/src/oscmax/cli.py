"""Command-line front end: grids, kernels, maximal operators, sweeps, verify.

Every run is described by a RunConfig that round-trips through JSON, so
the same config (and seed) always produces byte-identical output.  CSV
and line outputs carry the config in leading comment lines; JSON output
embeds it as a field.
"""

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__, verify
from .errors import OscmaxError, UsageError
from .geometry import (
    GCube, Grid, GridConfig, cube_from_line, cube_to_line, region_to_lines,
)
from .kernels import (
    kernel_extremum, log_heat_kernel, log_hermite_kernel,
    log_unrescaled_kernel, t_max,
)
from .operators import (
    GridFunction, TimeGrid, far_adapted_maximal, heat_maximal, ingest,
    maximal_classical, maximal_local, maximal_theta,
)
from .weights import (
    ap_constant, ap_theta_constant, centered_cube_family, constant_weight,
    exponential_weight, far_pair_bound, near_region_family, power_weight,
    pure_power_weight, weight_from_grid_function,
)

ARTIFACT_VERSION = 1

MAXIMAL_OPS = ("m", "mtheta", "mloc", "mfar+", "mfar-", "tstar", "tsharp")
SWEEP_CLASSES = ("ap", "aptheta", "aploc", "appair")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3


@dataclass(frozen=True)
class RunConfig:
    """Full description of one CLI invocation."""

    command: str
    subcommand: str = ""
    dimension: int = 1
    max_layer: int = 6
    p: float = 2.0
    theta: float = 0.0
    seed: int = 42
    time_min: float = 1e-4
    time_max: float = 1e8
    points_per_decade: int = 40
    weight: str = "power:4"
    layer: int = -1
    x: tuple = ()
    y: tuple = ()
    t: float = 1.0
    mode: str = "sup"
    cube_a: str = ""
    cube_b: str = ""
    variant: str = "hermite"
    op: str = "m"
    function: str = "const:1"
    at: tuple = ()
    sweep_class: str = "ap"
    pairs: int = 6
    mmax: int = 12
    depth: int = 2
    checks: tuple = ()
    output: str = ""
    fmt: str = "csv"

    def __post_init__(self):
        if not (1.0 < self.p < math.inf):
            raise UsageError("--p requires 1 < p < infinity")
        if self.theta < 0.0:
            raise UsageError("--theta must be nonnegative")
        if self.dimension < 1:
            raise UsageError("--d must be a positive integer")
        if self.max_layer < 0:
            raise UsageError("--lmax must be nonnegative")
        if self.fmt not in ("csv", "json"):
            raise UsageError("--format must be csv or json")

    def to_dict(self):
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        clean = dict(data)
        for k in ("x", "y", "at", "checks"):
            if k in clean and isinstance(clean[k], list):
                clean[k] = tuple(
                    tuple(v) if isinstance(v, list) else v for v in clean[k])
        return cls(**clean)


# -- argument parsing -----------------------------------------------------------------


def _point(text):
    try:
        return tuple(float(u) for u in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse point {text!r}; use comma floats")


def _build_parser():
    top = argparse.ArgumentParser(
        prog="oscmax",
        description="Gaussian-grid maximal operators for the harmonic "
                    "oscillator: geometry, kernels, sweeps, verification.")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", dest="dimension", type=int, help="dimension")
    common.add_argument("--lmax", dest="max_layer", type=int,
                        help="outermost grid layer")
    common.add_argument("--p", dest="p", type=float, help="Lebesgue exponent")
    common.add_argument("--theta", dest="theta", type=float,
                        help="normalization exponent")
    common.add_argument("--seed", dest="seed", type=int, help="RNG seed")
    common.add_argument("--config", dest="config", type=str,
                        help="JSON config file; flags override its values")
    common.add_argument("--output", dest="output", type=str,
                        help="write to this path instead of stdout")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        help="output format")
    common.add_argument("--time-min", dest="time_min", type=float)
    common.add_argument("--time-max", dest="time_max", type=float)
    common.add_argument("--ppd", dest="points_per_decade", type=int,
                        help="time grid points per decade")

    # flag defaults all stay None here; real defaults live in RunConfig so
    # config-file values are never shadowed by an unset flag
    grid = sub.add_parser("grid", help="grid geometry").add_subparsers(
        dest="subcommand", required=True)
    gd = grid.add_parser("dump", parents=[common], help="list grid cells")
    gd.add_argument("--layer", type=int, help="restrict to one layer")
    gn = grid.add_parser("near", parents=[common],
                         help="near region of the cell at a point")
    gn.add_argument("--point", type=_point)
    gq = grid.add_parser("qcube", parents=[common],
                         help="growth box of the cell at a point")
    gq.add_argument("--point", type=_point)
    gq.add_argument("--t", type=float)

    kernel = sub.add_parser("kernel", help="kernel evaluation").add_subparsers(
        dest="subcommand", required=True)
    ke = kernel.add_parser("eval", parents=[common], help="log-kernel value")
    ke.add_argument("--x", type=_point)
    ke.add_argument("--y", type=_point)
    ke.add_argument("--t", type=float)
    ke.add_argument("--variant", choices=("hermite", "heat", "unrescaled"))
    kt = kernel.add_parser("tmax", parents=[common],
                           help="kernel peak time for a point pair")
    kt.add_argument("--x", type=_point)
    kt.add_argument("--y", type=_point)
    kx = kernel.add_parser("extremum", parents=[common],
                           help="kernel extremum over a cube pair")
    kx.add_argument("--cube-a", dest="cube_a",
                    help="cube line: layer level i_1 [i_2 ...]")
    kx.add_argument("--cube-b", dest="cube_b")
    kx.add_argument("--t", type=float)
    kx.add_argument("--mode", choices=("sup", "inf"))

    mx = sub.add_parser("maximal", help="maximal operators").add_subparsers(
        dest="subcommand", required=True)
    me = mx.add_parser("eval", parents=[common],
                       help="evaluate a maximal operator")
    me.add_argument("--op", choices=MAXIMAL_OPS)
    me.add_argument("--function",
                    help="const:c | cell:layer:i[,j] | file:path")
    me.add_argument("--at", type=_point, nargs="+",
                    help="evaluation points, comma floats each")

    ws = sub.add_parser("weights", help="weight sweeps").add_subparsers(
        dest="subcommand", required=True)
    wsweep = ws.add_parser("sweep", parents=[common],
                           help="ratio sweep over a cube family")
    wsweep.add_argument("--class", dest="sweep_class", choices=SWEEP_CLASSES)
    wsweep.add_argument("--weight",
                        help="const:c | power:g | purepower:g | exp:g | file:path")
    wsweep.add_argument("--pairs", type=int,
                        help="far pairs for the appair table")
    wsweep.add_argument("--mmax", type=int,
                        help="largest centered-cube exponent")
    wsweep.add_argument("--depth", type=int,
                        help="subcube depth for the aploc family")

    vf = sub.add_parser("verify", parents=[common],
                        help="run verification checks")
    vf.add_argument("--check", dest="checks", action="append",
                    choices=verify.CHECK_NAMES, default=None)
    vf.add_argument("--all", dest="run_all", action="store_true")

    return top


_DEFAULTS = {f.name: f.default for f in fields(RunConfig)}


def parse_config(argv):
    """argv -> RunConfig, merging an optional --config JSON file.

    Explicit flags win over file values, which win over defaults; the
    file may only contain known RunConfig keys.
    """
    parser = _build_parser()
    ns = parser.parse_args(argv)
    ns_dict = vars(ns)

    file_values = {}
    cfg_path = ns_dict.pop("config", None)
    if cfg_path:
        with open(cfg_path, "r", encoding="utf-8") as fh:
            try:
                file_values = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"config file is not valid JSON: {exc}")
        if not isinstance(file_values, dict):
            raise UsageError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(file_values) - known)
        if unknown:
            raise UsageError(
                f"unknown config keys: {', '.join(unknown)}")

    run_all = ns_dict.pop("run_all", False)
    point = ns_dict.pop("point", None)
    if point is not None:
        ns_dict["at"] = [point]
    values = {}
    for name in _DEFAULTS:
        flag = ns_dict.get(name)
        if flag is not None:
            values[name] = flag
        elif name in file_values:
            v = file_values[name]
            values[name] = tuple(
                tuple(u) if isinstance(u, list) else u for u in v) \
                if isinstance(v, list) else v
        else:
            values[name] = _DEFAULTS[name]
    values["command"] = ns_dict["command"]
    values["subcommand"] = ns_dict.get("subcommand") or ""
    if values["command"] == "verify":
        if run_all or not values["checks"]:
            values["checks"] = tuple(verify.CHECK_NAMES)
        else:
            values["checks"] = tuple(values["checks"])
    if values.get("at"):
        values["at"] = tuple(tuple(pt) if not isinstance(pt, tuple) else pt
                             for pt in values["at"])
    return RunConfig(**values)


# -- output helpers --------------------------------------------------------------------


def _emit(config, lines=None, payload=None):
    """Render lines (csv/text) or a JSON payload with provenance."""
    if config.fmt == "json" or payload is not None and lines is None:
        body = {
            "artifact_version": ARTIFACT_VERSION,
            "config": config.to_dict(),
            "result": payload if payload is not None else lines,
        }
        text = json.dumps(body, sort_keys=True, indent=2) + "\n"
    else:
        header = [
            f"# artifact_version: {ARTIFACT_VERSION}",
            f"# config: {json.dumps(config.to_dict(), sort_keys=True)}",
        ]
        text = "\n".join(header + list(lines)) + "\n"
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- command implementations ---------------------------------------------------------------


def _grid_for(config):
    return Grid(GridConfig(dimension=config.dimension,
                           max_layer=config.max_layer))


def cmd_grid(config):
    grid = _grid_for(config)
    if config.subcommand == "dump":
        if config.layer >= 0:
            cubes = list(grid.layer_cubes(config.layer))
        else:
            cubes = grid.cubes()
        _emit(config, lines=[cube_to_line(c) for c in cubes])
        print(f"grid dump: {len(cubes)} cells", file=sys.stderr)
        return EXIT_OK
    if config.subcommand == "near":
        cell = grid.cube_at(_require_point(config))
        region = grid.near_region(cell)
        _emit(config, lines=region_to_lines(region))
        print(f"near region: {len(region)} cells", file=sys.stderr)
        return EXIT_OK
    if config.subcommand == "qcube":
        cell = grid.cube_at(_require_point(config))
        m = grid.growth_exponent(cell, config.t)
        payload = {
            "cell": cube_to_line(cell),
            "t": config.t,
            "exponent": m,
            "box_lo": [-(2.0 ** m)] * config.dimension,
            "box_hi": [2.0 ** m] * config.dimension,
            "truncated": m > config.max_layer,
        }
        _emit(config, payload=payload)
        return EXIT_OK
    raise UsageError(f"unknown grid subcommand {config.subcommand!r}")


def _require_point(config):
    if not config.at:
        raise UsageError("--point is required")
    return config.at[0]


def _require(config, *names):
    for n in names:
        if not getattr(config, n):
            raise UsageError(f"--{n.replace('_', '-')} is required")


def cmd_kernel(config):
    if config.subcommand == "eval":
        _require(config, "x", "y")
        fn = {"hermite": log_hermite_kernel,
              "heat": log_heat_kernel,
              "unrescaled": log_unrescaled_kernel}[config.variant]
        lv = fn(config.x, config.y, config.t)
        payload = {"variant": config.variant, "log_value": lv,
                   "value": math.exp(lv) if lv > -700.0 else 0.0}
        _emit(config, payload=payload)
        return EXIT_OK
    if config.subcommand == "tmax":
        _require(config, "x", "y")
        ctx = None
        try:
            grid = _grid_for(config)
            ctx = (grid.cube_at(config.x), grid.cube_at(config.y))
        except OscmaxError:
            ctx = None
        res = t_max(config.x, config.y, cube_context=ctx)
        payload = {
            "t_max": res.t_max,
            "log_k_at_max": res.log_k_at_max,
            "bracket": list(res.bracket),
            "iterations": res.iterations,
            "taylor_factor": res.taylor_factor,
        }
        _emit(config, payload=payload)
        return EXIT_OK
    if config.subcommand == "extremum":
        _require(config, "cube_a", "cube_b")
        try:
            ca = cube_from_line(config.cube_a)
            cb = cube_from_line(config.cube_b)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        lv = kernel_extremum(ca, cb, config.t, config.mode)
        payload = {"mode": config.mode, "t": config.t, "log_value": lv,
                   "value": math.exp(lv) if lv > -700.0 else 0.0}
        _emit(config, payload=payload)
        return EXIT_OK
    raise UsageError(f"unknown kernel subcommand {config.subcommand!r}")


def _parse_function(spec, grid):
    """const:c | cell:layer:i[,j] | file:path -> GridFunction."""
    kind, _, rest = spec.partition(":")
    if kind == "const":
        return ingest(float(rest or "1"), grid)
    if kind == "cell":
        layer_s, _, coords_s = rest.partition(":")
        try:
            layer = int(layer_s)
            coords = tuple(int(u) for u in coords_s.split(","))
        except ValueError:
            raise UsageError(
                f"--function cell spec {spec!r}; use cell:layer:i[,j]")
        return ingest(GCube(layer=layer, level=0, coords=coords), grid)
    if kind == "file":
        with open(rest, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines()
                     if ln.strip() and not ln.startswith("#")]
        return GridFunction.from_lines(grid, lines)
    raise UsageError(f"unknown --function kind {kind!r}")


def cmd_maximal(config):
    _require(config, "at")
    grid = _grid_for(config)
    tgrid = TimeGrid(t_min=config.time_min, t_max=config.time_max,
                     points_per_decade=config.points_per_decade)
    f = _parse_function(config.function, grid)

    def evaluate(x):
        op = config.op
        if op == "m":
            return maximal_classical(f, x)
        if op == "mtheta":
            return maximal_theta(f, x, config.theta)
        if op == "mloc":
            return maximal_local("m", f, x, tgrid)
        if op == "mfar+":
            return far_adapted_maximal(f, x, "plus", tgrid)
        if op == "mfar-":
            return far_adapted_maximal(f, x, "minus", tgrid)
        if op == "tstar":
            return heat_maximal(f, x, "hermite", tgrid)
        if op == "tsharp":
            return heat_maximal(f, x, "sharp", tgrid)
        raise UsageError(f"unknown operator {op!r}")

    param = {"mtheta": repr(config.theta)}.get(config.op, "")
    rows = []
    results = []
    for x in config.at:
        if len(x) != config.dimension:
            raise UsageError(
                f"point {x} has dimension {len(x)}, expected {config.dimension}")
        v = evaluate(x)
        results.append({"x": list(x), "operator": config.op,
                        "parameter": param, "value": v})
        coords = ", ".join(repr(u) for u in x)
        rows.append(f"{coords}, {config.op}, {param}, {v!r}")
    if config.fmt == "json":
        _emit(config, payload=results)
    else:
        head = ", ".join(f"x_{i+1}" for i in range(config.dimension))
        _emit(config, lines=[f"{head}, operator, parameter, value"] + rows)
    print(f"maximal eval: {len(rows)} points", file=sys.stderr)
    return EXIT_OK


def parse_weight(spec, p, grid=None):
    """const:c | power:g | purepower:g | exp:g | file:path -> WeightSpec."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "const":
            return constant_weight(float(rest or "1"), p)
        if kind == "power":
            return power_weight(float(rest or "0"), p)
        if kind == "purepower":
            return pure_power_weight(float(rest or "0"), p)
        if kind == "exp":
            return exponential_weight(float(rest or "0"), p)
    except ValueError:
        raise UsageError(f"bad weight parameter in {spec!r}")
    if kind == "file":
        if grid is None:
            raise UsageError("file weights need a grid")
        with open(rest, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines()
                     if ln.strip() and not ln.startswith("#")]
        return weight_from_grid_function(
            GridFunction.from_lines(grid, lines), p)
    raise UsageError(f"unknown --weight kind {kind!r}")


def cmd_weights(config):
    grid = _grid_for(config)
    w = parse_weight(config.weight, config.p, grid)
    cls = config.sweep_class

    if cls == "appair":
        far_grid = Grid(GridConfig(dimension=config.dimension, max_layer=21))
        rng = np.random.default_rng([config.seed, 99])
        pairs = verify.sample_far_pairs(rng, far_grid, config.pairs)
        rows = ["family, pair_id, r_layer, rp_layer, log_sup_bound, "
                "log_inf_bound, n_samples"]
        payload = []
        for i, (cr, crp, _, _) in enumerate(pairs):
            fp = far_pair_bound(w, cr, crp)
            rows.append(
                f"appair, {i}, {cr.layer}, {crp.layer}, "
                f"{fp.log_sup_bound!r}, {fp.log_inf_bound!r}, {fp.n_pairs}")
            payload.append({
                "pair_id": i, "r_layer": cr.layer, "rp_layer": crp.layer,
                "log_sup_bound": fp.log_sup_bound,
                "log_inf_bound": fp.log_inf_bound, "n_samples": fp.n_pairs})
        if config.fmt == "json":
            _emit(config, payload=payload)
        else:
            _emit(config, lines=rows)
        print(f"weights sweep appair: {len(pairs)} pairs", file=sys.stderr)
        return EXIT_OK

    if cls == "ap":
        family = centered_cube_family(range(1, config.mmax + 1),
                                      config.dimension)
        report = ap_constant(w, family, "centered")
    elif cls == "aptheta":
        family = centered_cube_family(range(1, config.mmax + 1),
                                      config.dimension)
        report = ap_theta_constant(w, config.theta, family, "centered")
    elif cls == "aploc":
        family = near_region_family(grid, depth=config.depth)
        report = ap_constant(w, family, "near-subcubes")
    else:
        raise UsageError(f"unknown sweep class {cls!r}")

    rows = ["family, cube_id, sidelength, center_norm, ratio, psi_theta, "
            "normalized_ratio"]
    for e in report.entries:
        rows.append(f"{report.family}, {e.cube_id}, {e.sidelength!r}, "
                    f"{e.center_norm!r}, {e.ratio!r}, {e.psi!r}, "
                    f"{e.normalized!r}")
    if config.fmt == "json":
        payload = {
            "family": report.family, "p": report.p, "theta": report.theta,
            "supremum": report.supremum, "argmax_id": report.argmax_id,
            "entries": [
                {"cube_id": e.cube_id, "sidelength": e.sidelength,
                 "center_norm": e.center_norm, "ratio": e.ratio,
                 "psi_theta": e.psi, "normalized_ratio": e.normalized}
                for e in report.entries],
        }
        _emit(config, payload=payload)
    else:
        _emit(config, lines=rows)
    print(f"weights sweep {cls}: {len(report.entries)} cubes, "
          f"supremum {report.supremum:.6g} at {report.argmax_id}",
          file=sys.stderr)
    return EXIT_OK


def cmd_verify(config):
    vcfg = verify.VerifyConfig(seed=config.seed, dimension=config.dimension,
                               p=config.p)
    reports = verify.run_checks(list(config.checks), vcfg)
    text = verify.report_json(reports, vcfg)
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif config.fmt == "json":
        sys.stdout.write(text)
    sys.stderr.write(verify.report_text(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


_COMMANDS = {
    "grid": cmd_grid,
    "kernel": cmd_kernel,
    "maximal": cmd_maximal,
    "weights": cmd_weights,
    "verify": cmd_verify,
}


def main(argv=None):
    try:
        config = parse_config(argv if argv is not None else sys.argv[1:])
        return _COMMANDS[config.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OscmaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
