"""Command-line driver.

Exit codes: 0 success, 2 verified negative (gap, infeasible, construction
failure, with a report written), 1 any other error, 64 usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import mpmath
import numpy as np

from blenderlab import __version__
from blenderlab.errors import BlenderLabError, ConfigError, VerifiedNegative
from blenderlab.io import encode_number, read_json, write_csv, write_json
from blenderlab.numerics.interval import Box2
from blenderlab.parallel import resolve_workers

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2
EXIT_USAGE = 64

SUBCOMMANDS = ("blender-check", "parablender-check", "exponents", "renorm", "cantor", "horseshoe", "chain-boost",
               "sink-census", "tangency", "misiurewicz", "manifold", "ifs-cloud")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def jsonable(obj: Any) -> Any:
    """Recursively convert results to JSON-native values (mpf kept exact)."""
    if hasattr(obj, "to_dict") and not isinstance(obj, type):
        return jsonable(obj.to_dict())
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (str, bool)) or obj is None:
        return obj
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (int, float, mpmath.mpf, np.floating)):
        return encode_number(float(obj) if isinstance(obj, np.floating) else obj)
    if hasattr(obj, "to_list"):
        return jsonable(obj.to_list())
    return repr(obj)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    out: Path
    config: Path | None = None
    overrides: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    plot: bool = True

    def get(self, key, default=None):
        v = self.overrides.get(key)
        return default if v is None else v


def _positive(v):
    return v > 0


def _gt_one(v):
    return v > 1


def _nonneg(v):
    return v >= 0


def _frac(v):
    return 0 < v < 1


RULES: dict[str, tuple[Callable[[Any], bool], str]] = {
    "delta_contraction": (_positive, "must be positive"),
    "delta_perturb": (_nonneg, "must be >= 0"),
    "eta": (_nonneg, "must be >= 0"),
    "order": (_nonneg, "must be >= 0"),
    "delta": (_gt_one, "must be > 1"),
    "eps": (_positive, "must be positive"),
    "grid": (lambda v: v >= 2, "must be >= 2"),
    "cap": (_positive, "must be positive"),
    "n": (_positive, "must be >= 1"),
    "N": (_nonneg, "must be >= 0"),
    "A": (_positive, "must be positive"),
    "shrink_factor": (lambda v: 0 < v, "must be positive"),
    "tol": (_positive, "must be positive"),
    "max_period": (_positive, "must be >= 1"),
    "a_steps": (_nonneg, "must be >= 0"),
    "steps": (_positive, "must be >= 1"),
    "seeds": (_positive, "must be >= 1"),
    "iterations": (_positive, "must be >= 1"),
    "burn_in": (_nonneg, "must be >= 0"),
    "max_iter": (_nonneg, "must be >= 0"),
    "max_cells": (_positive, "must be >= 1"),
    "cone_eta": (_frac, "must lie in (0, 1)"),
}


def validate_overrides(overrides: Mapping[str, Any]) -> None:
    for key, value in overrides.items():
        if value is None or key not in RULES:
            continue
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"--{key.replace('_', '-')} must be finite")
        pred, msg = RULES[key]
        if not pred(value):
            raise ConfigError(f"--{key.replace('_', '-')} {msg}, got {value}")
    if overrides.get("iterations") is not None and overrides.get("burn_in") is not None:
        if overrides["iterations"] <= overrides["burn_in"]:
            raise ConfigError("--iterations must exceed --burn-in")
    if overrides.get("a_min") is not None and overrides.get("a_max") is not None:
        if overrides["a_max"] < overrides["a_min"]:
            raise ConfigError("--a-max must be >= --a-min")


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


class Outputs:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        return self.cfg.out / name

    def json(self, name, obj):
        write_json(self.path(name), jsonable(obj))
        self.files.append(name)

    def csv(self, name, header, rows):
        write_csv(self.path(name), header, rows)
        self.files.append(name)

    def plot(self, name, fn, *args, **kw):
        if self.cfg.plot:
            fn(*args, path=self.path(name), **kw)
            self.files.append(name)


def emit_plot_data(result: Any, kind: str, out: Path | str) -> list[Path]:
    """CSV files for external plotting; byte-deterministic for a given result."""
    out = Path(out)
    if kind == "covering":
        width = max((len(r) for r in result.piece_rows()), default=3)
        dim = (width - 1) // 2
        if dim == 1:
            header = ["branch", "lo", "hi"]
        else:
            header = ["branch"] + [f"lo{i}" for i in range(dim)] + [f"hi{i}" for i in range(dim)]
        return [write_csv(out / "boxes.csv", header, result.piece_rows())]
    if kind == "ifs-cloud":
        pts = np.asarray(result)
        header = ["x", "y"] if pts.shape[1] == 2 else ["y"]
        return [write_csv(out / "points.csv", header, [[float(v) for v in row] for row in pts])]
    if kind == "horseshoe":
        rows = [["B", i, x, y] for i, (x, y) in enumerate(result.box.corners())]
        rows += [["G2(B)", i, x, y] for i, (x, y) in enumerate(result.image.corners())]
        return [write_csv(out / "corners.csv", ["set", "corner", "x", "y"], rows)]
    if kind == "cantor":
        rows = [[name, b.x.lo, b.y.lo, b.x.hi, b.y.hi] for name, b in
                (("W", result.domain), ("S1(W)", result.image1), ("S2(W)", result.image2))]
        return [write_csv(out / "boxes.csv", ["set", "x_lo", "y_lo", "x_hi", "y_hi"], rows)]
    if kind == "manifold":
        pts = result.sample(201)
        return [write_csv(out / "manifold.csv", ["x", "y"], [[float(a), float(b)] for a, b in pts])]
    raise ConfigError(f"unknown plot-data kind {kind!r}", kinds=["covering", "ifs-cloud", "horseshoe", "cantor",
                                                                  "manifold"])


# ---------------------------------------------------------------------------
# Shared builders
# ---------------------------------------------------------------------------


def _load_model(cfg: RunConfig, **defaults):
    from blenderlab.hetero_model import affine_model, build_model

    if cfg.config is not None:
        return build_model(read_json(cfg.config))
    return affine_model(**defaults)


def _family(cfg: RunConfig):
    from blenderlab.dynamics.expr import Y, henon, linear_map, quadratic_product
    from blenderlab.newhouse import build_bicycle_family

    name = cfg.get("family", "henon")
    if name == "henon":
        return henon(float(cfg.get("a", 0.2)), float(cfg.get("b", 0.3)))
    if name == "linear":
        return linear_map(0.5, 0.5).with_params(a=0.0)
    if name == "quadratic":
        return quadratic_product(float(cfg.get("a", -0.5)), 0.5 * Y)
    if name == "bicycle":
        return build_bicycle_family(float(cfg.get("eps", 0.1))).fmap
    raise ConfigError(f"unknown family {name!r}", families=["henon", "linear", "quadratic", "bicycle"])


def _a_grid(cfg: RunConfig, default: float) -> list[float]:
    if cfg.get("a_values"):
        return [float(v) for v in cfg.get("a_values")]
    lo = cfg.get("a_min")
    if lo is None:
        return [float(cfg.get("a", default))]
    hi = cfg.get("a_max", lo)
    steps = int(cfg.get("a_steps", 0))
    if steps == 0:
        return [float(lo)]
    return [float(v) for v in np.linspace(lo, hi, steps + 1)]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_blender_check(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.blender import verify_blender_1d
    from blenderlab.plotting import plot_covering

    cert = verify_blender_1d(cfg.get("delta_contraction", 1.5), cfg.get("delta_perturb", 0.0), cfg.get("eta", 0.0))
    out.json("certificate.json", cert)
    emit_plot_data(cert, "covering", cfg.out)
    out.files.append("boxes.csv")
    out.plot("covering.png", plot_covering, cert)
    return EXIT_OK if cert.covered else EXIT_NEGATIVE


def cmd_parablender_check(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.blender import JetBox, verify_parablender_jets
    from blenderlab.plotting import plot_covering

    Delta = cfg.get("delta_contraction", 1.5)
    r = int(cfg.get("order", 2))
    box = JetBox.sufficient(Delta, cfg.get("A", 1 - 1 / Delta), r)
    if cfg.get("shrink_index") is not None:
        box = box.scaled(int(cfg.get("shrink_index")), cfg.get("shrink_factor", 0.5))
    cert = verify_parablender_jets(Delta, r, cfg.get("delta_perturb", 0.0), box,
                                   max_cells=int(cfg.get("max_cells", 200000)))
    out.json("certificate.json", cert)
    emit_plot_data(cert, "covering", cfg.out)
    out.files.append("boxes.csv")
    out.plot("covering.png", plot_covering, cert)
    return EXIT_OK if cert.covered else EXIT_NEGATIVE


def _plan(cfg: RunConfig, model):
    from blenderlab.renorm import DEFAULT_CAP, select_exponents

    return select_exponents(model, cfg.get("delta", 1.013637), cfg.get("eps", 0.15), cap=cfg.get("cap", DEFAULT_CAP),
                            order=int(cfg.get("order", 3)))


def cmd_exponents(cfg: RunConfig, out: Outputs) -> int:
    model = _load_model(cfg)
    plan = _plan(cfg, model)
    out.json("plan.json", {"plan": plan, "invariants": plan.invariants(), "delta_minus": plan.delta_minus,
                           "delta_plus": plan.delta_plus, "printed_hypo2_holds": plan.printed_hypo2_holds})
    return EXIT_OK


def cmd_renorm(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.plotting import plot_scalar
    from blenderlab.renorm import cr_distance, renormalize, targets_for, tune_unfolding

    model = _load_model(cfg)
    plan = _plan(cfg, model)
    plan, tuned = tune_unfolding(plan, model)
    pair = renormalize(tuned, plan)
    targets = targets_for(plan, tuned)
    r = int(cfg.get("order", 2))
    grid = int(cfg.get("grid", 33))
    dist = {sign: cr_distance(getattr(pair, name), targets[sign], r=r, grid=grid)
            for sign, name in (("+", "plus"), ("-", "minus"))}
    out.json("plan.json", plan)
    out.json("renorm.json", {"pair": pair, "targets": targets, "cr_distance": dist,
                             "affine_part": {s: getattr(pair, n).affine_part() for s, n in
                                             (("+", "plus"), ("-", "minus"))}})
    rows = [[s, k, v] for s in ("+", "-") for k, v in enumerate(dist[s].per_order)]
    out.csv("cr_distance.csv", ["branch", "order", "sup"], rows)
    ks = list(range(r + 1))
    out.plot("cr_distance.png", plot_scalar, ks, [max(dist["-"].per_order[k], 1e-300) for k in ks],
             xlabel="derivative order", ylabel="sup |Rg- - target|", title="minus branch distance")
    return EXIT_OK


def cmd_cantor(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.dynamics.cones import certify_cone
    from blenderlab.errors import ConeFailure
    from blenderlab.hetero_model import build_cantor_pair
    from blenderlab.plotting import plot_boxes

    model = _load_model(cfg)
    pair = build_cantor_pair(model, int(cfg.get("n", 6)), int(cfg.get("N", 12)))
    eta = cfg.get("cone_eta", 0.25)
    cones = {}
    status = EXIT_OK
    for name, word in (("S1", pair.word1), ("S2", pair.word2)):
        try:
            cones[name] = certify_cone(word, pair.domain, eta)
        except ConeFailure as exc:
            cones[name] = exc.to_dict()
            status = EXIT_NEGATIVE
    out.json("cantor.json", {"pair": pair, "cones": cones, "eta": eta})
    emit_plot_data(pair, "cantor", cfg.out)
    out.files.append("boxes.csv")
    out.plot("cantor.png", plot_boxes, [("W", pair.domain.to_list()), ("S1(W)", pair.image1.to_list()),
                                        ("S2(W)", pair.image2.to_list())], title="Cantor pair images")
    return status


def cmd_horseshoe(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.hetero_model import build_horseshoe
    from blenderlab.plotting import plot_boxes

    model = _load_model(cfg)
    rep = build_horseshoe(model, int(cfg.get("n", 5)), int(cfg.get("N", 8)), cfg.get("eps", 0.1))
    out.json("horseshoe.json", rep)
    emit_plot_data(rep, "horseshoe", cfg.out)
    out.files.append("corners.csv")
    out.plot("horseshoe.png", plot_boxes, [("B", rep.box.to_list()), ("G2(B)", rep.image.to_list())],
             title="horseshoe crossing")
    return EXIT_OK


def cmd_chain_boost(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.chains import ChainModel, DEFAULT_CAP, DEFAULT_TOL, boost_flatness, synthetic_chain

    if cfg.config is not None:
        chain = ChainModel.from_dict(read_json(cfg.config))
    else:
        chain = synthetic_chain(lam=cfg.get("lam", -3.0), sigma_u=cfg.get("sigma_u", 0.5), dy=cfg.get("dy", 2.0),
                                dgamma=cfg.get("dgamma", 0.25), d=int(cfg.get("order", 0)))
    rep = boost_flatness(chain, tol=cfg.get("tol", DEFAULT_TOL), cap=int(cfg.get("cap", DEFAULT_CAP)),
                         full_translation=bool(cfg.get("full_translation", False)))
    out.json("chain.json", chain)
    out.json("flatness.json", rep)
    return EXIT_OK


def cmd_sink_census(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.dynamics.orbits import seed_grid
    from blenderlab.newhouse import CENSUS_HEADER, sink_census
    from blenderlab.plotting import plot_census

    fam = _family(cfg)
    grid = _a_grid(cfg, 0.2)
    n = int(cfg.get("seeds", 5))
    box = cfg.get("box", [-1.5, 1.5, -1.5, 1.5])
    seeds = seed_grid(Box2.from_bounds(*box), n)
    res = sink_census(fam, grid, int(cfg.get("max_period", 2)), seeds, workers=cfg.workers,
                      exclusion=0.01 if cfg.get("family") == "bicycle" else 0.0, probe_seed=cfg.seed)
    out.csv("census.csv", CENSUS_HEADER, [r.row() for r in res.records])
    out.csv("counts.csv", ["a", "sinks"], [list(c) for c in res.counts])
    out.json("census.json", res)
    out.plot("census.png", plot_census, res.records, res.counts)
    return EXIT_OK


def cmd_tangency(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.newhouse import ManifoldClearance, detect_tangency
    from blenderlab.plotting import plot_scalar

    fam = _family(cfg)
    lo, hi = cfg.get("a_min", 1.0), cfg.get("a_max", 1.4)
    b = float(fam.param("b", 0.0))
    if cfg.get("point") is not None:
        seed = tuple(cfg.get("point"))
    elif fam.name == "henon":
        a0 = lo
        x = ((b - 1) + math.sqrt((1 - b) ** 2 + 4 * a0)) / (2 * a0)
        seed = (x, b * x)
    else:
        raise ConfigError("--point is required for this family")
    steps = int(cfg.get("steps", 20))
    log: list = []
    fn = ManifoldClearance(fam, seed, int(cfg.get("period", 1)), int(cfg.get("iterations", 4)))
    records = detect_tangency(fn, seed, (lo, hi), steps, tol=cfg.get("tol", 1e-6), log=log)
    out.json("tangency.json", records)
    out.json("tangency_log.json", log)
    xs, ys = [], []
    for a in np.linspace(lo, hi, steps + 1):
        try:
            ys.append(fn(float(a)).value)
            xs.append(float(a))
        except BlenderLabError:
            pass
    out.csv("clearance.csv", ["a", "clearance"], list(zip(xs, ys)))
    if xs:
        out.plot("clearance.png", plot_scalar, xs, ys, xlabel="a", ylabel="signed clearance",
                 title="W^u vs W^s clearance")
    return EXIT_OK


def cmd_misiurewicz(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.newhouse import misiurewicz_check

    rep = misiurewicz_check(cfg.get("a", -2.0), int(cfg.get("max_iter", 100)), int(cfg.get("max_period", 16)))
    out.json("misiurewicz.json", rep)
    return EXIT_OK if rep.misiurewicz else EXIT_NEGATIVE


def cmd_manifold(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.dynamics.manifolds import local_manifold
    from blenderlab.dynamics.orbits import find_periodic_orbit
    from blenderlab.plotting import plot_curves

    fam = _family(cfg)
    seed = tuple(cfg.get("point") or (1.0, 0.3))
    orbit = find_periodic_orbit(fam, int(cfg.get("period", 1)), seed)
    curve = local_manifold(fam, orbit, cfg.get("flavor", "unstable"), order=int(cfg.get("order", 10)))
    out.json("manifold.json", {"orbit": orbit, "curve": curve})
    emit_plot_data(curve, "manifold", cfg.out)
    out.files.append("manifold.csv")
    out.plot("manifold.png", plot_curves, [(curve.flavor, curve.sample(201))], title="local invariant curve")
    return EXIT_OK


def _parse_maps(text: str) -> list[tuple[float, float]]:
    maps = []
    for part in text.split(";"):
        a, b = part.split(",")
        maps.append((float(a), float(b)))
    return maps


def cmd_ifs_cloud(cfg: RunConfig, out: Outputs) -> int:
    from blenderlab.blender import ifs_attract
    from blenderlab.plotting import plot_cloud

    try:
        maps = _parse_maps(cfg.get("maps", "0.5,0.5;0.5,-0.5"))
    except ValueError as exc:
        raise ConfigError(f"--maps must look like 'a,b;a,b': {exc}") from None
    pts = ifs_attract(maps, int(cfg.get("iterations", 10000)), cfg.seed, int(cfg.get("burn_in", 20)))
    emit_plot_data(pts, "ifs-cloud", cfg.out)
    out.files.append("points.csv")
    out.json("ifs.json", {"maps": maps, "iterations": int(cfg.get("iterations", 10000)),
                          "burn_in": int(cfg.get("burn_in", 20)), "seed": cfg.seed, "points": len(pts)})
    out.plot("cloud.png", plot_cloud, pts)
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig, Outputs], int]] = {
    "blender-check": cmd_blender_check,
    "parablender-check": cmd_parablender_check,
    "exponents": cmd_exponents,
    "renorm": cmd_renorm,
    "cantor": cmd_cantor,
    "horseshoe": cmd_horseshoe,
    "chain-boost": cmd_chain_boost,
    "sink-census": cmd_sink_census,
    "tangency": cmd_tangency,
    "misiurewicz": cmd_misiurewicz,
    "manifold": cmd_manifold,
    "ifs-cloud": cmd_ifs_cloud,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common(p):
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--config", help="input JSON config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-plot", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blenderlab", description="Blender and heterocycle laboratory.")
    parser.add_argument("--version", action="version", version=f"blenderlab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("blender-check", help="one-dimensional covering check")
    _common(p)
    p.add_argument("--delta-contraction", type=float, default=1.5)
    p.add_argument("--delta-perturb", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=0.0)

    p = sub.add_parser("parablender-check", help="jet-space covering check")
    _common(p)
    p.add_argument("--delta-contraction", type=float, default=1.5)
    p.add_argument("--delta-perturb", type=float, default=0.0)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--A", type=float)
    p.add_argument("--shrink-index", type=int, help="scale B_k for this k")
    p.add_argument("--shrink-factor", type=float, default=0.5)
    p.add_argument("--max-cells", type=int, default=200000)

    for name, help_ in (("exponents", "select renormalization exponents"),
                        ("renorm", "renormalize and measure the distance to the affine targets")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--delta", type=float, default=1.013637)
        p.add_argument("--eps", type=float, default=0.15)
        p.add_argument("--order", type=int, default=2 if name == "renorm" else 3)
        p.add_argument("--grid", type=int, default=33)
        p.add_argument("--cap", type=float)

    p = sub.add_parser("cantor", help="Cantor pair of contractions")
    _common(p)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--N", type=int, default=12)
    p.add_argument("--cone-eta", type=float, default=0.25)

    p = sub.add_parser("horseshoe", help="horseshoe crossing and its saddle")
    _common(p)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--eps", type=float, default=0.1)

    p = sub.add_parser("chain-boost", help="flatness boost on a chain model")
    _common(p)
    p.add_argument("--lam", type=float, default=-3.0)
    p.add_argument("--sigma-u", type=float, default=0.5)
    p.add_argument("--dy", type=float, default=2.0)
    p.add_argument("--dgamma", type=float, default=0.25)
    p.add_argument("--order", type=int, default=0, help="jet degree d")
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--cap", type=int, default=200)
    p.add_argument("--full-translation", action="store_true")

    def family_args(p, a_default=None):
        p.add_argument("--family", choices=["henon", "linear", "quadratic", "bicycle"], default="henon")
        p.add_argument("--a", type=float, default=a_default)
        p.add_argument("--b", type=float, default=0.3)
        p.add_argument("--eps", type=float, default=0.1)

    p = sub.add_parser("sink-census", help="count sinks over a parameter grid")
    _common(p)
    family_args(p)
    p.add_argument("--a-min", type=float)
    p.add_argument("--a-max", type=float)
    p.add_argument("--a-steps", type=int, default=0)
    p.add_argument("--a-values", type=float, nargs="+")
    p.add_argument("--max-period", type=int, default=2)
    p.add_argument("--seeds", type=int, default=5, help="seed grid points per axis")
    p.add_argument("--box", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))

    p = sub.add_parser("tangency", help="homoclinic tangency scan")
    _common(p)
    family_args(p, 1.0)
    p.add_argument("--a-min", type=float, default=1.0)
    p.add_argument("--a-max", type=float, default=1.4)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--period", type=int, default=1)
    p.add_argument("--iterations", type=int, default=4)
    p.add_argument("--point", type=float, nargs=2)
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("misiurewicz", help="critical-orbit landing check for x^2 + a")
    _common(p)
    p.add_argument("--a", type=float, default=-2.0)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--max-period", type=int, default=16)

    p = sub.add_parser("manifold", help="local invariant curve of a periodic orbit")
    _common(p)
    family_args(p, 1.0)
    p.add_argument("--point", type=float, nargs=2)
    p.add_argument("--period", type=int, default=1)
    p.add_argument("--flavor", choices=["stable", "unstable", "strong-unstable", "weak-unstable"],
                   default="unstable")
    p.add_argument("--order", type=int, default=10)

    p = sub.add_parser("ifs-cloud", help="chaos-game cloud of affine contractions")
    _common(p)
    p.add_argument("--maps", default="0.5,0.5;0.5,-0.5", help="'a,b;a,b' for y -> a y + b")
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--burn-in", type=int, default=20)
    return parser


_COMMON = {"subcommand", "out", "config", "seed", "workers", "no_plot"}


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    overrides = {k: v for k, v in vars(ns).items() if k not in _COMMON}
    validate_overrides(overrides)
    if ns.workers < 1:
        raise ConfigError("--workers must be >= 1")
    return RunConfig(ns.subcommand, Path(ns.out), Path(ns.config) if ns.config else None, overrides, ns.seed,
                     resolve_workers(ns.workers), not ns.no_plot)


def run(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ValueError) as exc:
        print(f"blenderlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    out = Outputs(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    try:
        code = COMMANDS[cfg.subcommand](cfg, out)
    except VerifiedNegative as exc:
        out.json("negative.json", exc.to_dict())
        print(f"{cfg.subcommand}: verified negative: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (BlenderLabError, ValueError, OSError, ArithmeticError) as exc:
        err = exc.to_dict() if isinstance(exc, BlenderLabError) else {"error": type(exc).__name__,
                                                                       "message": str(exc)}
        try:
            out.json("error.json", err)
        except OSError:
            pass
        print(f"{cfg.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    status = {0: "ok", 2: "negative"}.get(code, "error")
    print(f"{cfg.subcommand}: {status}; wrote {', '.join(out.files)} to {cfg.out}")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
