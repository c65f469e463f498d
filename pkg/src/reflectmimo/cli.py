"""Command-line front end: trace scenes, fit path models, predict channels
and run the displacement/capacity experiments on JSON scene files."""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from typing import IO, Iterator

import numpy as np

from . import fileio
from .capacity import LinkBudget, RateModel
from .experiments import (
    ESTIMATORS,
    DisplacementSpec,
    capacity_sweep,
    displacement_experiment,
)
from .fit_dp import fit_rm_dp
from .fit_rt import fit_rm_rt
from .paths import (
    C_LIGHT,
    ReferencePair,
    angles_to_image,
    pwa_distance,
    rm_distance_image,
)
from .tracer import to_pwa, trace_paths

_DEFAULT_ROTATIONS_DEG = [float(d) for d in range(-180, 180, 15)]


def _parse_vec(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z — got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@contextlib.contextmanager
def _open_out(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fp:
            yield fp


def _load_scene(path: str):
    with open(path) as fp:
        return fileio.load_scene(fp)


def _cmd_trace(args: argparse.Namespace) -> int:
    scene = _load_scene(args.scene)
    ref = ReferencePair(tx_ref=args.tx, rx_ref=args.rx)
    paths = trace_paths(scene, args.tx, args.rx, args.bounces)
    export = fileio.PathExport(
        tx=args.tx,
        rx=args.rx,
        f0_hz=scene.carrier_freq,
        paths=tuple((to_pwa(p, ref), p.route) for p in paths),
    )
    with _open_out(args.out) as fp:
        fileio.save_paths(export, fp)
    print(f"traced {len(paths)} path(s)", file=sys.stderr)
    return 0


def _cmd_fit_rt(args: argparse.Namespace) -> int:
    with open(args.paths) as fp:
        export = fileio.load_paths(fp)
    ref = export.reference
    fitted = []
    for traced in export.traced():
        rm = fit_rm_rt(traced, ref)
        fitted.append((rm, angles_to_image(rm, ref)))
    out = fileio.RmExport(ref=ref, f0_hz=export.f0_hz, paths=tuple(fitted))
    with _open_out(args.out) as fp:
        fileio.save_rm(out, fp)
    return 0


def _cmd_fit_dp(args: argparse.Namespace) -> int:
    with open(args.ref) as fp:
        ref_export = fileio.load_paths(fp)
    displaced = []
    for name in args.disp:
        with open(name) as fp:
            displaced.append(fileio.load_paths(fp).observation())
    ref = ref_export.reference
    fitted = fit_rm_dp(ref_export.observation(), displaced, ref)
    out = fileio.RmExport(
        ref=ref,
        f0_hz=ref_export.f0_hz,
        paths=tuple((rm, angles_to_image(rm, ref)) for rm in fitted),
    )
    with _open_out(args.out) as fp:
        fileio.save_rm(out, fp)
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    with open(args.rm) as fp:
        export = fileio.load_rm(fp)
    total = 0j
    for path, img in export.paths:
        if args.model == "constant":
            dist = C_LIGHT * path.delay
        elif args.model == "pwa":
            dist = pwa_distance(args.rx, args.tx, export.ref, path)
        else:
            dist = rm_distance_image(args.rx, args.tx, img)
        total += path.gain * np.exp(
            2j * math.pi * (path.delay * export.f0_hz - args.freq * dist / C_LIGHT)
        )
    print(f"{total.real:.17g}{total.imag:+.17g}j")
    return 0


def _load_config(path: str) -> dict:
    import json

    with open(path) as fp:
        doc = json.load(fp)
    if not isinstance(doc, dict):
        raise ValueError("experiment config must be a JSON object")
    return doc


def _config_ref(cfg: dict) -> ReferencePair:
    return ReferencePair(
        tx_ref=np.array(cfg["tx_ref"], dtype=float),
        rx_ref=np.array(cfg["rx_ref"], dtype=float),
    )


def _cmd_exp_displacement(args: argparse.Namespace) -> int:
    scene = _load_scene(args.scene)
    cfg = _load_config(args.config)
    spec_kwargs = {}
    if "distances_m" in cfg:
        spec_kwargs["distances"] = tuple(cfg["distances_m"])
    if "directions_per_distance" in cfg:
        spec_kwargs["directions_per_distance"] = int(cfg["directions_per_distance"])
    if "rng_seed" in cfg:
        spec_kwargs["rng_seed"] = int(cfg["rng_seed"])
    records = displacement_experiment(
        scene,
        _config_ref(cfg),
        DisplacementSpec(**spec_kwargs),
        bandwidth=float(cfg.get("bandwidth_hz", 2e9)),
        n_freq=int(cfg.get("n_freq", 10)),
        models=tuple(cfg.get("models", ESTIMATORS)),
        max_bounces=int(cfg.get("max_bounces", 2)),
    )
    with _open_out(args.out) as fp:
        fileio.write_error_csv(records, fp)
    return 0


def _cmd_exp_capacity(args: argparse.Namespace) -> int:
    scene = _load_scene(args.scene)
    cfg = _load_config(args.config)
    rotations = [
        math.radians(d) for d in cfg.get("rotations_deg", _DEFAULT_ROTATIONS_DEG)
    ]
    budget = LinkBudget(
        tx_power_dbm=float(cfg.get("tx_power_dbm", 23.0)),
        bandwidth_hz=float(cfg.get("bandwidth_hz", 2e9)),
        noise_figure_db=float(cfg.get("noise_figure_db", 3.0)),
    )
    rate_model = RateModel(
        alpha=float(cfg.get("alpha", 0.6)), se_max=float(cfg.get("se_max_bpshz", 4.8))
    )
    cells, counts = capacity_sweep(
        scene,
        _config_ref(cfg),
        rotations,
        budget,
        rate_model,
        rows=int(cfg.get("rows", 8)),
        cols=int(cfg.get("cols", 8)),
        spacing=float(cfg.get("spacing_m", 0.14)),
        models=tuple(cfg.get("models", ("exhaustive",) + ESTIMATORS)),
        n_freq=int(cfg.get("n_freq", 10)),
        max_bounces=int(cfg.get("max_bounces", 2)),
        rng_seed=int(cfg.get("rng_seed", 0)),
        dp_distances=tuple(cfg.get("dp_displacements_m", (0.01, 0.02))),
    )
    with _open_out(args.out) as fp:
        fileio.write_capacity_csv(cells, fp)
    for name, count in counts.items():
        print(f"trace count {name}: {count}", file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reflectmimo",
        description="specular channel tracing, reflection-model fitting and "
        "MIMO capacity experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="trace specular paths through a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--tx", required=True, type=_parse_vec)
    p.add_argument("--rx", required=True, type=_parse_vec)
    p.add_argument("--bounces", type=int, default=2)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_trace)

    fit = sub.add_parser("fit", help="fit reflection-model parameters")
    fit_sub = fit.add_subparsers(dest="method", required=True)
    p = fit_sub.add_parser("rt", help="fit from traced routes")
    p.add_argument("--paths", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_fit_rt)
    p = fit_sub.add_parser("dp", help="fit from displaced-pair observations")
    p.add_argument("--ref", required=True)
    p.add_argument("--disp", required=True, nargs="+")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_fit_dp)

    p = sub.add_parser("predict", help="predict the scalar channel at a point")
    p.add_argument("--rm", required=True)
    p.add_argument("--tx", required=True, type=_parse_vec)
    p.add_argument("--rx", required=True, type=_parse_vec)
    p.add_argument("--freq", required=True, type=float)
    p.add_argument("--model", choices=("constant", "pwa", "rm"), default="rm")
    p.set_defaults(func=_cmd_predict)

    exp = sub.add_parser("experiment", help="run a canned experiment")
    exp_sub = exp.add_subparsers(dest="experiment", required=True)
    p = exp_sub.add_parser("displacement", help="displacement error experiment")
    p.add_argument("--scene", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_exp_displacement)
    p = exp_sub.add_parser("capacity", help="capacity rotation sweep")
    p.add_argument("--scene", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_exp_capacity)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
