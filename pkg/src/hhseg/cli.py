"""Batch command line: synthetic generation, segmentation runs, evaluation."""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import imageio, metrics, synth
from .distance import load_vector_field, save_vector_field
from .grid import GridError, ScribbleSet
from .optimize import OverConstrainedError, SolverConfig, segment


@dataclass
class RunConfig:
    image: str
    scribbles: str
    truth: str | None = None
    out: str | None = None
    report: str | None = None
    iterlog: str | None = None
    fields: dict[int, str] = field(default_factory=dict)
    solver: SolverConfig = field(default_factory=SolverConfig)


def _solver_from_args(args) -> SolverConfig:
    return SolverConfig(
        theta=args.theta,
        lam=getattr(args, "lambda"),
        neighborhood_size=args.neighborhood,
        gmm_components=args.gmm_k,
        prune=not args.no_prune,
        cone_fix=not args.no_cone_fix,
        rng_seed=args.seed,
    )


def _load_grid(path: str):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(path)
    if p.suffix == ".json":
        return imageio.load_volume(p)
    return imageio.load_image_png(p)


def _load_scribbles(path: str):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(path)
    if p.suffix == ".json":
        lab = imageio.load_label_volume(p)
        return ScribbleSet.from_dict(
            {int(k): np.flatnonzero(lab.assignment == k)
             for k in np.unique(lab.assignment) if k != 0})
    return imageio.load_scribbles_png(p)


def run(config: RunConfig) -> int:
    """Load inputs, run the full pipeline, write outputs; returns an exit code."""
    t0 = time.perf_counter()
    try:
        image = _load_grid(config.image)
        scribbles = _load_scribbles(config.scribbles)
        external = {lab: load_vector_field(p) for lab, p in config.fields.items()}
    except FileNotFoundError as exc:
        print(f"error: input file not found: {exc}", file=sys.stderr)
        return 2
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        labeling, energy, log = segment(image, scribbles, config.solver,
                                        external_fields=external or None)
    except OverConstrainedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - t0

    report: dict = {
        "config": {
            "image": config.image,
            "scribbles": config.scribbles,
            "theta": config.solver.theta,
            "lambda": config.solver.lam,
            "neighborhood": config.solver.neighborhood_size,
            "gmm_k": config.solver.gmm_components,
            "prune": config.solver.prune,
            "cone_fix": config.solver.cone_fix,
            "seed": config.solver.rng_seed,
        },
        "energy": energy.as_dict(),
        "label_counts": {str(k): v for k, v in labeling.counts().items()},
        "timing_sec": elapsed,
        "iterations": log,
    }
    if config.truth:
        try:
            truth = imageio.load_labeling_png(config.truth) \
                if Path(config.truth).suffix != ".json" \
                else imageio.load_label_volume(config.truth)
        except FileNotFoundError:
            print(f"error: input file not found: {config.truth}", file=sys.stderr)
            return 2
        m = metrics.compute_metrics(labeling, truth)
        report["metrics"] = {str(k): v for k, v in m.per_label.items()}
        for k, v in sorted(m.per_label.items()):
            print(f"label {k}: precision={v['precision']:.4f} "
                  f"recall={v['recall']:.4f} f1={v['f1']:.4f}")
    if config.out:
        if len(image.dims) == 2:
            imageio.save_labeling_png(labeling, image.dims, config.out)
        else:
            arr = labeling.assignment.astype(np.uint8)
            out = Path(config.out)
            raw = out.with_suffix(".raw")
            raw.write_bytes(arr.tobytes())
            out.write_text(json.dumps({"dims": list(image.dims), "raw": raw.name}))
    if config.report:
        Path(config.report).write_text(json.dumps(report, indent=2))
    if config.iterlog:
        Path(config.iterlog).write_text(
            "\n".join(json.dumps(row) for row in log) + "\n")
    print(f"energy total={energy.total:.6f} "
          f"(data={energy.data:.6f}, smoothness={energy.smoothness:.6f}, "
          f"hedgehog={energy.hedgehog})  [{elapsed:.2f}s]")
    return 0


_FIELD_FLAG = re.compile(r"^--field-(\d+)(?:=(.*))?$")


def _extract_field_flags(argv: list[str]) -> tuple[list[str], dict[int, str]]:
    """Pull per-label --field-<label> PATH flags out of the raw argument list."""
    rest: list[str] = []
    fields: dict[int, str] = {}
    i = 0
    while i < len(argv):
        m = _FIELD_FLAG.match(argv[i])
        if m:
            label = int(m.group(1))
            if m.group(2) is not None:
                fields[label] = m.group(2)
            else:
                if i + 1 >= len(argv):
                    raise GridError(f"--field-{label} needs a path")
                fields[label] = argv[i + 1]
                i += 1
        else:
            rest.append(argv[i])
        i += 1
    return rest, fields


def _add_solver_flags(sp):
    sp.add_argument("--theta", type=float, default=math.pi / 4)
    sp.add_argument("--lambda", dest="lambda", type=float, default=2.0)
    sp.add_argument("--neighborhood", type=int, default=8, choices=(4, 8, 16, 32, 6, 26))
    sp.add_argument("--gmm-k", type=int, default=5)
    sp.add_argument("--no-prune", action="store_true")
    sp.add_argument("--no-cone-fix", action="store_true")
    sp.add_argument("--seed", type=int, default=0)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = argparse.ArgumentParser(prog="hhseg",
                                     description="multi-object segmentation with "
                                                 "per-label shape priors")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("segment", help="segment an image from scribbles")
    sp.add_argument("--image", required=True)
    sp.add_argument("--scribbles", required=True)
    sp.add_argument("--truth")
    sp.add_argument("--out")
    sp.add_argument("--report")
    sp.add_argument("--iterlog", help="write per-move energies as JSON lines")
    _add_solver_flags(sp)

    gp = sub.add_parser("gen", help="write a synthetic instance to a directory")
    gp.add_argument("--kind", required=True, choices=synth.KINDS)
    gp.add_argument("--dims", type=int, nargs=2, default=(128, 128))
    gp.add_argument("--noise", type=float, default=0.05)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--out-dir", required=True)

    ep = sub.add_parser("eval", help="compare a result labeling against truth")
    ep.add_argument("--result", required=True)
    ep.add_argument("--truth", required=True)
    ep.add_argument("--report")

    try:
        argv, fields = _extract_field_flags(argv)
        args = parser.parse_args(argv)
        if args.command == "segment":
            solver = _solver_from_args(args)
            cfg = RunConfig(image=args.image, scribbles=args.scribbles,
                            truth=args.truth, out=args.out, report=args.report,
                            iterlog=args.iterlog, fields=fields, solver=solver)
            return run(cfg)
        if args.command == "gen":
            inst = synth.generate_synthetic(args.kind, dims=tuple(args.dims),
                                            noise=args.noise, seed=args.seed)
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            imageio.save_image_png(inst.image, out / "image.png")
            imageio.save_scribbles_png(inst.scribbles, inst.image.dims,
                                       out / "scribbles.png")
            imageio.save_labeling_png(inst.truth, inst.image.dims, out / "truth.png")
            if inst.field is not None:
                save_vector_field(inst.field, out / "field.hhvf")
            print(f"wrote {args.kind} instance to {out}")
            return 0
        if args.command == "eval":
            result = imageio.load_labeling_png(args.result)
            truth = imageio.load_labeling_png(args.truth)
            m = metrics.compute_metrics(result, truth)
            payload = {str(k): v for k, v in m.per_label.items()}
            print(json.dumps(payload, indent=2))
            if args.report:
                Path(args.report).write_text(json.dumps(payload, indent=2))
            return 0
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: input file not found: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
