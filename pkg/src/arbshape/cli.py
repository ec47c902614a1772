"""Command line front end: ``arbshape {describe,build-index,match,deform,gen-dataset,bench}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench, deform, imgio
from .arb import ArbConfig
from .errors import ArbShapeError, ConfigError, IndexMismatch
from .match import load_index, nearest, read_manifest, save_index
from .methods import METHODS, Method, from_dict

log = logging.getLogger("arbshape")

WEIGHTS = ("count", "total", "average")
ORIENTS = ("none", "moments", "fourier", "furthest")
ARB_DEFAULTS = ArbConfig()


def _add_method_flags(p, multiple=False):
    g = p.add_argument_group("method")
    if multiple:
        g.add_argument("--method", action="append", choices=METHODS, help="repeatable; default: all ARB variants + both FDs")
    else:
        g.add_argument("--method", choices=METHODS)
    g.add_argument("--rings", type=int)
    g.add_argument("--width-deg", type=float)
    g.add_argument("--weight", choices=WEIGHTS)
    g.add_argument("--delta-deg", type=float)
    g.add_argument("--instances", type=int)
    g.add_argument("--orient", choices=ORIENTS)
    g.add_argument("--fd-k", type=int)


def _method_flags_given(args) -> bool:
    return any(getattr(args, k) is not None for k in ("method", "rings", "width_deg", "weight", "delta_deg", "instances", "orient", "fd_k"))


def _arb_config(args) -> ArbConfig:
    d = ARB_DEFAULTS
    return ArbConfig(
        rings=args.rings if args.rings is not None else d.rings,
        angular_width_deg=args.width_deg if args.width_deg is not None else d.angular_width_deg,
        weight_mode=args.weight or d.weight_mode,
        tilt_delta_deg=args.delta_deg if args.delta_deg is not None else d.tilt_delta_deg,
        instances=args.instances if args.instances is not None else d.instances,
        orientation_mode=args.orient or d.orientation_mode,
    )


def _method(args, name=None) -> Method:
    name = name or args.method or "arb-accum"
    kw = {"arb": _arb_config(args)}
    if args.fd_k is not None:
        kw["fd_k"] = args.fd_k
    return Method(name, **kw)


def _csv_list(value: str):
    return [v.strip() for v in value.split(",") if v.strip()]


# ---------------------------------------------------------------------------

def cmd_describe(args):
    method = _method(args)
    img = imgio.load_image(args.image, args.threshold)
    try:
        values = method.describe_array(img)
    except ArbShapeError as exc:
        raise type(exc)(f"{args.image}: {exc}") from None
    text = method.format(values)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{args.image}: {method.tag}, {values.size} values -> {args.out}")
    else:
        sys.stdout.write(text)


def cmd_build_index(args):
    method = _method(args)
    ds = imgio.load_dataset(args.dataset, args.threshold, args.size, args.size)
    index = bench.build_index(ds, method)
    save_index(index, args.out, method.config(), method.format)
    print(f"indexed {len(index)} images with {method.tag} -> {args.out}")


def cmd_match(args):
    stored = from_dict(read_manifest(args.index)["config"])
    method = _method(args) if _method_flags_given(args) else stored
    if method.config() != stored.config():
        raise IndexMismatch(f"query method {method.tag} does not match index method {stored.tag}")
    index, _ = load_index(args.index, method.parse)
    img = imgio.load_image(args.query, args.threshold)
    if args.size:
        img = imgio.resize_to(img, args.size, args.size)
    try:
        q = method.describe(img)
    except ArbShapeError as exc:
        raise type(exc)(f"{args.query}: {exc}") from None
    for rank, (ident, dist) in enumerate(nearest(q, index, args.k, method.distance), start=1):
        print(f"{rank},{ident},{dist:.17g}")


def cmd_deform(args):
    img = imgio.load_image(args.image, args.threshold)
    stem = Path(args.image).stem
    if args.max_level:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        kinds = _csv_list(args.kind) if args.kind else [k.value for k in deform.Kind]
        for spec in bench.deformation_specs(kinds, args.max_level):
            try:
                res = deform.apply(img, spec)
            except ArbShapeError as exc:
                print(f"{spec}: skipped ({type(exc).__name__}: {exc})")
                continue
            imgio.write_pgm(res, out / f"{stem}_{spec}.pgm")
            print(f"{spec}: {res.count()} px")
        return
    if not args.kind or not args.level:
        raise ConfigError("deform needs --kind and --level, or --max-level")
    spec = deform.DeformationSpec(args.kind, args.level, args.variant or deform.VARIANTS[deform.Kind(args.kind)][0])
    try:
        res = deform.apply(img, spec)
    except ArbShapeError as exc:
        raise type(exc)(f"{args.image}: {exc}") from None
    imgio.write_pgm(res, args.out)
    print(f"{spec}: {res.count()} px -> {args.out}")


def cmd_gen_dataset(args):
    ds = imgio.generate_synthetic_dataset(args.n, args.size, args.size, args.seed)
    imgio.write_dataset(ds, args.out)
    print(f"wrote {len(ds)} synthetic silhouettes ({args.size}x{args.size}, seed {args.seed}) to {args.out}")


def cmd_bench(args):
    if args.dataset and args.synthetic:
        raise ConfigError("use either --dataset or --synthetic, not both")
    if args.dataset:
        ds = imgio.load_dataset(args.dataset, args.threshold, args.size, args.size)
        source = args.dataset
    else:
        n = args.synthetic or 200
        ds = imgio.generate_synthetic_dataset(n, args.size, args.size, args.seed)
        source = f"synthetic n={n} seed={args.seed}"
    names = args.method or ["arb-simple", "arb-accum", "arb-overlap", "fd-cc", "fd-cd"]
    methods = [_method(args, name) for name in names]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(f"dataset: {source} ({len(ds)} images)")

    run_acc = args.kinds is not None or not args.timing
    if run_acc:
        kinds = _csv_list(args.kinds) if args.kinds else [k.value for k in deform.Kind]
        reports = []
        for m in methods:
            rep = bench.run_accuracy(ds, m, kinds, args.levels, workers=args.workers)
            reports.append(rep)
            summary = "  ".join(f"{k.value}={rep.average(k):.1f}%" for k in rep.kinds())
            print(f"{m.tag}: {summary}")
        bench.emit_report(reports, out / "accuracy.csv")
        print(f"accuracy -> {out / 'accuracy.csv'}")

    if args.timing:
        timings = []
        for m in methods:
            t = bench.run_timing(ds, m, args.train_iters, args.match_iters)
            timings.append(t)
            print(f"{m.tag}: train {t.train_time * 1e3:.4f} ms/image, match {t.match_time * 1e6:.4f} us/pair")
        bench.emit_report(timings, out / "timing.csv")
        sizes = [int(s) for s in _csv_list(args.sizes)]
        bench.emit_projection(timings, sizes, out / "projection.csv")
        print(f"timing -> {out / 'timing.csv'}, projection -> {out / 'projection.csv'}")


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arbshape", description="Angular radial bins shape matching")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--threshold", type=int, default=imgio.DEFAULT_THRESHOLD)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("describe", help="write the descriptor of one image")
    p.add_argument("image")
    p.add_argument("--out")
    common(p)
    _add_method_flags(p)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("build-index", help="describe a dataset directory into an index")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=120)
    common(p)
    _add_method_flags(p)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("match", help="rank index entries against a query image")
    p.add_argument("query")
    p.add_argument("index")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--size", type=int, default=0, help="resize the query first (0 keeps it)")
    common(p)
    _add_method_flags(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("deform", help="apply a protocol deformation")
    p.add_argument("image")
    p.add_argument("--kind", help="deformation kind (comma list with --max-level)")
    p.add_argument("--level", type=int)
    p.add_argument("--variant")
    p.add_argument("--max-level", type=int, help="write every level/variant into the --out directory")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("gen-dataset", help="write a synthetic silhouette dataset")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--size", type=int, default=120)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("bench", help="run the accuracy and/or timing protocols")
    p.add_argument("--dataset")
    p.add_argument("--synthetic", type=int, metavar="N")
    p.add_argument("--size", type=int, default=120)
    p.add_argument("--kinds", help="comma separated deformation kinds (default: all)")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--train-iters", type=int, default=100)
    p.add_argument("--match-iters", type=int, default=10000)
    p.add_argument("--sizes", default="2000,50000", help="dataset sizes for the retrieval projection")
    p.add_argument("--workers", type=int, default=1, help="accuracy only; timing always runs on one worker")
    p.add_argument("--out", default="bench-out")
    common(p)
    _add_method_flags(p, multiple=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ArbShapeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
