"""Command-line entry point: ``copulasim <command> ...``.

Exit status is 0 on success, 2 for usage or input errors and 3 for
unexpected internal failures.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from . import bench, harness
from ._version import __version__
from .copula import DEFAULT_PATCH_SIZE, csim_map
from .distort import regional_distort
from .errors import CopulaSimError
from .image import as_image, load_image, validate_pair
from .reference import FsimConfig, IssmConfig, SsimConfig

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3
THREADS_ENV = "COPULASIM_THREADS"


class InputError(Exception):
    """Bad command-line input detected after parsing."""


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _dims(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}")


def _common(parser):
    g = parser.add_argument_group("metric options")
    g.add_argument("--patch-size", type=int, default=DEFAULT_PATCH_SIZE)
    g.add_argument("--metrics", default="CSIM",
                   help="comma-separated subset of CSIM,SSIM,FSIM,ISSM or 'all'")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=None,
                   help=f"worker cap (default: ${THREADS_ENV} or all cores)")
    g.add_argument("--ssim-window", choices=("gaussian", "global"), default="gaussian")
    g.add_argument("--fsim-t1", type=float, default=FsimConfig.t1)
    g.add_argument("--fsim-t2", type=float, default=FsimConfig.t2)
    g.add_argument("--issm-a", type=float, default=IssmConfig.a)
    g.add_argument("--issm-b", type=float, default=IssmConfig.b)
    g.add_argument("--issm-c", type=float, default=IssmConfig.c)
    g.add_argument("--issm-e", type=float, default=IssmConfig.e)
    g.add_argument("--issm-bins", type=int, default=IssmConfig.bins)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copulasim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"copulasim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="print one score line per metric")
    p.add_argument("image_a")
    p.add_argument("image_b")
    _common(p)

    p = sub.add_parser("map", help="write the per-patch CSIM map as CSV and PNG")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-png", required=True)
    _common(p)

    p = sub.add_parser("sweep", help="noise/blur sweep of one image")
    p.add_argument("image")
    p.add_argument("--blur-sigmas", type=_floats, default=[0, 2, 4, 8])
    p.add_argument("--noise-sigmas", type=_floats, default=[0, 5, 10, 15, 20])
    p.add_argument("--noise-mean", type=float, default=5.0)
    p.add_argument("--out", required=True)
    p.add_argument("--json", help="also write records as JSON")
    _common(p)

    p = sub.add_parser("video", help="score every frame against the first")
    p.add_argument("frames", help="directory of numbered frame images")
    p.add_argument("--resize", type=_dims, help="WIDTHxHEIGHT, bilinear")
    p.add_argument("--out", required=True)
    p.add_argument("--json")
    _common(p)

    p = sub.add_parser("dataset", help="evaluate a CSIQ-style directory")
    p.add_argument("root")
    p.add_argument("--out", required=True)
    p.add_argument("--json")
    _common(p)

    p = sub.add_parser("bench", help="time CSIM over patch sizes")
    p.add_argument("image_a")
    p.add_argument("image_b", nargs="?",
                   help="defaults to image_a with a shutter-blurred central rectangle")
    p.add_argument("--sizes", type=_ints, default=[4, 8, 16, 32, 64])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", required=True)
    _common(p)
    return parser


def resolve_threads(value, command=None) -> int:
    if value is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                value = int(env)
            except ValueError:
                raise InputError(f"{THREADS_ENV} must be an integer, got {env!r}")
        elif command == "bench":
            value = 1
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise InputError("--threads must be >= 1")
    return value


def make_suite(args) -> harness.MetricSuite:
    ssim_cfg = SsimConfig(window=args.ssim_window)
    return harness.MetricSuite(
        metrics=harness.normalize_metrics(args.metrics),
        patch_size=args.patch_size,
        ssim=ssim_cfg,
        fsim=FsimConfig(t1=args.fsim_t1, t2=args.fsim_t2),
        issm=IssmConfig(a=args.issm_a, b=args.issm_b, c=args.issm_c, e=args.issm_e,
                        bins=args.issm_bins, ssim=ssim_cfg),
    )


def _meta(args, suite, **extra):
    return harness.metadata_header(seed=args.seed, patch_size=args.patch_size,
                                   config=suite.config_dict(), **extra)


def _write_atomic(path, writer):
    """Write via a temporary sibling file so failures leave nothing behind."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.",
                               suffix=path.suffix)
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _emit_records(args, suite, records, out=sys.stdout, **extra):
    meta = _meta(args, suite, **extra)
    _write_atomic(args.out, lambda p: harness.write_records_csv(p, records, meta))
    print(f"wrote {len(records)} records to {args.out}", file=out)
    if args.json:
        _write_atomic(args.json, lambda p: harness.write_records_json(p, records, meta))
        print(f"wrote {len(records)} records to {args.json}", file=out)


def cmd_compare(args, out):
    suite = make_suite(args)
    a, b = load_image(args.image_a), load_image(args.image_b)
    validate_pair(a, b)
    for name, (score, _) in suite.evaluate(a, b).items():
        print(f"{name}\t{score:.6f}", file=out)


def heatmap(scores: np.ndarray, patch_size: int, width: int, height: int) -> np.ndarray:
    """8-bit heatmap (255 = similarity 1), nearest-neighbour upscaled."""
    cells = np.rint(np.clip(scores, 0.0, 1.0) * 255).astype(np.uint8)
    up = np.repeat(np.repeat(cells, patch_size, axis=0), patch_size, axis=1)
    return np.pad(up, ((0, height - up.shape[0]), (0, width - up.shape[1])), mode="edge")


def cmd_map(args, out):
    a, b = load_image(args.image_a), load_image(args.image_b)
    smap = csim_map(a, b, args.patch_size, resolve_threads(args.threads))
    png = heatmap(smap.scores, args.patch_size, a.width, a.height)

    def write_csv(path):
        with open(path, "w") as fh:
            for row in smap.scores:
                fh.write(",".join(f"{v:.6f}" for v in row) + "\n")

    written = []
    try:
        _write_atomic(args.out_csv, write_csv)
        written.append(args.out_csv)
        _write_atomic(args.out_png, lambda p: PILImage.fromarray(png).save(p, format="PNG"))
    except BaseException:
        for path in written:
            os.remove(path)
        raise
    print(f"wrote {smap.grid_rows}x{smap.grid_cols} map to {args.out_csv} and {args.out_png}",
          file=out)


def cmd_sweep(args, out):
    suite = make_suite(args)
    img = load_image(args.image)
    records = harness.sweep_eval(img, args.blur_sigmas, args.noise_sigmas, args.noise_mean,
                                 seed=args.seed, suite=suite,
                                 image_id=Path(args.image).stem,
                                 workers=resolve_threads(args.threads))
    _emit_records(args, suite, records, out, noise_mean=args.noise_mean,
                  grid_order="noise-then-blur")


def cmd_video(args, out):
    suite = make_suite(args)
    series = harness.video_eval(args.frames, resize_to=args.resize, suite=suite,
                                workers=resolve_threads(args.threads))
    records = series.to_records(Path(args.frames).name)
    extra = {"resize": "x".join(map(str, args.resize)) if args.resize else "none",
             "resize_kernel": series.resize_kernel}
    _emit_records(args, suite, records, out, **extra)


def cmd_dataset(args, out):
    suite = make_suite(args)
    records = harness.dataset_eval(args.root, suite=suite,
                                   workers=resolve_threads(args.threads))
    _emit_records(args, suite, records, out)
    for (metric, dist), cell in harness.aggregate_by_distortion(records).items():
        print(f"mean\t{metric}\t{dist}\t{cell.mean:.6f}\t{cell.count}", file=out)
    if len(suite.metrics) > 1:
        try:
            corr = harness.correlation_matrix(records)
        except CopulaSimError:
            return
        for i, m in enumerate(corr.metrics):
            for j in range(i + 1, len(corr.metrics)):
                print(f"corr\t{m}\t{corr.metrics[j]}\t{corr.coefficients[i, j]:.6f}", file=out)


def default_bench_pair(img):
    """Reference image and a copy with a shutter-blurred central rectangle."""
    img = as_image(img)
    w, h = max(1, img.width // 10), max(1, img.height // 10)
    rect = ((img.width - w) // 2, (img.height - h) // 2, w, h)
    return img, regional_distort(img, rect)


def cmd_bench(args, out):
    suite = make_suite(args)
    a = load_image(args.image_a)
    if args.image_b:
        b = load_image(args.image_b)
    else:
        a, b = default_bench_pair(a)
    threads = resolve_threads(args.threads, "bench")
    records = bench.patch_sweep_timing(a, b, args.sizes, args.reps, workers=threads)
    meta = _meta(args, suite, threads=threads)
    _write_atomic(args.out, lambda p: bench.write_bench_csv(p, records, meta))
    print(f"wrote {len(records)} records to {args.out}", file=out)
    if len(records) >= 4 and max(args.sizes) >= 8 * min(args.sizes):
        print(bench.fit_complexity_trend(records).summary(), file=out)


COMMANDS = {
    "compare": cmd_compare,
    "map": cmd_map,
    "sweep": cmd_sweep,
    "video": cmd_video,
    "dataset": cmd_dataset,
    "bench": cmd_bench,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        if args.patch_size < 1:
            raise InputError("--patch-size must be >= 1")
        resolve_threads(args.threads, args.command)
        COMMANDS[args.command](args, out)
    except (CopulaSimError, InputError, OSError, ValueError) as exc:
        print(f"copulasim {args.command}: error: {exc}", file=err)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"copulasim {args.command}: internal error: {exc!r}", file=err)
        return EXIT_INTERNAL
    return EXIT_OK


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
