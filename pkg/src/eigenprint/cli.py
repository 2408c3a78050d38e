"""Command-line surface: ingest, train, verify, h-scan, roc.

Exit codes from ``verify`` carry the verdict (0 InBase, 1 OutOfBase,
2 Inconclusive); any error on any subcommand prints a one-line diagnostic to
standard error and exits 3. Output files are written atomically (temp file
plus rename), so interruption never leaves a partial artifact.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .classifier import DECISION_MODES, DecisionConfig, Verdict, verify
from .edges import EDGE_METHODS, EdgeConfig, apply_edge_stage
from .eigenspace import train
from .evaluation import (
    NOISE_LEVEL_NAMES,
    csv_metadata,
    h_scan,
    h_scan_csv,
    make_noise_level,
    roc_csv,
    roc_sweep,
    split_database,
    threshold_grid,
)
from .imaging import NoiseSpec, add_gaussian_noise, ingest_database, load_image, write_pgm
from .persistence import atomic_write_bytes, load_database, load_space, save_database, save_space

__all__ = ["run", "main"]

_VERDICT_EXIT = {Verdict.IN_BASE: 0, Verdict.OUT_OF_BASE: 1, Verdict.INCONCLUSIVE: 2}


class _CliError(Exception):
    """Usage or runtime failure to be reported as a one-line diagnostic."""


class _Parser(argparse.ArgumentParser):
    # argparse's default error() exits with status 2, which this tool
    # reserves for the Inconclusive verdict; raise instead and let run()
    # map every failure to exit 3.
    def error(self, message):
        raise _CliError(message)


def _noise_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'mean,variance', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numeric 'mean,variance', got {text!r}")


def _edge_config(args) -> EdgeConfig:
    return EdgeConfig(
        method=args.edges,
        canny_sigma=args.sigma,
        canny_high_percentile=args.high_pct,
        canny_low_ratio=args.low_ratio,
        sobel_threshold_factor=args.sobel_factor,
    )


def _dump_edges(directory, images, cfg: EdgeConfig) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(images):
        write_pgm(apply_edge_stage(img, cfg), out / f"edge_{i:03d}.pgm")


def _cmd_ingest(args) -> int:
    db = ingest_database(args.dir, args.pattern)
    save_database(db, args.out)
    print(f"ingested {db.size} images ({db.height}x{db.width}) -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    db = load_database(args.db)
    cfg = _edge_config(args)
    space = train(db, cfg)
    save_space(space, args.out)
    if args.dump_edges:
        _dump_edges(args.dump_edges, (db.image(m) for m in range(db.size)), cfg)
    print(
        f"trained space on {space.size} images"
        f" (effective rank {space.effective_rank}, edges {cfg.method}) -> {args.out}"
    )
    return 0


def _cmd_verify(args) -> int:
    space = load_space(args.space)
    img = load_image(args.image)
    cfg = DecisionConfig(
        mode=args.mode,
        h_in=args.h_in,
        h_out=args.h_out,
        alpha=args.alpha,
        beta=args.beta,
    )
    noise = None
    if args.noise is not None:
        mean, variance = args.noise
        noise = NoiseSpec(mean=mean, variance=variance, seed=args.seed)
    report = verify(space, img, cfg, noise, source_path=str(args.image))
    if args.dump_edges:
        probe = add_gaussian_noise(img, noise) if noise is not None else img
        _dump_edges(args.dump_edges, [probe], space.edge_config)
    print(report.to_json_line())
    return _VERDICT_EXIT[report.verdict]


def _scan_inputs(args):
    space = load_space(args.space)
    db = load_database(args.db)
    _train_half, tests = split_database(db, args.split)
    override = getattr(args, "noise", None)
    level = make_noise_level(args.noise_level, seed=args.seed, override=override)
    metadata = csv_metadata(__version__, str(args.db), args.split, space.edge_config, level)
    return space, tests, level, metadata


def _cmd_h_scan(args) -> int:
    space, tests, level, metadata = _scan_inputs(args)
    rows = h_scan(space, tests, level)
    atomic_write_bytes(args.out, h_scan_csv(rows, metadata).encode("utf-8"))
    print(f"scanned {len(rows)} probes -> {args.out}")
    return 0


def _cmd_roc(args) -> int:
    space, tests, level, metadata = _scan_inputs(args)
    thresholds = threshold_grid(args.tmin, args.tmax, args.steps)
    points = roc_sweep(space, tests, level, thresholds)
    metadata.append(("thresholds", f"tmin={args.tmin!r} tmax={args.tmax!r} steps={args.steps}"))
    atomic_write_bytes(args.out, roc_csv(points, metadata).encode("utf-8"))
    print(f"swept {len(points)} thresholds over {len(tests.entries)} probes -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eigenprint", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"eigenprint {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    p = sub.add_parser("ingest", help="load a directory of images into a database file")
    p.add_argument("--dir", required=True, help="directory containing the images")
    p.add_argument("--pattern", default="*.tif", help="filename glob (default: *.tif)")
    p.add_argument("--out", required=True, help="output database file (.fpdb)")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train", help="build an eigenspace from a database file")
    p.add_argument("--db", required=True, help="input database file (.fpdb)")
    p.add_argument("--edges", required=True, choices=EDGE_METHODS, help="edge detection method")
    p.add_argument("--sigma", type=float, default=math.sqrt(2.0), help="Gaussian smoothing sigma")
    p.add_argument("--high-pct", type=float, default=70.0, help="strong-edge percentile of nonzero gradients")
    p.add_argument("--low-ratio", type=float, default=0.4, help="weak threshold as a ratio of the strong one")
    p.add_argument("--sobel-factor", type=float, default=4.0, help="threshold factor on the mean gradient")
    p.add_argument("--dump-edges", metavar="DIR", help="write per-image edge maps as PGM for inspection")
    p.add_argument("--out", required=True, help="output space file (.fpcs)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("verify", help="decide whether a probe image belongs to the trained base")
    p.add_argument("--space", required=True, help="trained space file (.fpcs)")
    p.add_argument("--image", required=True, help="probe image (PGM or TIFF)")
    p.add_argument("--mode", choices=DECISION_MODES, default="h_band", help="decision rule")
    p.add_argument("--h-in", type=float, default=0.5, help="accept when h is at or below this")
    p.add_argument("--h-out", type=float, default=0.55, help="reject when h is at or above this")
    p.add_argument("--alpha", type=float, default=1.0, help="legacy_mahalanobis threshold factor")
    p.add_argument("--beta", type=float, default=1.0, help="legacy_euclid_eigen threshold factor")
    p.add_argument("--noise", type=_noise_pair, metavar="M,V", help="add Gaussian noise before verification")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--dump-edges", metavar="DIR", help="write the probe edge map as PGM")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("h-scan", help="compute h for every image of a labeled database")
    p.add_argument("--space", required=True, help="trained space file (.fpcs)")
    p.add_argument("--db", required=True, help="full labeled database file (.fpdb)")
    p.add_argument("--split", default="half-fingers", help="split policy labeling the probes")
    p.add_argument("--noise-level", required=True, choices=NOISE_LEVEL_NAMES, help="named noise level")
    p.add_argument("--noise", type=_noise_pair, metavar="M,V", help="override the level's mean,variance")
    p.add_argument("--seed", type=int, default=0, help="base noise seed (probe i uses seed + i)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_h_scan)

    p = sub.add_parser("roc", help="sweep an h threshold grid and tally FP/FN")
    p.add_argument("--space", required=True, help="trained space file (.fpcs)")
    p.add_argument("--db", required=True, help="full labeled database file (.fpdb)")
    p.add_argument("--split", default="half-fingers", help="split policy labeling the probes")
    p.add_argument("--noise-level", required=True, choices=NOISE_LEVEL_NAMES, help="named noise level")
    p.add_argument("--seed", type=int, default=0, help="base noise seed (probe i uses seed + i)")
    p.add_argument("--steps", type=int, default=101, help="number of thresholds in the grid")
    p.add_argument("--tmin", type=float, default=0.0, help="lowest threshold")
    p.add_argument("--tmax", type=float, default=1.0, help="highest threshold")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_roc)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
