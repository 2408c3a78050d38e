#!/usr/bin/env python3
"""FVC-style experiment driver: ingest a directory of fingerprint TIFFs,
split half the fingers into the enrolled base, train, and write h-scan and
ROC CSVs for a chosen noise level."""

import argparse
import sys
from pathlib import Path

from eigenprint import (
    EdgeConfig,
    Verdict,
    __version__,
    csv_metadata,
    h_scan,
    h_scan_csv,
    ingest_database,
    make_noise_level,
    roc_csv,
    roc_sweep,
    split_database,
    threshold_grid,
    train,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("directory", type=Path, help="directory of .tif images")
    parser.add_argument("--pattern", default="*.tif")
    parser.add_argument(
        "--edges", choices=("none", "sobel", "canny"), default="canny"
    )
    parser.add_argument("--sigma", type=float, default=EdgeConfig().canny_sigma)
    parser.add_argument(
        "--noise-level", choices=("none", "low", "medium", "high"), default="medium"
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--steps", type=int, default=101)
    parser.add_argument("--tmax", type=float, default=1.0)
    parser.add_argument("--out-dir", type=Path, default=Path("."))
    args = parser.parse_args()

    db = ingest_database(args.directory, pattern=args.pattern)
    print(f"ingested {db.size} images ({db.height}x{db.width})")

    train_db, tests = split_database(db)
    enrolled = sorted({lab.finger for lab in train_db.labels})
    print(f"enrolled fingers {enrolled} ({train_db.size} images)")

    edge_cfg = EdgeConfig(method=args.edges, canny_sigma=args.sigma)
    space = train(train_db, edge_cfg)
    print(f"trained eigenspace: effective rank {space.effective_rank}")

    level = make_noise_level(args.noise_level, seed=args.seed)
    rows = h_scan(space, tests, level)
    in_h = [r.h for r in rows if r.truth is Verdict.IN_BASE]
    out_h = [r.h for r in rows if r.truth is Verdict.OUT_OF_BASE]
    print(
        f"h ranges: in-base [{min(in_h):.4f}, {max(in_h):.4f}]  "
        f"out-of-base [{min(out_h):.4f}, {max(out_h):.4f}]"
    )

    metadata = csv_metadata(
        tool_version=__version__,
        database_id=str(args.directory),
        split_policy=tests.policy,
        edge_cfg=edge_cfg,
        level=level,
    )

    args.out_dir.mkdir(parents=True, exist_ok=True)
    scan_path = args.out_dir / "h_scan.csv"
    scan_path.write_text(h_scan_csv(rows, metadata))
    print(f"wrote {scan_path}")

    grid = threshold_grid(0.0, args.tmax, args.steps)
    points = roc_sweep(space, tests, level, grid)
    roc_meta = metadata + [
        ("thresholds", f"min=0.0 max={args.tmax!r} steps={args.steps}")
    ]
    roc_path = args.out_dir / "roc.csv"
    roc_path.write_text(roc_csv(points, roc_meta))
    print(f"wrote {roc_path}")

    best = min(points, key=lambda p: max(p.fn_rate, p.fp_rate))
    print(
        f"best operating point: t = {best.threshold:.4f} "
        f"(FN rate {best.fn_rate:.3f}, FP rate {best.fp_rate:.3f})"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
