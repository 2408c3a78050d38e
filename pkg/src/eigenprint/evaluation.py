"""Threshold calibration and ROC evaluation over labeled test sets.

The calibration flow: split a labeled database into an enrolled half and a
held-out half, scan h over every image, then sweep a threshold grid counting
false positives and false negatives at each point. All randomness is seeded
per probe so outputs are byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import DecisionConfig, Verdict, verify
from .edges import EdgeConfig
from .eigenspace import EigenSpace
from .imaging import GENERATOR_NAME, FingerprintDatabase, NoiseSpec, image_from_vector

__all__ = [
    "NOISE_LEVEL_NAMES",
    "NOISE_LEVELS",
    "NoiseLevel",
    "TestEntry",
    "LabeledTestSet",
    "HScanRow",
    "RocPoint",
    "make_noise_level",
    "split_database",
    "h_scan",
    "confusion_counts",
    "threshold_grid",
    "roc_sweep",
    "csv_metadata",
    "h_scan_csv",
    "roc_csv",
]

# Default (mean, variance) behind each named noise level. The mapping is
# configurable per run; whatever pair was actually used is recorded in the
# output metadata.
NOISE_LEVELS: dict[str, tuple[float, float]] = {
    "none": (0.0, 0.0),
    "low": (0.0, 0.001),
    "medium": (0.0, 0.01),
    "high": (0.01, 0.1),
}
NOISE_LEVEL_NAMES = tuple(NOISE_LEVELS)


@dataclass
class NoiseLevel:
    """A named noise setting: the label plus the concrete spec used."""

    name: str
    spec: NoiseSpec

    def __post_init__(self):
        if self.name not in NOISE_LEVEL_NAMES:
            raise ValueError(f"unknown noise level {self.name!r}")


def make_noise_level(
    name: str,
    seed: int = 0,
    override: tuple[float, float] | None = None,
) -> NoiseLevel:
    """Resolve a level name to a NoiseLevel, optionally overriding (mean, variance)."""
    if name not in NOISE_LEVELS:
        raise ValueError(f"unknown noise level {name!r}")
    mean, variance = override if override is not None else NOISE_LEVELS[name]
    return NoiseLevel(name, NoiseSpec(mean=mean, variance=variance, seed=seed))


@dataclass
class TestEntry:
    """One probe: its pixels, ground truth, and provenance."""

    path: str
    truth: Verdict
    finger: int | None
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.truth not in (Verdict.IN_BASE, Verdict.OUT_OF_BASE):
            raise ValueError("ground truth must be InBase or OutOfBase")


@dataclass
class LabeledTestSet:
    """Ordered probes with ground truth, carrying the split policy used."""

    entries: list[TestEntry]
    height: int
    width: int
    policy: str

    def image(self, i: int):
        entry = self.entries[i]
        return image_from_vector(entry.values, self.height, self.width)


@dataclass
class HScanRow:
    """h for one probe, in scan order."""

    index: int
    truth: Verdict
    h: float
    path: str

    def __post_init__(self):
        if self.h < 0:
            raise ValueError("h must be non-negative")


@dataclass
class RocPoint:
    """Error rates and raw counts at one threshold."""

    threshold: float
    fn_rate: float
    fp_rate: float
    fp: int
    fn: int
    tp: int
    tn: int


def split_database(
    db: FingerprintDatabase, policy: str = "half-fingers"
) -> tuple[FingerprintDatabase, LabeledTestSet]:
    """Split a labeled database into an enrolled half and a full test set.

    half-fingers: fingers sorted ascending; the first half of the fingers
    (all their impressions) form the training database. Every image of the
    original database becomes a test entry in original column order, labeled
    InBase when its finger was enrolled and OutOfBase otherwise.
    """
    if policy != "half-fingers":
        raise ValueError(f"unknown split policy {policy!r}")
    if any(lab.finger is None for lab in db.labels):
        raise ValueError("database has unlabeled columns; cannot split by finger")
    fingers = sorted({lab.finger for lab in db.labels})
    if len(fingers) < 2:
        raise ValueError("need at least two distinct fingers to split")
    enrolled = set(fingers[: len(fingers) // 2])

    train_cols = [m for m, lab in enumerate(db.labels) if lab.finger in enrolled]
    train = FingerprintDatabase(
        db.data[:, train_cols].copy(),
        [db.labels[m] for m in train_cols],
        db.height,
        db.width,
    )
    entries = [
        TestEntry(
            path=lab.path,
            truth=Verdict.IN_BASE if lab.finger in enrolled else Verdict.OUT_OF_BASE,
            finger=lab.finger,
            values=db.data[:, m].copy(),
        )
        for m, lab in enumerate(db.labels)
    ]
    return train, LabeledTestSet(entries, db.height, db.width, policy)


def _probe_spec(level: NoiseLevel, index: int) -> NoiseSpec:
    """Per-probe noise spec: the level's spec with seed offset by probe index."""
    return NoiseSpec(
        mean=level.spec.mean,
        variance=level.spec.variance,
        seed=(int(level.spec.seed) + index) % 2**64,
    )


def h_scan(space: EigenSpace, tests: LabeledTestSet, noise: NoiseLevel) -> list[HScanRow]:
    """Compute h for every test entry, in order, one seeded noise draw each."""
    rows = []
    for i, entry in enumerate(tests.entries):
        report = verify(
            space,
            tests.image(i),
            cfg=DecisionConfig(),
            noise=_probe_spec(noise, i),
            source_path=entry.path,
        )
        rows.append(HScanRow(index=i, truth=entry.truth, h=report.h, path=entry.path))
    return rows


def confusion_counts(rows) -> tuple[int, int, int, int]:
    """Tally (FP, FN, TP, TN) from (verdict, truth) pairs.

    A false positive is an OutOfBase truth judged InBase; a false negative is
    an InBase truth judged OutOfBase. Inconclusive is not allowed here: the
    counting is strictly binary.
    """
    fp = fn = tp = tn = 0
    for verdict, truth in rows:
        if verdict is Verdict.INCONCLUSIVE or truth is Verdict.INCONCLUSIVE:
            raise ValueError("confusion counting requires binary verdicts")
        if truth is Verdict.IN_BASE:
            if verdict is Verdict.IN_BASE:
                tp += 1
            else:
                fn += 1
        else:
            if verdict is Verdict.IN_BASE:
                fp += 1
            else:
                tn += 1
    return fp, fn, tp, tn


def threshold_grid(tmin: float = 0.0, tmax: float = 1.0, steps: int = 101) -> np.ndarray:
    """Evenly spaced ascending thresholds from tmin to tmax inclusive."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if tmax < tmin:
        raise ValueError("tmax must be >= tmin")
    return np.linspace(tmin, tmax, steps)


def roc_sweep(
    space: EigenSpace,
    tests: LabeledTestSet,
    noise: NoiseLevel,
    thresholds,
) -> list[RocPoint]:
    """One RocPoint per threshold, from a single h pass over the test set.

    h (and its noise draw) is computed once per probe and reused across the
    whole grid; at each threshold t the binary rule is InBase iff h <= t.
    """
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if thresholds.size == 0:
        raise ValueError("threshold grid is empty")
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be ascending")
    truths = {e.truth for e in tests.entries}
    if truths != {Verdict.IN_BASE, Verdict.OUT_OF_BASE}:
        raise ValueError("ROC needs test entries of both ground-truth classes")

    rows = h_scan(space, tests, noise)
    points = []
    for t in thresholds:
        pairs = [
            (Verdict.IN_BASE if row.h <= t else Verdict.OUT_OF_BASE, row.truth)
            for row in rows
        ]
        fp, fn, tp, tn = confusion_counts(pairs)
        points.append(
            RocPoint(
                threshold=float(t),
                fn_rate=fn / (fn + tp),
                fp_rate=fp / (fp + tn),
                fp=fp,
                fn=fn,
                tp=tp,
                tn=tn,
            )
        )
    return points


def csv_metadata(
    tool_version: str,
    database_id: str,
    split_policy: str,
    edge_cfg: EdgeConfig,
    level: NoiseLevel,
) -> list[tuple[str, str]]:
    """Standard ordered metadata pairs recorded at the top of every CSV."""
    return [
        ("tool", f"eigenprint {tool_version}"),
        ("database", database_id),
        ("split", split_policy),
        (
            "edges",
            f"method={edge_cfg.method}"
            f" sigma={edge_cfg.canny_sigma!r}"
            f" high_percentile={edge_cfg.canny_high_percentile!r}"
            f" low_ratio={edge_cfg.canny_low_ratio!r}"
            f" sobel_factor={edge_cfg.sobel_threshold_factor!r}",
        ),
        ("noise-level", level.name),
        ("noise", f"mean={float(level.spec.mean)!r} variance={float(level.spec.variance)!r}"),
        ("seed", str(int(level.spec.seed))),
        ("generator", GENERATOR_NAME),
    ]


def _render_csv(metadata, header: str, data_lines) -> str:
    lines = [f"# {key}: {value}" for key, value in metadata]
    lines.append(header)
    lines.extend(data_lines)
    return "\n".join(lines) + "\n"


def h_scan_csv(rows, metadata) -> str:
    """Render h-scan rows as CSV text; floats use repr for byte determinism."""
    return _render_csv(
        metadata,
        "index,truth,h,path",
        (f"{r.index},{r.truth.value},{r.h!r},{r.path}" for r in rows),
    )


def roc_csv(points, metadata) -> str:
    """Render ROC points as CSV text; floats use repr for byte determinism."""
    return _render_csv(
        metadata,
        "threshold,fn_rate,fp_rate,fp,fn,tp,tn",
        (
            f"{p.threshold!r},{p.fn_rate!r},{p.fp_rate!r},{p.fp},{p.fn},{p.tp},{p.tn}"
            for p in points
        ),
    )
