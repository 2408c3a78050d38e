import numpy as np
import pytest

from eigenprint import (
    NOISE_LEVEL_NAMES,
    NOISE_LEVELS,
    EdgeConfig,
    FingerprintDatabase,
    GrayImage,
    ImageLabel,
    NoiseSpec,
    Verdict,
    confusion_counts,
    csv_metadata,
    h_scan,
    h_scan_csv,
    make_noise_level,
    roc_csv,
    roc_sweep,
    split_database,
    theta_l,
    threshold_grid,
    train,
)


def make_labeled_db(rng, fingers=4, impressions=2, height=6, width=6):
    """Distinct blocky pattern per finger, jittered per impression."""
    n = height * width
    cols, labels = [], []
    for f in range(1, fingers + 1):
        base = rng.uniform(0.1, 0.9, n)
        for k in range(1, impressions + 1):
            jitter = rng.uniform(-0.05, 0.05, n)
            cols.append(np.clip(base + jitter, 0, 1))
            labels.append(
                ImageLabel(finger=f, impression=k, path=f"{f}_{k}.tif", parsed=True)
            )
    data = np.stack(cols, axis=1)
    return FingerprintDatabase(data, labels, height, width)


class TestNoiseLevels:
    def test_table(self):
        assert NOISE_LEVELS == {
            "none": (0.0, 0.0),
            "low": (0.0, 0.001),
            "medium": (0.0, 0.01),
            "high": (0.01, 0.1),
        }
        assert NOISE_LEVEL_NAMES == ("none", "low", "medium", "high")

    @pytest.mark.parametrize("name", NOISE_LEVEL_NAMES)
    def test_make_noise_level(self, name):
        level = make_noise_level(name, seed=9)
        mean, variance = NOISE_LEVELS[name]
        assert level.name == name
        assert level.spec == NoiseSpec(mean=mean, variance=variance, seed=9)

    def test_override(self):
        level = make_noise_level("medium", seed=3, override=(0.02, 0.05))
        assert level.spec == NoiseSpec(mean=0.02, variance=0.05, seed=3)
        assert level.name == "medium"

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            make_noise_level("extreme")


class TestSplitDatabase:
    def test_half_fingers_4x2(self, rng):
        db = make_labeled_db(rng, fingers=4, impressions=2)
        train_db, tests = split_database(db)
        assert train_db.size == 4
        assert sorted({lab.finger for lab in train_db.labels}) == [1, 2]
        assert len(tests.entries) == 8
        assert tests.policy == "half-fingers"
        truths = [e.truth for e in tests.entries]
        assert truths == [Verdict.IN_BASE] * 4 + [Verdict.OUT_OF_BASE] * 4

    def test_original_order_and_payload(self, rng):
        db = make_labeled_db(rng, fingers=4, impressions=2)
        _, tests = split_database(db)
        for m, entry in enumerate(tests.entries):
            assert entry.path == db.labels[m].path
            assert entry.finger == db.labels[m].finger
            assert np.array_equal(entry.values, db.data[:, m])

    def test_odd_finger_count_floors(self, rng):
        db = make_labeled_db(rng, fingers=5, impressions=2)
        train_db, tests = split_database(db)
        assert sorted({lab.finger for lab in train_db.labels}) == [1, 2]
        n_in = sum(e.truth is Verdict.IN_BASE for e in tests.entries)
        assert (n_in, len(tests.entries) - n_in) == (4, 6)

    def test_larger_split(self, rng):
        db = make_labeled_db(rng, fingers=10, impressions=8, height=4, width=4)
        train_db, tests = split_database(db)
        assert train_db.size == 40
        assert len(tests.entries) == 80

    def test_unlabeled_rejected(self, rng):
        data = rng.uniform(0, 1, (12, 3))
        labels = [
            ImageLabel(finger=None, impression=None, path=f"img{i}.tif", parsed=False)
            for i in range(3)
        ]
        db = FingerprintDatabase(data, labels, 3, 4)
        with pytest.raises(ValueError, match="unlabeled"):
            split_database(db)

    def test_single_finger_rejected(self, rng):
        db = make_labeled_db(rng, fingers=1, impressions=4)
        with pytest.raises(ValueError, match="two distinct fingers"):
            split_database(db)

    def test_single_impression_pair_rejected(self, rng):
        # two fingers, one impression each: the training half would hold a
        # single image, which the database type itself refuses
        db = make_labeled_db(rng, fingers=2, impressions=1)
        with pytest.raises(ValueError):
            split_database(db)

    def test_unknown_policy(self, rng):
        db = make_labeled_db(rng)
        with pytest.raises(ValueError, match="policy"):
            split_database(db, policy="odd-even")


def trained_split(rng, **kwargs):
    db = make_labeled_db(rng, **kwargs)
    train_db, tests = split_database(db)
    space = train(train_db, EdgeConfig())
    return space, tests


class TestHScan:
    def test_noiseless_training_probes_h_zero(self, rng):
        space, tests = trained_split(rng)
        rows = h_scan(space, tests, make_noise_level("none"))
        for row, entry in zip(rows, tests.entries, strict=True):
            if entry.truth is Verdict.IN_BASE:
                assert row.h == 0.0

    def test_row_bookkeeping(self, rng):
        space, tests = trained_split(rng)
        rows = h_scan(space, tests, make_noise_level("none"))
        assert [r.index for r in rows] == list(range(len(tests.entries)))
        assert [r.path for r in rows] == [e.path for e in tests.entries]
        assert [r.truth for r in rows] == [e.truth for e in tests.entries]
        assert all(r.h >= 0 for r in rows)

    def test_deterministic(self, rng):
        space, tests = trained_split(rng)
        level = make_noise_level("medium", seed=11)
        r1 = h_scan(space, tests, level)
        r2 = h_scan(space, tests, make_noise_level("medium", seed=11))
        assert [(r.h, r.path) for r in r1] == [(r.h, r.path) for r in r2]

    def test_per_probe_seeds_differ(self, rng):
        # duplicate probe images at different indices draw different noise
        db = make_labeled_db(rng, fingers=2, impressions=2)
        dup = FingerprintDatabase(
            np.stack([db.data[:, 0]] * 4, axis=1), db.labels, db.height, db.width
        )
        _, tests = split_database(dup)
        space = train(
            FingerprintDatabase(db.data[:, :2], db.labels[:2], db.height, db.width),
            EdgeConfig(),
        )
        rows = h_scan(space, tests, make_noise_level("medium", seed=5))
        hs = [r.h for r in rows]
        assert len(set(hs)) > 1

    def test_seed_changes_values(self, rng):
        space, tests = trained_split(rng)
        r1 = h_scan(space, tests, make_noise_level("medium", seed=1))
        r2 = h_scan(space, tests, make_noise_level("medium", seed=2))
        assert [r.h for r in r1] != [r.h for r in r2]


class TestConfusionCounts:
    def test_all_correct(self):
        pairs = [(Verdict.IN_BASE, Verdict.IN_BASE)] * 3 + [
            (Verdict.OUT_OF_BASE, Verdict.OUT_OF_BASE)
        ] * 2
        assert confusion_counts(pairs) == (0, 0, 3, 2)

    def test_all_inverted(self):
        pairs = [(Verdict.OUT_OF_BASE, Verdict.IN_BASE)] * 3 + [
            (Verdict.IN_BASE, Verdict.OUT_OF_BASE)
        ] * 2
        assert confusion_counts(pairs) == (2, 3, 0, 0)

    def test_hand_tally(self):
        I, O = Verdict.IN_BASE, Verdict.OUT_OF_BASE
        pairs = [(I, I), (O, I), (I, O), (O, O), (I, I), (I, O)]
        # verdict,truth: TP, FN, FP, TN, TP, FP
        assert confusion_counts(pairs) == (2, 1, 2, 1)

    def test_inconclusive_rejected(self):
        with pytest.raises(ValueError):
            confusion_counts([(Verdict.INCONCLUSIVE, Verdict.IN_BASE)])
        with pytest.raises(ValueError):
            confusion_counts([(Verdict.IN_BASE, Verdict.INCONCLUSIVE)])


class TestThresholdGrid:
    def test_three_point_grid(self):
        assert np.array_equal(threshold_grid(0.0, 1.0, 3), [0.0, 0.5, 1.0])

    def test_default_grid(self):
        grid = threshold_grid()
        assert grid.size == 101 and grid[0] == 0.0 and grid[-1] == 1.0

    def test_single_step(self):
        assert np.array_equal(threshold_grid(0.3, 0.9, 1), [0.3])

    def test_validation(self):
        with pytest.raises(ValueError):
            threshold_grid(steps=0)
        with pytest.raises(ValueError):
            threshold_grid(1.0, 0.5, 5)


class TestRocSweep:
    def run_sweep(self, rng, level_name="none", steps=21, seed=0):
        space, tests = trained_split(rng, fingers=4, impressions=3)
        rows = h_scan(space, tests, make_noise_level(level_name, seed=seed))
        hmax = max(r.h for r in rows)
        grid = threshold_grid(0.0, hmax + 0.5, steps)
        points = roc_sweep(space, tests, make_noise_level(level_name, seed=seed), grid)
        return rows, points

    def test_partition(self, rng):
        rows, points = self.run_sweep(rng)
        total = len(rows)
        for p in points:
            assert p.fp + p.fn + p.tp + p.tn == total

    def test_monotone_rates(self, rng):
        _, points = self.run_sweep(rng)
        fps = [p.fp_rate for p in points]
        fns = [p.fn_rate for p in points]
        assert all(a <= b + 1e-15 for a, b in zip(fps, fps[1:], strict=False))
        assert all(a >= b - 1e-15 for a, b in zip(fns, fns[1:], strict=False))

    def test_endpoints(self, rng):
        # noiseless: training probes sit at h = 0 exactly, so even t = 0
        # accepts them all -> fn = 0 at the top end once t >= max h, and
        # fp = 0 requires t below the smallest out-of-base h
        rows, points = self.run_sweep(rng)
        out_min = min(r.h for r in rows if r.truth is Verdict.OUT_OF_BASE)
        assert out_min > 0
        assert points[-1].fn_rate == 0.0 and points[-1].fp_rate == 1.0
        low = [p for p in points if p.threshold < out_min]
        assert low and all(p.fp_rate == 0.0 for p in low)

    def test_noiseless_perfect_midpoint(self, rng):
        rows, points = self.run_sweep(rng)
        in_max = max(r.h for r in rows if r.truth is Verdict.IN_BASE)
        out_min = min(r.h for r in rows if r.truth is Verdict.OUT_OF_BASE)
        assert in_max < out_min  # separable construction
        mid = 0.5 * (in_max + out_min)
        pts = roc_sweep(
            *self._space_tests(rng), make_noise_level("none"), [mid]
        )
        assert (pts[0].fn, pts[0].fp) == (0, 0)

    def _space_tests(self, rng_unused=None):
        rng2 = np.random.default_rng(20240817)
        space, tests = trained_split(rng2, fingers=4, impressions=3)
        return space, tests

    def test_reuse_consistency_with_h_scan(self, rng):
        space, tests = trained_split(rng, fingers=4, impressions=3)
        level = make_noise_level("medium", seed=7)
        rows = h_scan(space, tests, level)
        grid = threshold_grid(0.0, max(r.h for r in rows) + 0.5, 9)
        points = roc_sweep(space, tests, make_noise_level("medium", seed=7), grid)
        for p in points:
            pairs = [
                (
                    Verdict.IN_BASE if r.h <= p.threshold else Verdict.OUT_OF_BASE,
                    r.truth,
                )
                for r in rows
            ]
            assert confusion_counts(pairs) == (p.fp, p.fn, p.tp, p.tn)

    def test_rate_denominators(self, rng):
        rows, points = self.run_sweep(rng, steps=7)
        n_in = sum(r.truth is Verdict.IN_BASE for r in rows)
        n_out = len(rows) - n_in
        for p in points:
            assert p.fn + p.tp == n_in
            assert p.fp + p.tn == n_out
            assert p.fn_rate == pytest.approx(p.fn / n_in)
            assert p.fp_rate == pytest.approx(p.fp / n_out)

    def test_single_class_rejected(self, rng):
        space, tests = trained_split(rng)
        only_in = type(tests)(
            [e for e in tests.entries if e.truth is Verdict.IN_BASE],
            tests.height,
            tests.width,
            tests.policy,
        )
        with pytest.raises(ValueError, match="both"):
            roc_sweep(space, only_in, make_noise_level("none"), [0.5])

    def test_descending_grid_rejected(self, rng):
        space, tests = trained_split(rng)
        with pytest.raises(ValueError, match="ascending"):
            roc_sweep(space, tests, make_noise_level("none"), [1.0, 0.5])

    def test_empty_grid_rejected(self, rng):
        space, tests = trained_split(rng)
        with pytest.raises(ValueError, match="empty"):
            roc_sweep(space, tests, make_noise_level("none"), [])


class TestCsvRendering:
    def metadata(self):
        return csv_metadata(
            tool_version="0.1.0",
            database_id="unit-db",
            split_policy="half-fingers",
            edge_cfg=EdgeConfig(),
            level=make_noise_level("medium", seed=4),
        )

    def test_metadata_order_and_content(self):
        meta = self.metadata()
        assert [k for k, _ in meta] == [
            "tool",
            "database",
            "split",
            "edges",
            "noise-level",
            "noise",
            "seed",
            "generator",
        ]
        d = dict(meta)
        assert d["tool"] == "eigenprint 0.1.0"
        assert d["noise-level"] == "medium"
        assert d["noise"] == "mean=0.0 variance=0.01"
        assert d["seed"] == "4"
        assert d["generator"] == "numpy-pcg64"

    def test_h_scan_csv_layout(self, rng):
        space, tests = trained_split(rng)
        rows = h_scan(space, tests, make_noise_level("none"))
        text = h_scan_csv(rows, self.metadata())
        lines = text.split("\n")
        assert text.endswith("\n")
        n_meta = 8
        assert all(lines[i].startswith("# ") for i in range(n_meta))
        assert lines[n_meta] == "index,truth,h,path"
        first = lines[n_meta + 1].split(",")
        assert first[0] == "0"
        assert first[1] in ("InBase", "OutOfBase")
        assert float(first[2]) == rows[0].h
        assert first[3] == rows[0].path
        assert len(lines) == n_meta + 1 + len(rows) + 1  # trailing newline

    def test_h_float_repr_roundtrip(self, rng):
        space, tests = trained_split(rng)
        rows = h_scan(space, tests, make_noise_level("medium", seed=2))
        text = h_scan_csv(rows, self.metadata())
        data = text.strip().split("\n")[9:]
        for line, row in zip(data, rows, strict=True):
            h_text = line.split(",")[2]
            assert float(h_text) == row.h  # repr round-trips exactly

    def test_roc_csv_layout(self, rng):
        space, tests = trained_split(rng, fingers=4, impressions=3)
        points = roc_sweep(
            space, tests, make_noise_level("none"), threshold_grid(0.0, 1.0, 3)
        )
        text = roc_csv(points, self.metadata())
        lines = text.split("\n")
        assert lines[8] == "threshold,fn_rate,fp_rate,fp,fn,tp,tn"
        assert len(lines) == 8 + 1 + len(points) + 1
        cells = lines[9].split(",")
        assert float(cells[0]) == points[0].threshold
        assert [int(c) for c in cells[3:]] == [
            points[0].fp,
            points[0].fn,
            points[0].tp,
            points[0].tn,
        ]

    def test_byte_determinism(self, rng):
        seed_db = np.random.default_rng(42)
        space, tests = trained_split(seed_db)
        rows = h_scan(space, tests, make_noise_level("medium", seed=6))
        a = h_scan_csv(rows, self.metadata())
        seed_db2 = np.random.default_rng(42)
        space2, tests2 = trained_split(seed_db2)
        rows2 = h_scan(space2, tests2, make_noise_level("medium", seed=6))
        b = h_scan_csv(rows2, self.metadata())
        assert a.encode() == b.encode()

    def test_theta_consistency_note(self, rng):
        # the split keeps training columns verbatim, so theta_l over the
        # trained omega is finite and positive for distinct fingers
        space, _ = trained_split(rng)
        assert theta_l(space.omega) > 0
