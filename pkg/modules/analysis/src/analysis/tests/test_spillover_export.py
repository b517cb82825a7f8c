"""Tests for the category-removal experiment and heatmap export."""

import csv
import math

import numpy as np
import pytest
from evaluation import Split, make_splits
from parsrec import ModelConfig, ParsRecModel, init_model
from synth import Dataset, Session
from training import TrainConfig, fit, training_sessions

from analysis import (
    SPILLOVER_HEADER,
    AnalysisConfigError,
    TrainingObserver,
    collect_attention,
    export_heatmap,
    render_image,
    spillover_experiment,
    write_spillover_csv,
)


def _dataset(n_users: int = 40, n_items: int = 12, sessions: int = 4, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    out = []
    for u in range(n_users):
        for t in range(1, sessions + 1):
            size = int(rng.integers(2, 4))
            out.append(Session(u, t, tuple(rng.choice(n_items, size=size, replace=False).tolist())))
    return Dataset(
        sessions=out,
        item_category=np.arange(n_items) % 3,
        user_group=np.arange(n_users) % 2,
        group_sigma=np.stack([np.eye(3), np.eye(3)]),
    )


def _model(ds: Dataset, seed: int = 0) -> ParsRecModel:
    config = ModelConfig(n_items=ds.n_items, d_u=4, d_v=4)
    return init_model(config, ds.n_users, np.random.default_rng(seed))


class TestSpillover:
    def _run(self, ds: Dataset, **kwargs):
        return spillover_experiment(
            _model(ds), make_splits(ds), ds.item_category, ds.user_group, progress=False, **kwargs
        )

    def test_removed_category_never_predicted(self):
        ds = _dataset()
        report = self._run(ds, removed_category=0, top_k=3)
        assert report.sessions
        for g in report.sessions:
            row = report.row(g, 0)
            assert row.predicted == 0.0
            assert row.actual == 0
            assert math.isnan(row.mape)

    def test_predicted_mass_matches_basket_sizes(self):
        ds = _dataset()
        splits = make_splits(ds)
        report = self._run(ds, removed_category=1, top_k=3)
        removed = ds.item_category == 1
        kept = [c for c in splits.cases(Split.TEST) if not removed[c.basket].any()]
        for g, n in report.sessions.items():
            in_group = [c for c in kept if ds.user_group[c.user] == g]
            assert n == len(in_group)
            steps = sum(len(c.basket) for c in in_group)
            predicted = sum(report.row(g, c).predicted for c in range(3))
            actual = sum(report.row(g, c).actual for c in range(3))
            assert predicted == pytest.approx(steps)
            assert actual == steps

    def test_mape_definition(self):
        report = self._run(_dataset(), removed_category=2, top_k=2)
        for r in report.rows:
            if r.actual:
                assert r.mape == pytest.approx(abs(r.predicted - r.actual) / r.actual)
                assert r.mape >= 0

    def test_baseline_covers_all_test_baskets(self):
        ds = _dataset()
        report = self._run(ds, removed_category=0, top_k=3)
        assert sum(report.baseline_sessions.values()) == len(make_splits(ds).cases(Split.TEST))

    def test_deterministic(self):
        ds = _dataset()
        a = self._run(ds, seed=4)
        b = self._run(ds, seed=4)
        assert [r.predicted for r in a.rows] == [r.predicted for r in b.rows]

    def test_bad_category(self):
        with pytest.raises(AnalysisConfigError):
            self._run(_dataset(), removed_category=3)

    def test_csv(self, tmp_path):
        report = self._run(_dataset(), removed_category=0, top_k=3)
        path = tmp_path / "spillover.csv"
        write_spillover_csv(report, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == SPILLOVER_HEADER
        assert len(rows) == 1 + len(report.rows)
        assert rows[1][4] == ""  # category 0 MAPE is undefined


class TestCollectAttention:
    def test_seeded_and_limited_to_training_users(self):
        ds = _dataset(n_users=8)
        sessions = training_sessions(make_splits(ds))
        a = collect_attention(_model(ds), sessions, ds.item_category, seed=1, progress=False)
        b = collect_attention(_model(ds), sessions, ds.item_category, seed=1, progress=False)
        assert a.users == b.users
        assert set(a.users) <= {s.user for s in sessions}
        for user in a.users:
            np.testing.assert_array_equal(a.matrix(user), b.matrix(user))

    def test_training_observer(self):
        ds = _dataset(n_users=8)
        observer = TrainingObserver(ds.n_items, ds.item_category)
        fit(
            _model(ds),
            make_splits(ds),
            TrainConfig(max_epochs=1, batch_size=4),
            progress=False,
            on_unroll=observer,
        )
        assert observer.atlas.users
        assert sum(observer.atlas.visits.values()) > 0


class TestExport:
    def test_grayscale_layout(self, tmp_path):
        matrix = np.array([[0.01, 1.0], [0.5, 0.0]])
        csv_path, image_path = export_heatmap(
            matrix, ["C0", "C1"], tmp_path / "heat", threshold=0.05, cell_pixels=2
        )
        assert image_path.suffix == ".pgm"
        raw = image_path.read_bytes()
        header = b"P5\n4 4\n255\n"
        assert raw.startswith(header)
        pixels = np.frombuffer(raw[len(header) :], dtype=np.uint8).reshape(4, 4)
        assert pixels[0, 0] == 255  # filtered to white
        assert pixels[0, 2] == 0  # the maximum is black
        assert pixels[2, 0] == 128
        with open(csv_path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["", "C0", "C1"]
        assert rows[1] == ["C0", "0.010000", "1.000000"]

    def test_signed_matrix_is_color(self):
        raw = render_image(np.array([[0.5, -0.5], [0.0, 1.0]]), cell_pixels=1)
        assert raw.startswith(b"P6\n2 2\n255\n")
        pixels = np.frombuffer(raw[len(b"P6\n2 2\n255\n") :], dtype=np.uint8).reshape(2, 2, 3)
        assert pixels[1, 1].tolist() == [255, 0, 0]
        assert pixels[1, 0].tolist() == [255, 255, 255]
        assert pixels[0, 1].tolist() == [128, 128, 255]

    def test_byte_identical(self, tmp_path):
        matrix = np.random.default_rng(0).random((5, 5))
        labels = [f"C{c}" for c in range(5)]
        a = export_heatmap(matrix, labels, tmp_path / "a")
        b = export_heatmap(matrix, labels, tmp_path / "b")
        for x, y in zip(a, b, strict=True):
            assert x.read_bytes() == y.read_bytes()

    def test_label_mismatch(self, tmp_path):
        with pytest.raises(AnalysisConfigError):
            export_heatmap(np.zeros((2, 2)), ["C0"], tmp_path / "x")
