import numpy as np
import pytest

from fluxlab.classify import (ArtifactError, DegenerateSignalError,
                              LSTMClassifier, Scaler, TrainConfig,
                              WindowConfig, baseline_normalize, evaluate,
                              export_model, gradient_check, load_dataset,
                              make_dataset, make_windows, predict_trace,
                              preload_model, rest_calibration, save_dataset,
                              train)
from fluxlab.classify.metrics import (StablePredictor, predict_window,
                                      report_from_confusion)
from fluxlab.classify.windows import window_array
from fluxlab.signal import GESTURE_LABELS, synthesize_gesture


@pytest.fixture(scope="module")
def tiny_dataset():
    """Small balanced set for fast training tests: 7 classes x 6 traces."""
    traces = []
    for li, label in enumerate(GESTURE_LABELS):
        for k in range(6):
            traces.append(synthesize_gesture(label, 0.11,
                                             seed=1000 + li * 17 + k,
                                             subject_id=k % 3))
    return traces


@pytest.fixture(scope="module")
def tiny_model(tiny_dataset):
    scaler = rest_calibration(0.11, seed=5)
    cfg = TrainConfig(epochs=30, seed=5, windows_per_trace=4)
    model, scaler, report, (tr, te) = train(tiny_dataset, cfg, scaler=scaler)
    return model, scaler, report, te


class TestWindows:
    def test_window_count_formula(self):
        trace = synthesize_gesture("Compression", 0.12, seed=0)
        scaler = rest_calibration(0.12, seed=0)
        wins = make_windows(trace, WindowConfig(), scaler)
        assert len(wins) == (500 - 100) // 5 + 1 == 81

    def test_non_overlapping_tiling(self):
        feats = np.arange(500, dtype=float).reshape(250, 2)
        wins = window_array(feats, WindowConfig(window_len=50, hop=50))
        assert len(wins) == 5
        assert np.all(wins[1][0] == feats[50])

    def test_too_short_trace(self):
        trace = synthesize_gesture("Resting", 0.12, seed=0, duration_ms=500)
        scaler = rest_calibration(0.12, seed=0)
        with pytest.raises(ValueError, match="shorter"):
            make_windows(trace, WindowConfig(), scaler)

    def test_default_hop_is_50ms(self):
        assert WindowConfig().hop_ms == pytest.approx(50.0)

    def test_features_zscored_and_finite(self):
        trace = synthesize_gesture("Bending", 0.12, seed=3)
        scaler = rest_calibration(0.12, seed=3)
        wins = make_windows(trace, WindowConfig(), scaler)
        assert np.all(np.isfinite(wins))
        # recompute the first window by hand from the scaler
        L = trace.inductances()[:100]
        x = (L - scaler.mean) / scaler.std
        assert np.allclose(wins[0, :, 0], x, atol=1e-9)


class TestBaselineNormalize:
    def test_rest_stream_zscore(self):
        trace = synthesize_gesture("Resting", 0.13, seed=6)
        scaler = baseline_normalize(trace.frames)
        z = scaler.apply(trace.inductances())
        assert abs(z.mean()) < 0.05
        assert z.std() == pytest.approx(1.0, abs=0.1)

    def test_constant_stream_rejected(self):
        from fluxlab.signal.frames import SignalFrame
        frames = [SignalFrame(tick=i * 10, channel=0, raw_code=40_000_000)
                  for i in range(500)]
        with pytest.raises(DegenerateSignalError):
            baseline_normalize(frames)

    def test_offset_shifts_mean_only(self):
        trace = synthesize_gesture("Resting", 0.13, seed=6)
        s0 = baseline_normalize(trace.frames)
        vals = trace.inductances() + 1.0
        s1 = Scaler(mean=float(vals.mean()), std=float(vals.std()))
        assert s1.mean == pytest.approx(s0.mean + 1.0, rel=1e-3)
        assert s1.std == pytest.approx(s0.std, rel=1e-2)


class TestGradients:
    def test_fresh_model_gradcheck(self, rng):
        model = LSTMClassifier(seed=2)
        X = rng.standard_normal((4, 25, 2))
        y = rng.integers(0, 7, 4)
        assert gradient_check(model, X, y, n_samples=200) < 1e-4

    def test_zero_input_finite(self):
        model = LSTMClassifier(seed=3)
        err = gradient_check(model, np.zeros((2, 10, 2)),
                             np.array([0, 4]), n_samples=60)
        assert np.isfinite(err) and err < 1e-4

    def test_l2_gradient_closed_form(self):
        model = LSTMClassifier(seed=4).astype(np.float64)
        lam = 0.37
        _, with_l2 = model.loss_and_grads(np.zeros((1, 5, 2)),
                                          np.array([0]), l2=lam)
        _, without = model.loss_and_grads(np.zeros((1, 5, 2)),
                                          np.array([0]), l2=0.0)
        for key in ("Wx", "Wh", "Wy"):
            assert np.allclose(with_l2[key] - without[key],
                               2 * lam * model.params[key], atol=1e-12)


class TestTraining:
    def test_loss_decreases(self, tiny_model):
        _, _, report, _ = tiny_model
        assert report.train_loss[-1] < report.train_loss[0]

    def test_seed_determinism_byte_exact(self, tiny_dataset):
        scaler = rest_calibration(0.11, seed=5)
        cfg = TrainConfig(epochs=4, seed=5, windows_per_trace=3)
        m1, _, _, _ = train(tiny_dataset, cfg, scaler=scaler)
        m2, _, _, _ = train(tiny_dataset, cfg, scaler=scaler)
        for key in m1.params:
            assert m1.params[key].tobytes() == m2.params[key].tobytes()

    def test_divergence_reported_with_epoch(self, tiny_dataset):
        # a learning rate past float32 range overflows the weights to inf
        from fluxlab.classify import TrainingDiverged
        scaler = rest_calibration(0.11, seed=5)
        cfg = TrainConfig(epochs=3, seed=5, learning_rate=1e30,
                          windows_per_trace=3)
        with pytest.raises(TrainingDiverged) as exc:
            train(tiny_dataset, cfg, scaler=scaler)
        assert exc.value.epoch >= 1

    def test_stratified_split_balanced(self, tiny_dataset):
        from fluxlab.classify.train import stratified_split
        rng = np.random.default_rng(0)
        tr, te = stratified_split(tiny_dataset, 0.2, rng)
        from collections import Counter
        counts = Counter(t.label for t in te)
        assert all(c == 1 for c in counts.values())  # 6 per class -> 1 test
        assert len(tr) + len(te) == len(tiny_dataset)


class TestPredict:
    def test_distribution_sums_to_one(self, tiny_model, rng):
        model, _, _, _ = tiny_model
        window = rng.standard_normal((100, 2)).astype(np.float32)
        label, conf, probs = predict_window(model, window)
        assert probs.sum() == pytest.approx(1.0, abs=1e-6)
        assert label in GESTURE_LABELS

    def test_uniform_logits_give_chance(self):
        model = LSTMClassifier(seed=0)
        model.params["Wy"][:] = 0
        model.params["by"][:] = 0
        _, conf, probs = predict_window(model, np.zeros((100, 2)))
        assert conf == pytest.approx(1.0 / 7.0, abs=1e-6)

    def test_rest_window_predicts_resting(self, tiny_model):
        model, scaler, _, _ = tiny_model
        trace = synthesize_gesture("Resting", 0.11, seed=777)
        k = predict_trace(model, trace, scaler)
        assert GESTURE_LABELS[k] == "Resting"

    def test_shape_mismatch(self, tiny_model):
        model, _, _, _ = tiny_model
        with pytest.raises(ValueError, match="features"):
            predict_window(model, np.zeros((100, 3)))

    def test_stable_predictor_votes(self, tiny_model):
        model, _, _, _ = tiny_model
        pred = StablePredictor(model, k=5)
        out = None
        for _ in range(5):
            out = pred.update(np.zeros((100, 2), dtype=np.float32))
        assert out["stable"] in GESTURE_LABELS
        assert len(out["distribution"]) == 7

    def test_dropout_expectation_matches_inference(self, tiny_model, rng):
        """Averaging many dropout passes approaches the no-dropout output."""
        model, _, _, _ = tiny_model
        X = rng.standard_normal((1, 100, 2)).astype(np.float32)
        clean = model.forward(X)[0]
        drng = np.random.default_rng(123)
        acc = np.zeros(7)
        n = 600
        h, _ = model._recurrence(X.astype(np.float32))
        for _ in range(n):
            mask = (drng.random(h.shape) >= 0.3) / 0.7
            hd = (h * mask).astype(np.float32)
            logits = hd @ model.params["Wy"] + model.params["by"]
            e = np.exp(logits - logits.max())
            acc += (e / e.sum())[0]
        assert np.abs(acc / n - clean).max() < 0.02


class TestEvaluate:
    def test_perfect_oracle_identity(self):
        confusion = np.eye(7, dtype=int) * 12
        report = report_from_confusion(confusion)
        assert report.macro_f1 == pytest.approx(1.0)
        assert all(v == 1.0 for v in report.per_class_accuracy.values())

    def test_empty_test_set(self, tiny_model):
        model, scaler, _, _ = tiny_model
        with pytest.raises(ValueError):
            evaluate(model, [], scaler)

    def test_label_shuffle_chance_level(self, tiny_dataset, rng):
        """Macro-F1 on label-shuffled data sits near 1/7."""
        from dataclasses import replace as dc_replace
        labels = [t.label for t in tiny_dataset]
        rng.shuffle(labels)
        shuffled = [
            synthesize_gesture(t.label, t.solidity, seed=t.seed,
                               subject_id=t.subject_id)
            for t in tiny_dataset
        ]
        # reassign labels without changing the signals
        shuffled = [type(t)(label=lbl, frames=t.frames, solidity=t.solidity,
                            subject_id=t.subject_id, seed=t.seed)
                    for t, lbl in zip(shuffled, labels)]
        scaler = rest_calibration(0.11, seed=5)
        cfg = TrainConfig(epochs=15, seed=5, windows_per_trace=3)
        model, scaler, _, (tr, te) = train(shuffled, cfg, scaler=scaler)
        rep = evaluate(model, te, scaler)
        assert 0.0 <= rep.macro_f1 <= 0.35  # chance is ~1/7


class TestArtifact:
    def test_export_preload_bit_exact(self, tiny_model, tmp_path, rng):
        model, scaler, _, _ = tiny_model
        outdir = tmp_path / "bundle"
        export_model(model, scaler, WindowConfig(), outdir)
        again, scaler2, wcfg, labels = preload_model(outdir)
        X = rng.standard_normal((100, 100, 2)).astype(np.float32)
        p1 = model.forward(X)
        p2 = again.forward(X)
        assert np.array_equal(p1.astype(np.float32), p2.astype(np.float32))
        assert labels == list(GESTURE_LABELS)
        assert scaler2.mean == pytest.approx(scaler.mean)

    def test_tampered_checksum_rejected(self, tiny_model, tmp_path):
        import json
        model, scaler, _, _ = tiny_model
        outdir = tmp_path / "bundle"
        export_model(model, scaler, WindowConfig(), outdir)
        doc = json.loads((outdir / "model.json").read_text())
        doc["checksum"] = "0" * 64
        (outdir / "model.json").write_text(json.dumps(doc))
        with pytest.raises(ArtifactError, match="checksum"):
            preload_model(outdir)

    def test_version_mismatch_rejected(self, tiny_model, tmp_path):
        import json
        model, scaler, _, _ = tiny_model
        outdir = tmp_path / "bundle"
        export_model(model, scaler, WindowConfig(), outdir)
        doc = json.loads((outdir / "model.json").read_text())
        doc["schema_version"] = 99
        (outdir / "model.json").write_text(json.dumps(doc))
        with pytest.raises(ArtifactError, match="version"):
            preload_model(outdir)

    def test_standalone_script_runs_clean(self, tiny_model, tmp_path):
        """The generated predictor classifies a trace without the package."""
        import json
        import subprocess
        import sys
        model, scaler, _, _ = tiny_model
        outdir = tmp_path / "bundle"
        export_model(model, scaler, WindowConfig(), outdir)
        trace = synthesize_gesture("Compression", 0.11, seed=99)
        from fluxlab.signal import trace_to_jsonl
        tpath = tmp_path / "t.jsonl"
        trace_to_jsonl(trace, tpath)
        proc = subprocess.run(
            [sys.executable, str(outdir / "predict.py"), str(tpath)],
            capture_output=True, text=True, cwd=tmp_path, timeout=120)
        assert proc.returncode == 0, proc.stderr
        out = json.loads(proc.stdout)
        assert out["label"] in GESTURE_LABELS


class TestDataset:
    def test_layout_roundtrip(self, tmp_path):
        traces = make_dataset(0.12, per_class=6, seed=3)
        root = save_dataset(traces, tmp_path / "data")
        level_dir = root / "0.12"
        assert sorted(p.name for p in level_dir.iterdir()) == \
            sorted(GESTURE_LABELS)
        again = load_dataset(root, 0.12)
        assert len(again) == len(traces) == 42

    def test_balanced_and_subject_structure(self):
        traces = make_dataset(0.11, per_class=12, seed=1)
        from collections import Counter
        by_label = Counter(t.label for t in traces)
        assert all(v == 12 for v in by_label.values())
        subjects = {t.subject_id for t in traces}
        assert subjects == set(range(6))
