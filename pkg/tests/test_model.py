import numpy as np
import pytest

from warntriage.core import CLASS_ORDER, ContractViolation, Warning, WarningType, WeakLabelClass
from warntriage.encoding import EmbeddingVector
from warntriage.model import (
    ModelFormatError,
    ModelParams,
    Stage,
    TrainingConfig,
    TrainingError,
    detector_forward,
    detector_forward_batch,
    detector_gradients,
    detector_loss,
    init_detector_params,
    init_full_params,
    load_model,
    model_from_json,
    model_to_json,
    rank,
    rank_score,
    reranker_forward,
    reranker_gradients,
    reranker_loss,
    save_model,
    train_detector,
    train_reranker,
    warm_start_reranker,
)


def unit_vec(dim, idx):
    v = np.zeros(dim)
    v[idx] = 1.0
    return EmbeddingVector(v)


def zero_params(dim=8, hidden=4, stage=Stage.DETECTOR_ONLY):
    return ModelParams(
        embed_dim=dim,
        hidden_dim=hidden,
        seed=0,
        stage=stage,
        w1=np.zeros((hidden, dim)),
        b1=np.zeros(hidden),
        w_det=np.zeros(hidden),
        b_det=0.0,
        w_rr=np.zeros((4, hidden)) if stage is Stage.FULL else None,
        b_rr=np.zeros(4) if stage is Stage.FULL else None,
    )


class TestDetectorForward:
    def test_all_zero_weights_give_half(self):
        params = zero_params()
        for idx in range(8):
            assert detector_forward(params, unit_vec(8, idx)) == 0.5

    def test_large_positive_bias_pushes_toward_one(self):
        probs = []
        for bias in (0.0, 2.0, 10.0, 50.0):
            params = zero_params()
            params.b_det = bias
            probs.append(detector_forward(params, unit_vec(8, 0)))
        assert probs == sorted(probs)
        assert probs[-1] > 0.999999

    def test_fixed_seed_snapshot(self):
        # frozen after the first correct run; guards cross-run reproducibility
        params = init_detector_params(16, 8, seed=7)
        vec = np.arange(1.0, 17.0)
        vec /= np.linalg.norm(vec)
        p = detector_forward(params, EmbeddingVector(vec))
        assert p.hex() == "0x1.003cd4586a513p-1"

    def test_dimension_mismatch_rejected(self):
        params = zero_params(dim=8)
        with pytest.raises(ContractViolation):
            detector_forward(params, unit_vec(6, 0))


def _fd_max_rel_error(loss_fn, grad_fn, params, X, y, w, fields, h=1e-5):
    grads = grad_fn(params, X, y, w)
    worst = 0.0

    def rel(a, b):
        return abs(a - b) / max(abs(a), abs(b), 1e-6)

    for name in fields:
        if name == "b_det":
            orig = params.b_det
            params.b_det = orig + h
            lp = loss_fn(params, X, y, w)
            params.b_det = orig - h
            lm = loss_fn(params, X, y, w)
            params.b_det = orig
            worst = max(worst, rel(float(grads[name]), (lp - lm) / (2 * h)))
            continue
        arr = getattr(params, name)
        flat = arr.ravel()
        gflat = np.asarray(grads[name]).ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp = loss_fn(params, X, y, w)
            flat[i] = orig - h
            lm = loss_fn(params, X, y, w)
            flat[i] = orig
            worst = max(worst, rel(gflat[i], (lp - lm) / (2 * h)))
    return worst


def random_point(rng, dim=10, hidden=5, stage=Stage.DETECTOR_ONLY):
    params = zero_params(dim, hidden, stage)
    params.w1 = rng.normal(0, 0.6, (hidden, dim))
    params.b1 = rng.normal(0, 0.3, hidden)
    params.w_det = rng.normal(0, 0.6, hidden)
    params.b_det = float(rng.normal(0, 0.3))
    if stage is Stage.FULL:
        params.w_rr = rng.normal(0, 0.6, (4, hidden))
        params.b_rr = rng.normal(0, 0.3, 4)
    return params


class TestGradients:
    def test_detector_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        X = rng.normal(0, 1, (8, 10))
        y = rng.integers(0, 2, 8).astype(np.float64)
        y[0], y[1] = 0.0, 1.0
        w = np.where(y == 1, 1.4, 0.7)
        for _ in range(5):
            params = random_point(rng)
            err = _fd_max_rel_error(
                detector_loss, detector_gradients, params, X, y, w,
                ("w1", "b1", "w_det", "b_det"),
            )
            assert err < 1e-4

    def test_reranker_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        X = rng.normal(0, 1, (8, 10))
        y = rng.integers(0, 4, 8)
        w = rng.uniform(0.5, 1.5, 8)
        for _ in range(5):
            params = random_point(rng, stage=Stage.FULL)
            err = _fd_max_rel_error(
                reranker_loss, reranker_gradients, params, X, y, w,
                ("w1", "b1", "w_rr", "b_rr"),
            )
            assert err < 1e-4


class TestTrainDetector:
    def separable_dataset(self):
        return [(unit_vec(8, 0), 0), (unit_vec(8, 1), 1)]

    def test_separable_two_points(self):
        cfg = TrainingConfig(seed=3, learning_rate=0.5, epochs=300, convergence_tol=0.0)
        run = train_detector(self.separable_dataset(), cfg, hidden_dim=4)
        probs = detector_forward_batch(run.params, np.eye(8)[:2])
        assert (probs > 0.5).astype(int).tolist() == [0, 1]
        assert run.loss_trace[-1] < 0.01

    def test_single_class_refused(self):
        with pytest.raises(TrainingError, match="single class"):
            train_detector([(unit_vec(8, 0), 1), (unit_vec(8, 1), 1)])

    def test_deterministic_given_seed(self):
        cfg = TrainingConfig(seed=5, epochs=20)
        a = train_detector(self.separable_dataset(), cfg, hidden_dim=4)
        b = train_detector(self.separable_dataset(), cfg, hidden_dim=4)
        assert np.array_equal(a.params.w1, b.params.w1)
        assert a.loss_trace == b.loss_trace

    def test_full_batch_loss_non_increasing(self):
        rng = np.random.default_rng(17)
        data = []
        for i in range(24):
            v = rng.normal(0, 1, 12)
            v /= np.linalg.norm(v)
            data.append((EmbeddingVector(v), int(i % 2)))
        cfg = TrainingConfig(seed=1, learning_rate=0.05, epochs=60, batch_size=64,
                             convergence_tol=0.0)
        run = train_detector(data, cfg, hidden_dim=6)
        trace = np.array(run.loss_trace)
        assert np.all(np.diff(trace) <= 1e-9)


class TestWarmStart:
    def trained(self):
        ds = [(unit_vec(8, 0), 0), (unit_vec(8, 1), 1)]
        return train_detector(ds, TrainingConfig(seed=2, epochs=30), hidden_dim=4).params

    def test_body_copied_verbatim(self):
        det = self.trained()
        full = warm_start_reranker(det)
        assert np.array_equal(full.w1, det.w1)
        assert np.array_equal(full.b1, det.b1)
        assert full.stage is Stage.FULL

    def test_same_seed_same_head(self):
        det = self.trained()
        a, b = warm_start_reranker(det), warm_start_reranker(det)
        assert np.array_equal(a.w_rr, b.w_rr)
        assert np.array_equal(a.b_rr, b.b_rr)
        assert np.abs(a.w_rr).max() <= 0.01

    def test_detector_output_preserved(self):
        det = self.trained()
        full = warm_start_reranker(det)
        for idx in range(8):
            assert detector_forward(full, unit_vec(8, idx)) == detector_forward(det, unit_vec(8, idx))

    def test_requires_detector_stage(self):
        full = warm_start_reranker(self.trained())
        with pytest.raises(ContractViolation):
            warm_start_reranker(full)


class TestTrainReranker:
    def one_per_class(self):
        return [(unit_vec(8, i), CLASS_ORDER[i]) for i in range(4)]

    def full_params(self):
        det = train_detector(
            [(unit_vec(8, 0), 0), (unit_vec(8, 1), 1)],
            TrainingConfig(seed=3, epochs=20),
            hidden_dim=6,
        ).params
        return warm_start_reranker(det)

    def test_recovers_separable_labels(self):
        cfg = TrainingConfig(seed=3, learning_rate=0.5, epochs=400, convergence_tol=0.0)
        run = train_reranker(self.one_per_class(), self.full_params(), cfg)
        for i in range(4):
            probs = reranker_forward(run.params, unit_vec(8, i))
            assert int(np.argmax(probs)) == i

    def test_zero_epochs_leaves_params_unchanged(self):
        full = self.full_params()
        run = train_reranker(self.one_per_class(), full, TrainingConfig(epochs=0))
        assert np.array_equal(run.params.w1, full.w1)
        assert np.array_equal(run.params.w_rr, full.w_rr)
        assert run.loss_trace == []

    def test_missing_class_weighted_zero_not_fatal(self, caplog):
        data = [(unit_vec(8, 0), WeakLabelClass.FALSE_WARNING), (unit_vec(8, 1), WeakLabelClass.VTB)]
        with caplog.at_level("WARNING"):
            train_reranker(data, self.full_params(), TrainingConfig(epochs=2))
        assert any("absent" in rec.message for rec in caplog.records)

    def test_requires_full_stage(self):
        det = train_detector(
            [(unit_vec(8, 0), 0), (unit_vec(8, 1), 1)], TrainingConfig(epochs=1), hidden_dim=4
        ).params
        with pytest.raises(ContractViolation):
            train_reranker(self.one_per_class(), det)

    def test_full_batch_loss_non_increasing(self):
        cfg = TrainingConfig(seed=5, learning_rate=0.05, epochs=60, batch_size=64,
                             convergence_tol=0.0)
        run = train_reranker(self.one_per_class(), self.full_params(), cfg)
        assert np.all(np.diff(np.array(run.loss_trace)) <= 1e-9)


def oracle_rank_score(probs):
    # independent restatement: argmax with ties to the higher class,
    # base score +/- the winning probability
    best = max(range(4), key=lambda i: (probs[i], i))
    return best + probs[best] if best >= 1 else best - probs[best]


class TestRankScore:
    def test_vtb_example(self):
        cls, score = rank_score([0.1, 0.1, 0.1, 0.7])
        assert cls is WeakLabelClass.VTB
        assert score == pytest.approx(3.7)

    def test_false_warning_example(self):
        cls, score = rank_score([0.9, 0.05, 0.03, 0.02])
        assert cls is WeakLabelClass.FALSE_WARNING
        assert score == pytest.approx(-0.9)

    def test_uniform_tie_breaks_high(self):
        cls, score = rank_score([0.25, 0.25, 0.25, 0.25])
        assert cls is WeakLabelClass.VTB
        assert score == pytest.approx(3.25)

    def test_invalid_vectors_rejected(self):
        with pytest.raises(ContractViolation):
            rank_score([0.5, 0.5, 0.5, 0.5])
        with pytest.raises(ContractViolation):
            rank_score([0.5, 0.5])
        with pytest.raises(ContractViolation):
            rank_score([1.2, -0.2, 0.0, 0.0])

    def test_matches_oracle_on_random_vectors(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            probs = rng.dirichlet([1.0, 1.0, 1.0, 1.0])
            cls, score = rank_score(probs)
            assert score == pytest.approx(oracle_rank_score(list(probs)), abs=1e-12)

    def test_score_ranges_and_class_order(self):
        rng = np.random.default_rng(29)
        ranges = {
            WeakLabelClass.FALSE_WARNING: (-1.0, -0.25),
            WeakLabelClass.UTB: (1.25, 2.0),
            WeakLabelClass.LTB: (2.25, 3.0),
            WeakLabelClass.VTB: (3.25, 4.0),
        }
        for _ in range(2000):
            probs = rng.dirichlet([1.0, 1.0, 1.0, 1.0])
            cls, score = rank_score(probs)
            lo, hi = ranges[cls]
            assert lo <= score <= hi


def make_warning(i, wtype=WarningType.DEAD_STORE):
    return Warning(
        id=f"w{i}",
        warning_type=wtype,
        qualifier=f"The value written to `v{i}` is never used.",
        file="m.c",
        line=i + 1,
        procedure=f"proc{i}",
    )


class TestRank:
    def test_empty_input(self):
        params = init_full_params(16, 4, seed=0)
        assert rank([], None, params) == []

    def test_sorted_descending_and_class_ordered(self):
        params = init_full_params(64, 8, seed=1)
        warnings = [make_warning(i) for i in range(30)]
        ranked = rank(warnings, None, params)
        scores = [r.prediction.score for r in ranked]
        assert scores == sorted(scores, reverse=True)
        base = [r.prediction.predicted_class.base_score for r in ranked]
        assert base == sorted(base, reverse=True)

    def test_requires_full_stage(self):
        det = init_detector_params(16, 4, seed=0)
        with pytest.raises(ContractViolation):
            rank([make_warning(0)], None, det)

    def test_band_assignment(self):
        params = init_full_params(32, 4, seed=2)
        ranked = rank([make_warning(i) for i in range(10)], None, params)
        for r in ranked:
            expected = {
                WeakLabelClass.VTB: "red",
                WeakLabelClass.LTB: "orange",
            }.get(r.prediction.predicted_class, "none")
            assert r.band == expected


class TestModelIO:
    def trained_full(self):
        ds = [(unit_vec(8, 0), 0), (unit_vec(8, 1), 1)]
        det = train_detector(ds, TrainingConfig(seed=4, epochs=10), hidden_dim=4).params
        full = warm_start_reranker(det)
        return train_reranker(
            [(unit_vec(8, i), CLASS_ORDER[i]) for i in range(4)],
            full,
            TrainingConfig(seed=4, epochs=10),
        ).params

    def test_round_trip(self, tmp_path):
        params = self.trained_full()
        path = tmp_path / "model.json"
        save_model(params, path, {"note": "round trip"})
        loaded, meta = load_model(path)
        assert meta == {"note": "round trip"}
        assert loaded.stage is Stage.FULL
        assert np.array_equal(loaded.w1, params.w1)
        assert np.array_equal(loaded.w_rr, params.w_rr)
        vec = unit_vec(8, 2)
        assert detector_forward(loaded, vec) == detector_forward(params, vec)

    def test_serialization_is_deterministic(self):
        params = self.trained_full()
        assert model_to_json(params, {"a": 1}) == model_to_json(params, {"a": 1})

    def test_bad_class_order_rejected(self):
        params = self.trained_full()
        text = model_to_json(params).replace('"UTB","LTB"', '"LTB","UTB"')
        with pytest.raises(ModelFormatError):
            model_from_json(text)

    def test_bad_version_rejected(self):
        params = self.trained_full()
        text = model_to_json(params).replace('"format_version":1', '"format_version":99')
        with pytest.raises(ModelFormatError):
            model_from_json(text)

    def test_garbage_rejected(self):
        with pytest.raises(ModelFormatError):
            model_from_json("{not json")


class TestTrainingConfig:
    def test_validation(self):
        with pytest.raises(ContractViolation):
            TrainingConfig(learning_rate=0)
        with pytest.raises(ContractViolation):
            TrainingConfig(epochs=-1)
        with pytest.raises(ContractViolation):
            TrainingConfig(class_weighting="focal")
