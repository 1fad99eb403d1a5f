import numpy as np
import pytest

from anodens.data import dedup, normalize_minmax, split
from anodens.metrics import auc
from anodens.model import GAUSSIAN_MIXTURE, anomaly_score_batch, build_masks, init_params
from anodens.objective import normal_loglik
from anodens.synth import make_scenario
from anodens.training import (
    AdamState,
    EarlyStopper,
    TrainConfig,
    TrainReport,
    adam_step,
    sweep_lambda,
    train,
)

import anodens.training as training_module


def quick_cfg(**kw):
    base = dict(max_epochs=8, batch_size=32, patience=4, seed=0, lambda_grid=(0.0, 1000.0))
    base.update(kw)
    return TrainConfig(**base)


@pytest.fixture(scope="module")
def scenario_data():
    raw = make_scenario("inside_cluster", seed=0)
    ds = dedup(raw)
    ds, _ = normalize_minmax(ds)
    bundle = split(ds, seed=0, n_train_anom=3, n_val_anom=3)
    return ds, bundle


def fresh_init(ds, seed=0):
    masks = build_masks(ds.n_attributes, 16, 2, 2, seed=1000 + seed)
    return init_params(masks, GAUSSIAN_MIXTURE, 3, seed=2000 + seed)


class TestAdamStep:
    def test_first_step_hand_computed(self):
        cfg = TrainConfig(learning_rate=1e-3)
        trainable = {"p": np.array([0.0])}
        state = AdamState.zeros_like(trainable)
        adam_step(trainable, {"p": np.array([0.5])}, state, cfg)
        # bias-corrected first step: m_hat = g, v_hat = g^2,
        # so the update is lr * g / (|g| + eps)
        expected = 1e-3 * 0.5 / (0.5 + 1e-8)
        assert trainable["p"][0] == pytest.approx(expected, rel=1e-12)
        assert abs(trainable["p"][0]) == pytest.approx(1e-3, rel=1e-6)

    def test_zero_gradient_leaves_parameters(self):
        cfg = TrainConfig()
        trainable = {"p": np.array([1.5, -2.0])}
        state = AdamState.zeros_like(trainable)
        adam_step(trainable, {"p": np.zeros(2)}, state, cfg)
        assert trainable["p"].tolist() == [1.5, -2.0]

    def test_ascends_along_gradient(self):
        cfg = TrainConfig(learning_rate=0.1)
        trainable = {"p": np.array([0.0, 0.0])}
        state = AdamState.zeros_like(trainable)
        adam_step(trainable, {"p": np.array([1.0, -1.0])}, state, cfg)
        assert trainable["p"][0] > 0 and trainable["p"][1] < 0

    def test_shape_mismatch(self):
        cfg = TrainConfig()
        trainable = {"p": np.zeros(3)}
        state = AdamState.zeros_like(trainable)
        with pytest.raises(ValueError, match="shape"):
            adam_step(trainable, {"p": np.zeros(2)}, state, cfg)


class TestEarlyStopper:
    def test_peak_then_decline_with_patience_one(self):
        stopper = EarlyStopper(patience=1)
        assert stopper.update(1, 0.5)
        assert not stopper.should_stop
        assert stopper.update(2, 0.9)
        assert not stopper.should_stop
        assert not stopper.update(3, 0.8)
        assert stopper.should_stop  # stops by epoch 4
        assert stopper.best_epoch == 2
        assert stopper.best_value == 0.9

    def test_ties_keep_earliest(self):
        stopper = EarlyStopper(patience=5)
        stopper.update(1, 0.7)
        stopper.update(2, 0.7)
        assert stopper.best_epoch == 1


class TestTrain:
    def test_rejects_zero_epochs(self):
        with pytest.raises(ValueError, match="max_epochs"):
            TrainConfig(max_epochs=0)

    def test_rejects_empty_training_normals(self, scenario_data):
        ds, bundle = scenario_data
        crippled = type(bundle)(
            train_normal=np.array([], dtype=int),
            val_normal=bundle.val_normal,
            test_normal=bundle.test_normal,
            train_anom=bundle.train_anom,
            val_anom=bundle.val_anom,
            test_anom=bundle.test_anom,
            seed=0,
        )
        with pytest.raises(ValueError, match="no normal"):
            train(fresh_init(ds), ds, crippled, quick_cfg(), 0.0)

    def test_mle_training_raises_loglik(self, scenario_data):
        ds, bundle = scenario_data
        init = fresh_init(ds)
        cfg = quick_cfg(max_epochs=15, patience=15, learning_rate=3e-3, batch_size=16)
        trained, report = train(init, ds, bundle, cfg, 0.0)
        train_x = ds.attributes[bundle.train_normal]
        assert normal_loglik(trained, train_x) > normal_loglik(init, train_x)
        assert report.lam == 0.0
        assert len(report.epochs) <= 15

    def test_deterministic_given_seed(self, scenario_data):
        ds, bundle = scenario_data
        cfg = quick_cfg()
        a_params, a_report = train(fresh_init(ds), ds, bundle, cfg, 1000.0)
        b_params, b_report = train(fresh_init(ds), ds, bundle, cfg, 1000.0)
        for name in a_params.trainable():
            np.testing.assert_array_equal(
                a_params.trainable()[name], b_params.trainable()[name]
            )
        assert a_report == b_report  # wall_time excluded from comparison

    def test_returned_params_match_recorded_best(self, scenario_data):
        ds, bundle = scenario_data
        cfg = quick_cfg(max_epochs=12, patience=12)
        params, report = train(fresh_init(ds), ds, bundle, cfg, 1000.0)
        rescored = auc(
            anomaly_score_batch(params, ds.attributes[bundle.val_anom]),
            anomaly_score_batch(params, ds.attributes[bundle.val_normal]),
        )
        assert rescored == pytest.approx(report.best_val_auc, abs=1e-9)
        assert report.best_val_auc == max(r.val_auc for r in report.epochs)
        assert report.best_epoch == min(
            r.epoch for r in report.epochs if r.val_auc == report.best_val_auc
        )

    def test_early_stop_bookkeeping(self, scenario_data):
        ds, bundle = scenario_data
        cfg = quick_cfg(max_epochs=40, patience=3, learning_rate=3e-3, batch_size=16)
        _, report = train(fresh_init(ds), ds, bundle, cfg, 0.0)
        if report.stopped_early:
            assert len(report.epochs) == report.best_epoch + cfg.patience

    def test_initial_params_not_mutated(self, scenario_data):
        ds, bundle = scenario_data
        init = fresh_init(ds)
        snapshot = {k: v.copy() for k, v in init.trainable().items()}
        train(init, ds, bundle, quick_cfg(), 0.0)
        for name, arr in init.trainable().items():
            np.testing.assert_array_equal(arr, snapshot[name])

    def test_report_csv(self, tmp_path, scenario_data):
        ds, bundle = scenario_data
        _, report = train(fresh_init(ds), ds, bundle, quick_cfg(max_epochs=3), 0.0)
        path = tmp_path / "report.csv"
        report.write_csv(str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,objective,val_auc"
        assert len(lines) == len(report.epochs) + 2  # header + rows + summary


class TestSweep:
    def test_singleton_grid_returns_mle_model(self, scenario_data):
        ds, bundle = scenario_data
        cfg = quick_cfg(lambda_grid=(0.0,))
        result = sweep_lambda(fresh_init(ds), ds, bundle, cfg)
        assert result.best_lambda == 0.0
        direct, _ = train(fresh_init(ds), ds, bundle, cfg, 0.0)
        for name in direct.trainable():
            np.testing.assert_array_equal(
                result.best_params.trainable()[name], direct.trainable()[name]
            )

    def test_ties_break_toward_smaller_lambda(self, scenario_data, monkeypatch):
        ds, bundle = scenario_data

        def fake_train(init, ds_, bundle_, cfg_, lam):
            report = TrainReport(
                lam=lam, epochs=[], best_epoch=1, best_val_auc=0.75, stopped_early=False
            )
            return init.copy(), report

        monkeypatch.setattr(training_module, "train", fake_train)
        cfg = quick_cfg(lambda_grid=(10.0, 0.1, 1000.0))
        result = sweep_lambda(fresh_init(ds), ds, bundle, cfg)
        assert result.best_lambda == 0.1

    def test_empty_grid_rejected(self, scenario_data):
        ds, bundle = scenario_data
        cfg = quick_cfg()
        object.__setattr__(cfg, "lambda_grid", ())
        with pytest.raises(ValueError, match="grid"):
            sweep_lambda(fresh_init(ds), ds, bundle, cfg)

    def test_reports_cover_grid(self, scenario_data):
        ds, bundle = scenario_data
        cfg = quick_cfg(max_epochs=3, lambda_grid=(0.0, 1.0))
        result = sweep_lambda(fresh_init(ds), ds, bundle, cfg)
        assert set(result.reports) == {0.0, 1.0}
        assert set(result.models) == {0.0, 1.0}
        assert result.best_lambda in result.models
