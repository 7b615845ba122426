import dataclasses

import numpy as np
import pytest

from lnop.blocks import param_breakdown, param_difference
from lnop.data import generate
from lnop.errors import ConfigError, MetricError, NonFiniteError, ResolutionError
from lnop.model import OperatorModel
from lnop.tensor import Parameter
from lnop.train import (
    RunReport,
    TrainConfig,
    _clip,
    bench,
    evaluate,
    relative_l2,
    train,
    write_table_csv,
)


@pytest.fixture(scope="module")
def advection():
    return generate("advection", count=6, res=16, seed=0, t=0.25)


def tiny(**kw):
    base = dict(arch="learnable", width=4, modes=[4], depth=2, epochs=3, batch_size=2, lr0=1e-2, n_test=2, seed=3)
    base.update(kw)
    return TrainConfig(**base)


# -------------------------------------------------------------------- metric


def test_relative_l2_percent():
    target = np.array([[3.0, 4.0], [0.0, 2.0]])
    pred = np.array([[3.0, 4.0], [0.0, 1.0]])
    assert relative_l2(pred, target) == pytest.approx(25.0)
    assert relative_l2(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(100.0)


def test_relative_l2_errors():
    with pytest.raises(MetricError):
        relative_l2(np.ones(3), np.zeros(3))
    with pytest.raises(MetricError):
        relative_l2(np.ones(3), np.ones(4))


# -------------------------------------------------------------------- config


def test_config_validation():
    for bad in (dict(epochs=0), dict(batch_size=0), dict(loss="l1"), dict(arch="wno"), dict(depth=0),
                dict(lr_period=0)):
        with pytest.raises(ConfigError):
            tiny(**bad).validate()
    with pytest.raises(ConfigError, match="does not fit"):
        tiny(n_train=5).validate(6)
    with pytest.raises(ConfigError, match="unknown config keys: lr"):
        TrainConfig.from_dict({"lr": 1.0})
    assert TrainConfig.from_dict(tiny().to_dict()) == tiny()


def test_train_needs_a_dataset():
    with pytest.raises(ConfigError):
        train(tiny())


# ------------------------------------------------------------------ training


def test_frozen_trace(advection):
    """Reference losses of a tiny seeded run, recorded once and frozen."""
    _, r = train(tiny(), advection)
    np.testing.assert_allclose(r.train_loss, [0.9427701833601174, 0.9207619218044918, 0.9111144158929354], rtol=1e-9)
    np.testing.assert_allclose(r.test_curve, [92.84399425926179, 91.07576153711541, 90.53997617860628], rtol=1e-9)
    _, r = train(tiny(arch="fourier"), advection)
    np.testing.assert_allclose(r.train_loss, [0.9195894143410147, 0.908020510662332, 0.8951963990526408], rtol=1e-9)


@pytest.mark.parametrize("arch", ["learnable", "fourier"])
def test_training_is_bit_reproducible(advection, arch):
    m1, r1 = train(tiny(arch=arch), advection)
    m2, r2 = train(tiny(arch=arch), advection)
    assert r1.train_loss == r2.train_loss and r1.test_curve == r2.test_curve
    for name in m1.params:
        assert m1.params[name].data.tobytes() == m2.params[name].data.tobytes()


def test_zero_learning_rate_changes_nothing(advection):
    cfg = tiny(lr0=0.0)
    fresh = OperatorModel.create("learnable", 1, 1, (16,), (4,), 4, 2, seed=3)
    model, report = train(cfg, advection)
    for name, p in fresh.params.items():
        np.testing.assert_array_equal(model.params[name].data, p.data)
    assert report.test_curve[0] == report.test_curve[-1]


def test_training_reduces_loss(advection):
    _, r = train(tiny(epochs=100, lr0=5e-3), advection)
    assert r.train_loss[-1] < 0.5 * r.train_loss[0]


def test_report_contents(advection):
    cfg = tiny(eval_resolutions=[16], lr_period=2)
    _, r = train(cfg, advection)
    assert r.config == cfg.to_dict() and r.seed == 3
    assert r.epochs == [1, 2, 3] and r.lr == [1e-2, 1e-2, 5e-3]
    assert len(r.per_epoch_seconds) == 3 and all(t > 0 for t in r.per_epoch_seconds)
    assert set(r.test_rel_l2) == {"16"} and r.test_rel_l2["16"] == pytest.approx(r.test_curve[-1])
    assert r.param_counts["difference_per_block"] == param_difference(4, (16,), (4,))
    assert r.version and r.machine["numpy"]


def test_mse_loss_and_weight_decay_options(advection):
    _, r = train(tiny(loss="mse", weight_decay=1e-2, grad_clip=1.0), advection)
    assert np.all(np.isfinite(r.train_loss))


def test_checkpoints_and_report_files(tmp_path, advection):
    cfg = tiny(epochs=4, lr_period=2, out_dir=str(tmp_path / "run"))
    model, _ = train(cfg, advection)
    names = sorted(p.name for p in (tmp_path / "run").iterdir())
    assert names == ["checkpoint_e2.lnop", "checkpoint_e2.lnop.json", "checkpoint_e4.lnop", "checkpoint_e4.lnop.json",
                     "model.lnop", "model.lnop.json", "report.json"]
    back = OperatorModel.load(tmp_path / "run" / "model.lnop")
    x = advection.inputs[:2]
    np.testing.assert_array_equal(back.predict(x), model.predict(x))
    report = RunReport.read(tmp_path / "run" / "report.json")
    assert report.config["epochs"] == 4


def test_divergence_aborts_with_report(advection):
    with pytest.raises(NonFiniteError) as info:
        train(tiny(lr0=1e300, epochs=5), advection)
    assert info.value.report.aborted["epoch"] >= 1


def test_grad_clip_rescales_global_norm():
    a, b = Parameter(np.zeros(2)), Parameter(np.zeros(1))
    a.grad, b.grad = np.array([3.0, 0.0]), np.array([4.0])
    _clip([a, b], 1.0)
    assert np.sqrt(np.sum(a.grad**2) + np.sum(b.grad**2)) == pytest.approx(1.0)


# ---------------------------------------------------------------- evaluation


def test_evaluate_rows(tmp_path):
    data = generate("advection", count=4, res=32, seed=1, t=0.25)
    cfg = tiny(resolution=16, n_test=0, n_train=4)
    model, _ = train(cfg, data)
    rows = evaluate(model, data, [16, 32])
    assert [r["pipeline"] for r in rows] == ["direct", "pool-interp"]
    coarse = data.resample(16)
    assert rows[0]["rel_l2"] == pytest.approx(relative_l2(model.predict(coarse.inputs), coarse.targets))
    assert rows[1]["extents"] == [32]
    with pytest.raises(ResolutionError):
        evaluate(model, data, [24])
    write_table_csv(rows, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "resolution,extents,rel_l2,pipeline" and len(lines) == 3


def test_bench_reports_formula_columns():
    data = generate("advection", count=4, res=16, seed=0)
    base = tiny(n_test=0)
    result = bench([base, dataclasses.replace(base, arch="fourier")], data, epochs=2, warmup=1)
    for row in result["rows"]:
        counts = param_breakdown(row["arch"], 4, (16,), (4,))
        assert row["params_block"] == counts["total"]
        assert len(row["epoch_seconds"]) == 2 and row["median_epoch_seconds"] > 0
    assert result["difference_per_block"] == param_difference(4, (16,), (4,))
    with pytest.raises(ConfigError):
        bench([base], data)


# ----------------------------------------------------------- further contracts


def test_relative_l2_hand_values_and_scale_covariance(rng):
    assert relative_l2(np.zeros((1, 2)), np.array([[3.0, 4.0]])) == pytest.approx(100.0)
    assert relative_l2(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])) == pytest.approx(100 * np.sqrt(2))
    assert relative_l2(np.ones((2, 3)), np.ones((2, 3))) == 0.0
    p, t = rng.standard_normal((3, 5)), rng.standard_normal((3, 5))
    assert relative_l2(-7.5 * p, -7.5 * t) == pytest.approx(relative_l2(p, t), rel=1e-12)


def test_scripted_single_step_trace(advection):
    """One epoch on two samples equals a hand-stepped forward/backward/Adam."""
    from lnop.tensor import adam_step, backward, relative_l2_loss

    data = advection.subset(0, 2)
    cfg = tiny(epochs=1, n_test=0, batch_size=2, lr0=3e-3)
    model, report = train(cfg, data)
    ref = OperatorModel.create("learnable", 1, 1, (16,), (4,), 4, 2, seed=3)
    perm = np.random.default_rng([3, 1]).permutation(2)
    loss = relative_l2_loss(ref.forward(data.inputs[perm]), data.targets[perm])
    backward(loss)
    adam_step(ref.parameters(), 3e-3)
    assert report.train_loss[0] == pytest.approx(loss.item(), rel=1e-12)
    for name, p in ref.params.items():
        np.testing.assert_allclose(model.params[name].data, p.data, rtol=0, atol=1e-12)


def test_overfit_two_samples():
    data = generate("advection", count=2, res=16, seed=4, t=0.25)
    model, _ = train(tiny(epochs=1000, n_test=0, lr0=3e-3, width=16, modes=[8], lr_period=500), data)
    assert evaluate(model, data, [16])[0]["rel_l2"] < 1.0


def test_lr_sequence_follows_schedule(advection):
    _, r = train(tiny(epochs=7, lr_period=3, lr_factor=0.1), advection)
    from lnop.tensor import step_lr

    assert r.lr == [step_lr(e, 1e-2, 3, 0.1) for e in range(7)]


def test_evaluation_is_pure(advection):
    model, _ = train(tiny(epochs=1), advection)
    assert evaluate(model, advection, [16]) == evaluate(model, advection, [16])
