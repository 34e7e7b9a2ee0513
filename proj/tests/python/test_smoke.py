import numpy as np
import pytest

import fcmdnn


def test_synthetic_dataset_shape_and_determinism():
    a = fcmdnn.gen_synthetic(6, 4, 8, seed=3)
    b = fcmdnn.gen_synthetic(6, 4, 8, seed=3)
    assert a.pixels.shape == (10, 64)
    assert a.labels == [0] * 6 + [1] * 4
    assert a.side == 8
    np.testing.assert_array_equal(a.pixels, b.pixels)


def test_dataset_round_trips_through_disk(tmp_path):
    a = fcmdnn.gen_synthetic(3, 3, 8, seed=1)
    fcmdnn.write_dataset(a, tmp_path / "data")
    b = fcmdnn.load_dataset(tmp_path / "data")
    assert sorted(b.labels) == sorted(a.labels)
    assert b.pixels.shape == a.pixels.shape


def test_preprocess_scales_into_unit_interval():
    d = fcmdnn.gen_synthetic(4, 4, 16, seed=2)
    x = fcmdnn.preprocess(d, target_side=8)
    assert x.shape == (8, 64)
    assert x.min() >= 0.0 and x.max() <= 1.0


def test_fold_plan_covers_every_index_once():
    plan = fcmdnn.make_fold_plan(23, 5, seed=4, stratify_labels=[i % 2 for i in range(23)])
    tested = sorted(i for f in plan["folds"] for i in f["test"])
    assert tested == list(range(23))


def test_fcm_memberships_sum_to_one():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(0, 0.1, (20, 2)), rng.normal(3, 0.1, (20, 2))])
    r = fcmdnn.run_fcm(x, 2, seed=1)
    np.testing.assert_allclose(r["memberships"].sum(axis=1), 1.0, atol=1e-12)
    history = r["objective_history"]
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))


def test_metrics_and_auc():
    m = fcmdnn.metrics(99, 0, 100, 1)
    assert m["acc"] == pytest.approx(0.995)
    assert m["fpr"] == 0.0
    assert fcmdnn.confusion([1, 0, 1, 0], [1, 1, 0, 0]) == (1, 1, 1, 1)
    auc, curve = fcmdnn.roc_auc([0.8, 0.3, 0.5, 0.1], [1, 1, 0, 0])
    assert auc == 0.75
    assert curve[0] == (0.0, 0.0) and curve[-1] == (1.0, 1.0)


def test_run_experiment_is_reproducible():
    d = fcmdnn.gen_synthetic(12, 12, 8, seed=5)
    config = {"folds": 3, "preprocess": {"target_side": 8}, "network": {"epochs": 2}, "clusters_per_class": 2}
    a = fcmdnn.run_experiment(d, "fcm-dnn", config, seed=11)
    b = fcmdnn.run_experiment(d, "fcm-dnn", config, seed=11)
    assert a == b
    assert len(a["folds"]) == 3
    assert sum(len(f["test_ids"]) for f in a["folds"]) == 24
    assert a["config"]["seed"] == 11


def test_errors_carry_their_kind():
    d = fcmdnn.gen_synthetic(4, 4, 8, seed=1)
    with pytest.raises(fcmdnn.FcmdnnError) as info:
        fcmdnn.run_experiment(d, "dnn", {"folds": 1})
    assert info.value.kind == "invalid-fold-count error"
    with pytest.raises(fcmdnn.FcmdnnError) as info:
        fcmdnn.run_experiment(d, "dnn", {"network": {"epoch": 3}})
    assert info.value.kind == "configuration error"
    with pytest.raises(fcmdnn.FcmdnnError):
        fcmdnn.metrics(0, 0, 0, 0)
