import os

import pytest

import fraudgraph as fg


def test_metric_helpers():
    assert fg.roc_auc([0.9, 0.8, 0.2, 0.1], [True, True, False, False]) == pytest.approx(1.0)
    assert fg.average_precision([0.5, 0.4, 0.3], [False, False, True]) == pytest.approx(1 / 3)
    threshold, f1 = fg.best_threshold([0.1, 0.9], [False, True])
    assert threshold == pytest.approx(0.5)
    assert f1 == pytest.approx(1.0)
    assert fg.classify([0.4, 0.5, 0.6], 0.5) == [False, True, True]
    rates = fg.confusion([True, True], [True, False])
    assert rates["tp"] == 1 and rates["fp"] == 1
    assert rates["f1"] == pytest.approx(2 / 3)


def test_degenerate_labels_raise():
    with pytest.raises(fg.FraudGraphError):
        fg.roc_auc([0.1, 0.2], [False, False])


def test_end_to_end_round_trip(tmp_path):
    csv = str(tmp_path / "data.csv")
    model = str(tmp_path / "model.bin")
    out = str(tmp_path / "out")

    n = fg.generate(csv, n_customers=6, n_merchants=8, n_days=40, fraud_rate=0.05, seed=11)
    assert n > 100

    threshold = fg.train(
        csv, model, out_dir=out, seed=11,
        dim=8, heads=2, encoder_depth=1, decoder_width=8,
        dropout=0.0, epochs=5, patience=5,
    )
    assert threshold > 0.0
    assert os.path.exists(model)
    assert os.path.exists(os.path.join(out, "history.csv"))

    verdicts = fg.score(csv, model)
    assert len(verdicts) == n
    assert all(v["loss"] >= 0.0 for v in verdicts)
    assert {v["verdict"] for v in verdicts} <= {"Fraud", "NonFraud"}

    results = fg.evaluate(csv, model, out_dir=out)
    assert 0.0 <= results["roc_auc"] <= 1.0
    assert 0.0 <= results["auc_pr"] <= 1.0
    assert os.path.exists(os.path.join(out, "curves.csv"))
