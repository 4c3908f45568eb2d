import math

import pytest

from priorlab.bundle import build_bundle
from priorlab.metrics import METRIC_COLUMNS
from priorlab.training import evaluate_bundle, train


def _trained(cfg, train_set):
    bundle = build_bundle(cfg, train_set.data_dim)
    return train(bundle, train_set, cfg).bundle


def test_flow_report_fills_every_metric(tiny_config, tiny_data):
    """A flow bundle gets every column plus the Z_0 extras."""
    train_set, test_set = tiny_data
    cfg = tiny_config("prior=flow")
    report = evaluate_bundle(
        _trained(cfg, train_set), test_set, None, cfg, run_id="flow"
    )
    assert report.run_id == "flow"
    assert report.prior == "flow"
    assert report.latent_dim == 2
    for column in METRIC_COLUMNS:
        value = getattr(report, column)
        assert value is not None and math.isfinite(value), column
    assert "separability_bits_z0" in report.extra
    assert "frechet_std_normal" in report.extra


def test_standard_normal_leaves_z0_empty(tiny_config, tiny_data):
    train_set, test_set = tiny_data
    cfg = tiny_config("prior=standard_normal", "beta=1")
    report = evaluate_bundle(
        _trained(cfg, train_set), test_set, None, cfg
    )
    assert report.ppl_z0 is None
    assert report.ppl_zT is not None
    assert "separability_bits_z0" not in report.extra
    assert report.failed() == ["ppl_z0"]


def test_adversarial_reports_disc_accuracy(tiny_config, tiny_data):
    train_set, test_set = tiny_data
    cfg = tiny_config("prior=adversarial")
    report = evaluate_bundle(
        _trained(cfg, train_set), test_set, None, cfg
    )
    assert 0.0 <= report.extra["disc_accuracy"] <= 1.0


def test_evaluation_is_seeded(tiny_config, tiny_data):
    """The same bundle and seed give the same report."""
    train_set, test_set = tiny_data
    cfg = tiny_config("prior=flow")
    bundle = _trained(cfg, train_set)
    first = evaluate_bundle(bundle, test_set, None, cfg, seed=3)
    second = evaluate_bundle(bundle, test_set, None, cfg, seed=3)
    assert first.row() == second.row()
    assert first.extra == pytest.approx(second.extra)
