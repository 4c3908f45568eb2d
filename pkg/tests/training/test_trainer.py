import importlib

import numpy as np
import pandas as pd
import pytest

from priorlab.bundle import build_bundle
from priorlab.errors import NonFiniteError, UnsupportedOperationError
from priorlab.training import (
    EPOCH_COLUMNS,
    beta_at,
    build_optimizers,
    epoch_batches,
    prior_step,
    tensor_snapshot,
    train,
    train_prior_post,
    train_step,
)

trainer_module = importlib.import_module("priorlab.training.trainer")


def _bundle(cfg, dataset):
    return build_bundle(cfg, dataset.data_dim)


def test_optimizer_groups_follow_prior(tiny_config, tiny_data):
    """Standard normal trains only the autoencoder; AAE adds two groups."""
    train_set, _ = tiny_data
    std = tiny_config("prior=standard_normal", "beta=1")
    assert list(build_optimizers(_bundle(std, train_set), std)) == [
        "upper"
    ]
    flow = tiny_config("prior=flow")
    assert set(build_optimizers(_bundle(flow, train_set), flow)) == {
        "upper",
        "prior",
    }
    aae = tiny_config("prior=adversarial")
    assert set(build_optimizers(_bundle(aae, train_set), aae)) == {
        "upper",
        "prior",
        "disc",
    }


def test_beta_warmup_ramps_linearly(tiny_config):
    """Beta reaches its target at the end of the warm-up."""
    cfg = tiny_config("beta=1", "beta_warmup_epochs=4")
    assert [beta_at(cfg, e) for e in range(6)] == pytest.approx(
        [0.25, 0.5, 0.75, 1.0, 1.0, 1.0]
    )
    assert beta_at(tiny_config("beta=0.5"), 0) == 0.5


def test_epoch_batches_cover_every_index():
    """A permutation cut into batches, the last one possibly short."""
    batches = epoch_batches(10, 4, np.random.default_rng(0), False)
    assert [b.shape[0] for b in batches] == [4, 4, 2]
    assert sorted(np.concatenate(batches)) == list(range(10))


def test_epoch_batches_drop_singleton():
    """A trailing batch of one is dropped when batch norm is present."""
    kept = epoch_batches(9, 4, np.random.default_rng(0), False)
    dropped = epoch_batches(9, 4, np.random.default_rng(0), True)
    assert len(kept) == 3
    assert len(dropped) == 2


def test_train_step_reports_every_objective(tiny_config, tiny_data):
    """A flow step reports F, its terms and f; g is absent."""
    train_set, _ = tiny_data
    cfg = tiny_config("prior=flow")
    bundle = _bundle(cfg, train_set)
    report = train_step(
        bundle, train_set.images[:16], build_optimizers(bundle, cfg), cfg
    )
    assert np.isfinite(report.upper)
    assert report.upper == pytest.approx(report.recon)
    assert np.isfinite(report.lower)
    assert report.disc is None


def test_adversarial_step_runs(tiny_config, tiny_data):
    """The AAE step updates all three groups and reports g."""
    train_set, _ = tiny_data
    cfg = tiny_config("prior=adversarial")
    bundle = _bundle(cfg, train_set)
    optimizers = build_optimizers(bundle, cfg)
    before = tensor_snapshot(bundle.disc_params())
    report = train_step(bundle, train_set.images[:16], optimizers, cfg)
    assert np.isfinite(report.disc)
    assert np.isfinite(report.lower)
    assert tensor_snapshot(bundle.disc_params()) != before


def test_train_step_rejects_empty_batch(tiny_config, tiny_data):
    train_set, _ = tiny_data
    cfg = tiny_config()
    bundle = _bundle(cfg, train_set)
    with pytest.raises(ValueError):
        train_step(
            bundle,
            train_set.images[:0],
            build_optimizers(bundle, cfg),
            cfg,
        )


def test_non_finite_step_changes_nothing(tiny_config, tiny_data):
    """An aborted step leaves every parameter as it was."""
    train_set, _ = tiny_data
    cfg = tiny_config()
    bundle = _bundle(cfg, train_set)
    optimizers = build_optimizers(bundle, cfg)
    bias = bundle.decoder.named_parameters()
    name = sorted(bias)[-1]
    bias[name].data[...] = np.nan
    before = tensor_snapshot(bundle.named_parameters())
    with pytest.raises(NonFiniteError):
        train_step(bundle, train_set.images[:16], optimizers, cfg)
    after = tensor_snapshot(bundle.named_parameters())
    assert after == before


def test_failed_extra_step_rolls_back(
    tiny_config, tiny_data, monkeypatch
):
    """A non-finite extra discriminator step undoes the whole step."""
    train_set, _ = tiny_data
    cfg = tiny_config("prior=adversarial", "disc_steps=2")
    bundle = _bundle(cfg, train_set)
    optimizers = build_optimizers(bundle, cfg)
    params = tensor_snapshot(bundle.named_parameters())
    buffers = {k: v.copy() for k, v in bundle.named_buffers().items()}

    calls = []
    real_disc = trainer_module.aae_disc

    def disc_then_nan(*args, **kwargs):
        calls.append(1)
        value = real_disc(*args, **kwargs)
        return value if len(calls) == 1 else value * np.nan

    monkeypatch.setattr(trainer_module, "aae_disc", disc_then_nan)
    with pytest.raises(NonFiniteError):
        train_step(bundle, train_set.images[:16], optimizers, cfg)
    assert len(calls) == 2
    assert tensor_snapshot(bundle.named_parameters()) == params
    after = bundle.named_buffers()
    assert all(np.array_equal(buffers[k], after[k]) for k in buffers)
    assert all(o.state.step == 0 for o in optimizers.values())


def test_repeated_aborts_stop_training(tiny_config, tiny_data):
    """Three aborted steps in a row end the run."""
    train_set, _ = tiny_data
    cfg = tiny_config()
    bundle = _bundle(cfg, train_set)
    for param in bundle.encoder.parameters():
        param.data[...] = np.nan
    with pytest.raises(NonFiniteError, match="consecutive"):
        train(bundle, train_set, cfg)


def test_zero_epochs_is_identity(tiny_config, tiny_data):
    """Training for zero epochs returns the initial parameters."""
    train_set, _ = tiny_data
    cfg = tiny_config("epochs=0")
    bundle = _bundle(cfg, train_set)
    before = tensor_snapshot(bundle.named_parameters())
    result = train(bundle, train_set, cfg)
    assert result.log.empty
    assert result.global_step == 0
    assert tensor_snapshot(result.bundle.named_parameters()) == before


def test_same_seed_same_trace(tiny_config, tiny_data):
    """Equal config and seed reproduce the objective trace exactly."""
    train_set, _ = tiny_data
    cfg = tiny_config("prior=flow", "seed=7")
    first = train(_bundle(cfg, train_set), train_set, cfg)
    second = train(_bundle(cfg, train_set), train_set, cfg)
    columns = [c for c in EPOCH_COLUMNS if c != "wall_ms"]
    pd.testing.assert_frame_equal(
        first.log[columns], second.log[columns]
    )
    assert tensor_snapshot(
        first.bundle.named_parameters()
    ) == tensor_snapshot(second.bundle.named_parameters())


def test_different_seed_differs(tiny_config, tiny_data):
    train_set, _ = tiny_data
    a = train(
        _bundle(tiny_config("seed=1"), train_set),
        train_set,
        tiny_config("seed=1"),
    )
    b = train(
        _bundle(tiny_config("seed=2"), train_set),
        train_set,
        tiny_config("seed=2"),
    )
    assert a.log["F"].tolist() != b.log["F"].tolist()


def test_lr_halves_every_k_epochs(tiny_config, tiny_data):
    """Six epochs with k = 2 halve the rate three times."""
    train_set, _ = tiny_data
    cfg = tiny_config("epochs=6", "lr_halve_every=2")
    result = train(_bundle(cfg, train_set), train_set, cfg)
    for optimizer in result.optimizers.values():
        assert optimizer.lr == pytest.approx(0.001 / 8)
    assert result.log["lr"].tolist() == pytest.approx(
        [0.001, 0.001, 0.0005, 0.0005, 0.00025, 0.00025]
    )


def test_epoch_log_written(tiny_config, tiny_data, tmp_path):
    """One CSV row per epoch with the documented columns."""
    train_set, _ = tiny_data
    cfg = tiny_config("checkpoint_every=1")
    result = train(
        _bundle(cfg, train_set), train_set, cfg, out_dir=tmp_path
    )
    frame = pd.read_csv(tmp_path / "epochs.csv")
    assert list(frame.columns) == EPOCH_COLUMNS
    assert frame["epoch"].tolist() == [1, 2]
    assert frame["step"].tolist() == [4, 8]
    assert result.global_step == 8
    assert (tmp_path / "checkpoints" / "epoch_0002.lfck").is_file()


def test_standard_normal_has_no_lower_terms(tiny_config, tiny_data):
    train_set, _ = tiny_data
    cfg = tiny_config("prior=standard_normal", "beta=1")
    result = train(_bundle(cfg, train_set), train_set, cfg)
    assert result.log["f_lower"].isna().all()
    assert result.log["g_disc"].isna().all()
    assert result.log["F"].notna().all()


def test_prior_post_freezes_autoencoder(tiny_config, tiny_data, tmp_path):
    """Post-training moves the prior and never the encoder or decoder."""
    train_set, _ = tiny_data
    cfg = tiny_config("prior=flow", "prior_post_epochs=2")
    bundle = _bundle(cfg, train_set)
    upper = tensor_snapshot(bundle.upper_params())
    prior = tensor_snapshot(bundle.prior_params())
    result = train_prior_post(bundle, train_set, cfg, out_dir=tmp_path)
    assert tensor_snapshot(bundle.upper_params()) == upper
    assert tensor_snapshot(bundle.prior_params()) != prior
    assert result.log["F"].isna().all()
    assert (tmp_path / "prior_epochs.csv").is_file()


def test_prior_post_zero_epochs(tiny_config, tiny_data):
    train_set, _ = tiny_data
    cfg = tiny_config("prior=flow")
    bundle = _bundle(cfg, train_set)
    before = tensor_snapshot(bundle.named_parameters())
    train_prior_post(bundle, train_set, cfg, epochs=0)
    assert tensor_snapshot(bundle.named_parameters()) == before


def test_prior_post_needs_learned_prior(tiny_config, tiny_data):
    train_set, _ = tiny_data
    cfg = tiny_config("prior=standard_normal")
    with pytest.raises(UnsupportedOperationError):
        train_prior_post(_bundle(cfg, train_set), train_set, cfg)


def test_prior_step_skips_upper(tiny_config, tiny_data):
    train_set, _ = tiny_data
    cfg = tiny_config("prior=adversarial")
    bundle = _bundle(cfg, train_set)
    upper = tensor_snapshot(bundle.upper_params())
    report = prior_step(
        bundle, train_set.images[:16], build_optimizers(bundle, cfg), cfg
    )
    assert report.upper is None
    assert np.isfinite(report.disc)
    assert tensor_snapshot(bundle.upper_params()) == upper
