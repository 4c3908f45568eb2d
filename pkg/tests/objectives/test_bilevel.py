import numpy as np
import pytest

from priorlab.bundle import build_bundle
from priorlab.errors import ConfigError, UnsupportedOperationError
from priorlab.gradcore import Tensor, backward, no_grad
from priorlab.objectives import (
    aae_disc,
    aae_lower,
    aae_upper,
    objective_cases,
    tiny_config,
    vae_lower,
    vae_upper,
)
from priorlab.objectives.likelihood import kl_std_normal

DATA_DIM = 5


@pytest.fixture
def x():
    return Tensor(np.random.default_rng(2).uniform(size=(4, DATA_DIM)))


def _bundle(**objective):
    cfg = tiny_config(0, **objective)
    return cfg, build_bundle(cfg, DATA_DIM)


def test_composed_objectives_match_finite_differences():
    """Every composed objective passes the gradient check."""
    from priorlab.gradcore import check_gradients

    for name, objective, params in objective_cases(seed=0):
        result = check_gradients(name, objective, params[:6])
        assert result.passed, name


def test_decomposition(x):
    """total = recon - beta * reg."""
    cfg, bundle = _bundle(prior="flow", beta=0.5)
    value = vae_upper(x, bundle, cfg.objective, np.random.default_rng(0))
    expected = value.recon_term.item() - 0.5 * value.reg_term.item()
    assert value.total.item() == pytest.approx(expected)
    assert value.per_example["recon"].shape == (4,)
    assert value.latents.shape == (4, 2)


def test_beta_zero_cuts_prior_out_of_upper(x):
    """At beta = 0 the upper objective gives the prior no gradient."""
    cfg, bundle = _bundle(prior="flow", beta=0.0)
    value = vae_upper(x, bundle, cfg.objective, np.random.default_rng(0))
    assert value.total.item() == pytest.approx(value.recon_term.item())
    prior = list(bundle.prior_params().values())
    grads = backward(value.total, prior)
    assert all(np.allclose(g, 0.0) for g in grads.values())
    assert np.isfinite(value.reg_term.item())


def test_positive_beta_reaches_prior(x):
    """With beta > 0 the regularizer reaches the flow parameters."""
    cfg, bundle = _bundle(prior="flow", beta=1.0)
    for p in bundle.prior_params().values():
        p.data = p.data + 0.1
    value = vae_upper(x, bundle, cfg.objective, np.random.default_rng(0))
    grads = backward(value.total, list(bundle.prior_params().values()))
    assert any(not np.allclose(g, 0.0) for g in grads.values())


def test_mc_samples_average(x):
    """Several reparameterized samples are stacked in latents."""
    cfg, bundle = _bundle(prior="standard_normal", beta=1.0, mc_samples=3)
    value = vae_upper(x, bundle, cfg.objective, np.random.default_rng(0))
    assert value.latents.shape == (12, 2)


def test_vae_upper_rejects_adversarial(x):
    """The density objective cannot use a generator prior."""
    cfg, bundle = _bundle(prior="adversarial", beta=1.0)
    with pytest.raises(UnsupportedOperationError):
        vae_upper(x, bundle, cfg.objective, np.random.default_rng(0))


def test_vae_lower_only_touches_prior(x):
    """The lower objective holds latents fixed."""
    cfg, bundle = _bundle(prior="flow", beta=0.0)
    f = vae_lower(x, bundle, np.random.default_rng(1))
    grads = backward(
        f,
        list(bundle.upper_params().values())
        + list(bundle.prior_params().values()),
    )
    upper = bundle.upper_params().values()
    assert all(np.allclose(grads[p], 0.0) for p in upper)


def test_vae_lower_needs_flow_and_rng(x):
    """Standard-normal priors have nothing to learn; fresh draws need an rng."""
    _, normal = _bundle(prior="standard_normal")
    with pytest.raises(UnsupportedOperationError):
        vae_lower(x, normal, np.random.default_rng(0))
    _, flow = _bundle(prior="flow")
    with pytest.raises(ValueError):
        vae_lower(x, flow)


def test_probe_features_without_probe(x):
    """The feature loss needs an attached probe."""
    cfg, bundle = _bundle(
        prior="standard_normal", recon_loss="probe_features"
    )
    with pytest.raises(ConfigError):
        vae_upper(x, bundle, cfg.objective, np.random.default_rng(0))


def test_aae_upper_freezes_discriminator(x):
    """The encoder objective never updates the discriminator."""
    cfg, bundle = _bundle(prior="adversarial", beta=1.0)
    value = aae_upper(x, bundle, cfg.objective, np.random.default_rng(0))
    disc = list(bundle.disc_params().values())
    grads = backward(value.total, disc)
    assert all(np.allclose(g, 0.0) for g in grads.values())


def test_aae_disc_and_lower_are_log_probabilities(x):
    """g and f are sums and means of log-probabilities, hence negative."""
    _, bundle = _bundle(prior="adversarial", beta=1.0)
    rng = np.random.default_rng(3)
    assert aae_disc(x, bundle, rng).item() < 0
    assert aae_lower(bundle, 4, rng).item() < 0


def test_disc_sampling_leaves_generator_statistics(x):
    """Only the attached generator pass folds batch statistics."""
    _, bundle = _bundle(prior="adversarial", beta=1.0)
    before = {k: v.copy() for k, v in bundle.named_buffers().items()}
    assert before
    aae_disc(x, bundle, np.random.default_rng(5))
    after = bundle.named_buffers()
    assert all(np.array_equal(before[k], after[k]) for k in before)

    aae_lower(bundle, 4, np.random.default_rng(6))
    moved = bundle.named_buffers()
    assert any(not np.array_equal(before[k], moved[k]) for k in before)


def test_aae_lower_reaches_generator_only(x):
    """Generator updates never touch the discriminator."""
    _, bundle = _bundle(prior="adversarial", beta=1.0)
    f = aae_lower(bundle, 4, np.random.default_rng(4))
    prior = list(bundle.prior_params().values())
    disc = list(bundle.disc_params().values())
    grads = backward(f, prior + disc)
    assert all(np.allclose(grads[p], 0.0) for p in disc)
    assert any(not np.allclose(grads[p], 0.0) for p in prior)


def test_adversarial_objectives_need_adversarial_prior(x):
    """aae objectives reject a flow bundle."""
    cfg, bundle = _bundle(prior="flow")
    with pytest.raises(UnsupportedOperationError):
        aae_upper(x, bundle, cfg.objective, np.random.default_rng(0))


@pytest.mark.slow
def test_single_sample_regularizer_is_unbiased(x):
    """Averaged over draws, the reg term of F equals the encoder KL."""
    cfg, bundle = _bundle(
        prior="standard_normal", beta=1.0, mc_samples=16000
    )
    with no_grad():
        value = vae_upper(
            x, bundle, cfg.objective, np.random.default_rng(7)
        )
    mean, logvar = bundle.encoder(x)
    exact = kl_std_normal(mean, logvar).data
    assert np.allclose(value.per_example["reg"], exact, atol=0.05)
