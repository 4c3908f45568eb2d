import pytest
from pydantic import ValidationError

from priorlab.schemas import ModelConfig, ObjectiveConfig, TrainConfig


def test_defaults_validate():
    cfg = TrainConfig()
    assert cfg.objective.prior == "flow"
    assert cfg.objective.beta == 0.0
    assert cfg.latent_dim == cfg.model.latent_dim == 16


def test_negative_beta_rejected():
    with pytest.raises(ValidationError, match="beta must be"):
        ObjectiveConfig(beta=-1)


def test_unknown_field_rejected():
    with pytest.raises(ValidationError):
        TrainConfig(epoch=3)


def test_prior_family_is_closed():
    with pytest.raises(ValidationError):
        ObjectiveConfig(prior="vamp")


def test_zero_width_rejected():
    with pytest.raises(ValidationError):
        ModelConfig(encoder_hidden=[8, 0])


def test_flow_needs_two_latent_dims():
    """A flow cannot split a one-dimensional code."""
    with pytest.raises(ValidationError):
        TrainConfig(model={"latent_dim": 1})
    cfg = TrainConfig(model={"latent_dim": 1, "flow_depth": 0})
    assert cfg.latent_dim == 1


def test_adversarial_needs_batches_of_two():
    with pytest.raises(ValidationError):
        TrainConfig(batch_size=1, objective={"prior": "adversarial"})


def test_assignment_is_validated():
    cfg = ObjectiveConfig()
    with pytest.raises(ValidationError):
        cfg.mc_samples = 0
