"""Pydantic models for every run setting, nested under `TrainConfig`."""

from typing import List, Literal, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class ObjectiveConfig(_Section):
    beta: float = Field(
        0.0, description="Weight of the latent regularization term."
    )
    gamma_mode: Literal["fixed", "learned"] = Field(
        "fixed", description="Decoder variance: fixed gamma or learned."
    )
    gamma: float = Field(
        1.0, gt=0, description="Decoder variance in fixed mode."
    )
    prior: Literal["standard_normal", "flow", "adversarial"] = Field(
        "flow", description="Prior family."
    )
    mc_samples: int = Field(
        1, ge=1, description="Reparameterized samples per example."
    )
    recon_loss: Literal["gaussian", "probe_features"] = Field(
        "gaussian",
        description="Pixel Gaussian likelihood or probe feature loss.",
    )
    aae_nonsaturating: bool = Field(
        False, description="Encoder maximizes +beta log D instead."
    )
    fresh_lower_samples: bool = Field(
        False, description="Lower objectives redraw q(z|x) samples."
    )
    beta_warmup_epochs: int = Field(
        0, ge=0, description="Linear beta warm-up length in epochs."
    )

    @field_validator("beta")
    @classmethod
    def _beta_non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("beta must be ≥ 0")
        return value


class ModelConfig(_Section):
    latent_dim: int = Field(16, ge=1)
    encoder_hidden: List[int] = Field(default_factory=lambda: [512, 256])
    decoder_hidden: List[int] = Field(default_factory=lambda: [256, 512])
    decoder_output: Literal["sigmoid", "identity"] = "sigmoid"
    flow_depth: int = Field(8, ge=0)
    flow_width: int = Field(256, ge=1)
    prior_hidden: List[int] = Field(
        default_factory=lambda: [256, 256, 256]
    )
    disc_hidden: List[int] = Field(default_factory=lambda: [256, 256])
    bn_momentum: float = Field(0.9, gt=0, lt=1)

    @field_validator(
        "encoder_hidden", "decoder_hidden", "prior_hidden", "disc_hidden"
    )
    @classmethod
    def _positive_widths(cls, value: List[int]) -> List[int]:
        if any(w < 1 for w in value):
            raise ValueError("layer widths must be ≥ 1")
        return value


class DataConfig(_Section):
    dataset: Literal["mnist", "synthetic"] = "mnist"
    data_dir: Optional[str] = Field(
        None, description="IDX directory; PRIORLAB_DATA_DIR if unset."
    )
    train_subset: Optional[int] = Field(None, ge=1)
    test_subset: Optional[int] = Field(None, ge=1)
    image_height: int = Field(28, ge=1)
    image_width: int = Field(28, ge=1)
    synthetic_kind: Literal["gaussian_mixture", "two_moons_embedded"] = (
        "gaussian_mixture"
    )
    synthetic_modes: int = Field(2, ge=1)
    synthetic_dim: int = Field(16, ge=2)
    synthetic_noise: float = Field(0.05, gt=0)
    synthetic_separation: float = Field(10.0, ge=0)
    synthetic_train: int = Field(4000, ge=1)
    synthetic_test: int = Field(1000, ge=1)


class MetricsConfig(_Section):
    frechet_samples: int = Field(10000, ge=2)
    ppl_pairs: int = Field(2000, ge=1)
    ppl_epsilon: float = Field(1e-4, gt=0)
    ppl_reject_outliers: bool = False
    diversity_samples: int = Field(2000, ge=2)
    latent_samples: int = Field(5000, ge=2)
    separability_samples: int = Field(5000, ge=20)
    probe_epochs: int = Field(5, ge=1)


class TrainConfig(_Section):
    epochs: int = Field(10, ge=0)
    batch_size: int = Field(100, ge=1)
    learning_rate: float = Field(1e-4, gt=0)
    seed: int = Field(1, ge=0, lt=2**64)
    prior_post_epochs: int = Field(0, ge=0)
    lr_halve_every: Optional[int] = Field(None, ge=1)
    checkpoint_every: Optional[int] = Field(None, ge=1)
    prior_steps: int = Field(1, ge=1)
    disc_steps: int = Field(1, ge=1)
    objective: ObjectiveConfig = Field(default_factory=ObjectiveConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)

    @property
    def latent_dim(self) -> int:
        return self.model.latent_dim

    @model_validator(mode="after")
    def _consistent(self) -> "TrainConfig":
        prior = self.objective.prior
        if prior == "adversarial" and self.batch_size < 2:
            raise ValueError(
                "batch_size must be ≥ 2 with batchnorm in the "
                "adversarial prior"
            )
        if (
            prior == "flow"
            and self.model.flow_depth > 0
            and self.model.latent_dim < 2
        ):
            raise ValueError("a flow prior needs latent_dim ≥ 2")
        return self
