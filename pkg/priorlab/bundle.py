"""The full generative autoencoder: encoder, decoder, prior, discriminator."""

from typing import Dict, Optional

import numpy as np

from priorlab.gradcore import Tensor
from priorlab.nets import DecoderNet, EncoderNet, Module
from priorlab.priors import Discriminator, PriorHandle, build_prior
from priorlab.schemas import TrainConfig


class ModelBundle(Module):
    """
    Every network of one run plus the training random stream.

    Parameter groups follow the bilevel split: ``upper`` holds the
    encoder and decoder (phi, psi and log gamma when learned), ``prior``
    holds theta and ``disc`` holds omega.
    """

    def __init__(
        self,
        encoder: EncoderNet,
        decoder: DecoderNet,
        prior: PriorHandle,
        discriminator: Optional[Discriminator] = None,
        config: Optional[TrainConfig] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        self.encoder = encoder
        self.decoder = decoder
        self.prior = prior
        self.discriminator = discriminator
        self.config = config
        self.rng = rng or np.random.default_rng()
        self._feature_probe = None

    @property
    def latent_dim(self) -> int:
        return self.encoder.latent_dim

    @property
    def data_dim(self) -> int:
        return self.encoder.data_dim

    @property
    def feature_probe(self):
        return self._feature_probe

    def attach_probe(self, probe) -> None:
        """Frozen feature network used by the probe-feature loss."""
        self._feature_probe = probe

    def upper_params(self) -> Dict[str, Tensor]:
        found = self.encoder.named_parameters("encoder.")
        found.update(self.decoder.named_parameters("decoder."))
        return found

    def prior_params(self) -> Dict[str, Tensor]:
        return self.prior.named_parameters("prior.")

    def disc_params(self) -> Dict[str, Tensor]:
        if self.discriminator is None:
            return {}
        return self.discriminator.named_parameters("discriminator.")

    def param_groups(self) -> Dict[str, Dict[str, Tensor]]:
        return {
            "upper": self.upper_params(),
            "prior": self.prior_params(),
            "disc": self.disc_params(),
        }


def build_bundle(cfg: TrainConfig, data_dim: int) -> ModelBundle:
    """
    Initialize every network from ``cfg.seed``.

    Initialization and training draw from two independent streams
    spawned from the seed, so changing the architecture of one part
    never shifts the training noise.
    """
    init_seq, train_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    init_rng = np.random.default_rng(init_seq)
    model = cfg.model
    d = model.latent_dim
    encoder = EncoderNet(data_dim, model.encoder_hidden, d, init_rng)
    decoder = DecoderNet(
        d,
        model.decoder_hidden,
        data_dim,
        init_rng,
        output_activation=model.decoder_output,
        learn_gamma=cfg.objective.gamma_mode == "learned",
    )
    prior = build_prior(
        cfg.objective.prior,
        d,
        init_rng,
        flow_depth=model.flow_depth,
        flow_width=model.flow_width,
        generator_hidden=model.prior_hidden,
        bn_momentum=model.bn_momentum,
    )
    discriminator = None
    if cfg.objective.prior == "adversarial":
        discriminator = Discriminator(d, model.disc_hidden, init_rng)
    return ModelBundle(
        encoder,
        decoder,
        prior,
        discriminator,
        config=cfg,
        rng=np.random.default_rng(train_seq),
    )
