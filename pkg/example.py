import numpy as np

from priorlab import build_bundle
from priorlab.dataio import (
    apply_overrides,
    load_dataset,
    parse_config,
    write_image_grid,
)
from priorlab.metrics import generate_images
from priorlab.training import evaluate_bundle, train, train_prior_post
from priorlab.utils import formatter, initialize_logger

initialize_logger("logs")

# Two Gaussian modes in 16 dimensions, flow prior, beta = 0
cfg = apply_overrides(
    parse_config("synthetic_aae_desk"),
    ["prior=flow", "epochs=5", "prior_post_epochs=2"],
)

train_set = load_dataset(cfg.data, "train")
test_set = load_dataset(cfg.data, "test")

bundle = build_bundle(cfg, train_set.data_dim)
result = train(bundle, train_set, cfg, out_dir="runs/example")
train_prior_post(
    bundle, train_set, cfg, optimizers=result.optimizers
)

report = evaluate_bundle(bundle, test_set, None, cfg, run_id="example")
formatter.print_table(
    "example run",
    ["name", "value"],
    list(report.row().items()),
)

images = generate_images(bundle, np.random.default_rng(0), 16)
write_image_grid(images, 4, 4, "runs/example/samples.pgm", (4, 4))
