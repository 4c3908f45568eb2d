from priorlab.dataio.config import (
    KEY_TABLE,
    apply_overrides,
    build_config,
    dump_config,
    flatten_config,
    parse_config,
    parse_config_text,
    parse_yaml_text,
    preset_names,
    split_override,
    valid_keys,
)
from priorlab.dataio.dataset import Dataset
from priorlab.dataio.idx import (
    IMAGES_MAGIC,
    LABELS_MAGIC,
    load_idx,
    load_mnist,
    mnist_available,
    read_idx,
    resolve_data_dir,
    write_idx,
)
from priorlab.dataio.lfck import (
    MAGIC,
    VERSION,
    decode,
    encode,
    read_container,
    write_container,
)
from priorlab.dataio.loader import load_dataset, synthetic_spec
from priorlab.dataio.pgm import to_bytes, write_image_grid
from priorlab.dataio.synthetic import (
    SyntheticSpec,
    synth_generate,
    synthetic_centers,
)

__all__ = [
    "Dataset",
    "IMAGES_MAGIC",
    "KEY_TABLE",
    "LABELS_MAGIC",
    "MAGIC",
    "SyntheticSpec",
    "VERSION",
    "apply_overrides",
    "build_config",
    "decode",
    "dump_config",
    "encode",
    "flatten_config",
    "load_dataset",
    "load_idx",
    "load_mnist",
    "mnist_available",
    "parse_config",
    "parse_config_text",
    "parse_yaml_text",
    "preset_names",
    "read_container",
    "read_idx",
    "resolve_data_dir",
    "split_override",
    "synth_generate",
    "synthetic_centers",
    "synthetic_spec",
    "to_bytes",
    "valid_keys",
    "write_container",
    "write_idx",
    "write_image_grid",
]
