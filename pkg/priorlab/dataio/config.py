"""
Flat ``key = value`` configuration files, YAML mappings and overrides.

Every setting of `TrainConfig` has one flat key. Files, ``--set``
overrides and YAML documents all go through the same key table and the
same pydantic validation, so a value is accepted or rejected
identically wherever it comes from.
"""

from importlib import resources
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ValidationError

from priorlab.errors import ConfigError
from priorlab.schemas import TrainConfig

PathLike = Union[str, Path]

_SECTIONS = ("objective", "model", "data", "metrics")
_RENAMED = {"learning_rate": "lr"}
# published-setting names kept alongside the shipped file names
PRESET_ALIASES = {
    "mnist_flow_paper": "mnist_flow_full",
    "mnist_aae_paper": "mnist_aae_full",
}


def _build_key_table() -> Dict[str, Tuple[Optional[str], str]]:
    table: Dict[str, Tuple[Optional[str], str]] = {}
    for name, field in TrainConfig.model_fields.items():
        if name in _SECTIONS:
            section_model = field.annotation
            for sub in section_model.model_fields:
                table[_RENAMED.get(sub, sub)] = (name, sub)
        else:
            table[_RENAMED.get(name, name)] = (None, name)
    return table


KEY_TABLE = _build_key_table()


def valid_keys() -> List[str]:
    return sorted(KEY_TABLE)


def _coerce(raw: Any) -> Any:
    """Map the textual forms pydantic does not accept on its own."""
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if text.lower() in ("none", "null", ""):
        return None
    return text


def _coerce_list(raw: Any) -> Any:
    if isinstance(raw, str):
        text = raw.strip()
        if not text:
            return []
        return [part.strip() for part in text.split(",")]
    return raw


def _is_list_field(section: Optional[str], name: str) -> bool:
    model = (
        TrainConfig
        if section is None
        else TrainConfig.model_fields[section].annotation
    )
    annotation = str(model.model_fields[name].annotation)
    return annotation.startswith(("typing.List", "list"))


def flatten_config(cfg: TrainConfig) -> Dict[str, Any]:
    """Flat key -> typed value, in key-table order."""
    flat = {}
    for key, (section, name) in KEY_TABLE.items():
        owner = cfg if section is None else getattr(cfg, section)
        flat[key] = getattr(owner, name)
    return flat


def build_config(
    values: Dict[str, Any], lines: Optional[Dict[str, int]] = None
) -> TrainConfig:
    """
    Validate flat values into a `TrainConfig`.

    Raises:
        ConfigError: Unknown key or a value pydantic rejects; the
            message names the key and, when known, the line.
    """
    lines = lines or {}
    nested: Dict[str, Any] = {s: {} for s in _SECTIONS}
    for key, raw in values.items():
        if key not in KEY_TABLE:
            raise ConfigError(
                f"unknown key {key!r}; valid keys: "
                + ", ".join(valid_keys()),
                line=lines.get(key),
                key=key,
            )
        section, name = KEY_TABLE[key]
        value = (
            _coerce_list(raw)
            if _is_list_field(section, name)
            else _coerce(raw)
        )
        if section is None:
            nested[name] = value
        else:
            nested[section][name] = value
    try:
        return TrainConfig.model_validate(nested)
    except ValidationError as err:
        raise _config_error(err, lines) from None


def _config_error(
    err: ValidationError, lines: Dict[str, int]
) -> ConfigError:
    first = err.errors()[0]
    loc = [str(part) for part in first["loc"] if isinstance(part, str)]
    field = loc[-1] if loc else None
    key = _RENAMED.get(field, field) if field else None
    message = first["msg"]
    if message.startswith("Value error, "):
        message = message[len("Value error, ") :]
    if key and key not in message:
        message = f"{key}: {message}"
    return ConfigError(message, line=lines.get(key), key=key)


def parse_config_text(text: str) -> TrainConfig:
    values: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(
                f"expected 'key = value', got {content!r}", line=number
            )
        key, value = (part.strip() for part in content.split("=", 1))
        if not key:
            raise ConfigError("missing key before '='", line=number)
        if key in values:
            raise ConfigError(
                f"duplicate key {key!r} (first on line {lines[key]})",
                line=number,
                key=key,
            )
        values[key] = value
        lines[key] = number
    return build_config(values, lines)


def parse_yaml_text(text: str) -> TrainConfig:
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as err:
        line = getattr(getattr(err, "problem_mark", None), "line", None)
        raise ConfigError(
            f"invalid YAML: {err}",
            line=None if line is None else line + 1,
        ) from None
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError("YAML config must be a flat mapping")
    for key, value in document.items():
        if isinstance(value, dict):
            raise ConfigError(
                f"nested mapping under {key!r}; keys must be flat",
                key=str(key),
            )
    return build_config({str(k): v for k, v in document.items()})


def preset_names() -> List[str]:
    folder = resources.files("priorlab.configs") / "presets"
    return sorted(
        entry.name[: -len(".cfg")]
        for entry in folder.iterdir()
        if entry.name.endswith(".cfg")
    )


def _preset_text(name: str) -> Optional[str]:
    stem = name[: -len(".cfg")] if name.endswith(".cfg") else name
    stem = PRESET_ALIASES.get(stem, stem)
    entry = resources.files("priorlab.configs") / "presets" / f"{stem}.cfg"
    if entry.is_file():
        return entry.read_text(encoding="utf-8")
    return None


def parse_config(source: PathLike) -> TrainConfig:
    """
    Read a config file, or a built-in preset when no such file exists.

    ``.yaml``/``.yml`` files are parsed as flat YAML mappings; anything
    else as ``key = value`` lines with ``#`` comments.
    """
    path = Path(source)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() in (".yaml", ".yml"):
            return parse_yaml_text(text)
        return parse_config_text(text)
    preset = _preset_text(str(source))
    if preset is None:
        raise ConfigError(
            f"no config file or preset named {str(source)!r}; "
            f"presets: {', '.join(preset_names())}"
        )
    return parse_config_text(preset)


def split_override(item: str) -> Tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, value = item.split("=", 1)
    return key.strip(), value.strip()


def apply_overrides(
    cfg: TrainConfig, overrides: Iterable[str]
) -> TrainConfig:
    """Apply ``key=value`` strings on top of ``cfg`` and revalidate."""
    values: Dict[str, Any] = flatten_config(cfg)
    for item in overrides:
        key, value = split_override(item)
        if key not in KEY_TABLE:
            raise ConfigError(
                f"unknown key {key!r}; valid keys: "
                + ", ".join(valid_keys()),
                key=key,
            )
        values[key] = value
    return build_config(values)


def _render(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg: TrainConfig) -> str:
    """Render every setting as ``key = value``; parses back to ``cfg``."""
    return "".join(
        f"{key} = {_render(value)}\n"
        for key, value in flatten_config(cfg).items()
    )


def config_to_dict(cfg: BaseModel) -> Dict[str, Any]:
    return cfg.model_dump(mode="json")
