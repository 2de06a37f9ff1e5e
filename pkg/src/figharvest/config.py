"""TOML configuration with flag overrides.

Precedence is defaults < config file < command-line flags. The config
path comes from --config or the FIGHARVEST_CONFIG environment variable.
"""

import os
from pathlib import Path
from typing import Any, Optional, Union

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from figharvest.detect import BaselineConfig
from figharvest.evaluation import EvalConfig
from figharvest.synth import PageSpec
from figharvest.synth.compose import PageTemplate

PathLike = Union[str, Path]

ENV_VAR = "FIGHARVEST_CONFIG"


def load_config(explicit: Optional[PathLike] = None) -> dict[str, Any]:
    """Read the TOML config, or return {} when none is configured."""
    raw = str(explicit) if explicit else os.environ.get(ENV_VAR)
    if not raw:
        return {}
    path = Path(raw)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValueError(f"{path}: invalid config: {exc}") from exc


def _merged(section: dict[str, Any], allowed: set[str], label: str,
            overrides: dict[str, Any]) -> dict[str, Any]:
    unknown = set(section) - allowed
    if unknown:
        raise ValueError(f"unknown [{label}] config keys: {sorted(unknown)}")
    merged = dict(section)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def page_spec_from(config: dict[str, Any], **overrides: Any) -> PageSpec:
    allowed = {
        "template", "page_width", "page_height", "margin_top", "margin_bottom",
        "margin_left", "margin_right", "column_gap", "seed", "min_assets",
        "max_assets", "caption_probability", "double_column_fraction",
        "category_weights",
    }
    merged = _merged(dict(config.get("synth", {})), allowed, "synth", overrides)
    if isinstance(merged.get("template"), str):
        merged["template"] = PageTemplate(merged["template"])
    return PageSpec(**merged)


def eval_config_from(config: dict[str, Any], **overrides: Any) -> EvalConfig:
    allowed = {"iou_threshold", "allow_multibox", "class_strict", "exact_tolerance"}
    merged = _merged(dict(config.get("eval", {})), allowed, "eval", overrides)
    return EvalConfig(**merged)


def baseline_config_from(config: dict[str, Any], **overrides: Any) -> BaselineConfig:
    allowed = {"ink_threshold", "merge_distance", "min_area"}
    section = dict(config.get("detect", {}))
    section.pop("workers", None)
    merged = _merged(section, allowed, "detect", overrides)
    return BaselineConfig(**merged)


def detect_workers(config: dict[str, Any], override: Optional[int] = None) -> int:
    if override is not None:
        return override
    value = config.get("detect", {}).get("workers")
    if value is not None:
        return int(value)
    return os.cpu_count() or 1
