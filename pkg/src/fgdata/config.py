"""Run configuration: YAML file + dotted CLI overrides + defaults.

Precedence is CLI overrides > file > built-in defaults. The resolved
configuration is canonically serialized and hashed; that digest is printed
by every command and recorded in manifest provenance so outputs can be
traced to the exact configuration that produced them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .analyze import TsneConfig
from .models import DetectorConfig, FeatureExtractorConfig, SegmenterConfig
from .pipeline import CompositeConfig
from .qa import QAThresholds


class ConfigFileError(ValueError):
    pass


@dataclass
class RunConfig:
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    composite: CompositeConfig = field(default_factory=CompositeConfig)
    thresholds: QAThresholds = field(default_factory=QAThresholds)
    extractor: FeatureExtractorConfig = field(default_factory=FeatureExtractorConfig)
    tsne: TsneConfig = field(default_factory=TsneConfig)
    bench: dict = field(default_factory=lambda: {"ridge_lambda": 1e-2})

    def to_obj(self) -> dict:
        obj = asdict(self)
        if obj["composite"]["fill"] is not None:
            obj["composite"]["fill"] = list(obj["composite"]["fill"])
        return obj

    def digest(self) -> str:
        canon = json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


SECTIONS = ("detector", "segmenter", "composite", "thresholds", "extractor", "tsne", "bench")


def _apply_section(obj: dict, section: str, values: dict) -> None:
    if section not in SECTIONS:
        raise ConfigFileError(f"unknown config section {section!r}; expected {SECTIONS}")
    if not isinstance(values, dict):
        raise ConfigFileError(f"section {section!r} must be a mapping")
    unknown = set(values) - set(obj[section]) if isinstance(obj[section], dict) else set()
    if unknown:
        raise ConfigFileError(f"unknown keys in {section!r}: {sorted(unknown)}")
    obj[section].update(values)


def parse_override(text: str) -> tuple[str, str, object]:
    """Parse one 'section.key=value' override; value via YAML scalar rules."""
    if "=" not in text:
        raise ConfigFileError(f"override {text!r} must be section.key=value")
    key, raw = text.split("=", 1)
    if "." not in key:
        raise ConfigFileError(f"override key {key!r} must be section.key")
    section, name = key.split(".", 1)
    return section, name, yaml.safe_load(raw)


def load_run_config(
    path: Optional[str | Path] = None, overrides: Optional[list[str]] = None
) -> RunConfig:
    base = RunConfig()
    obj = base.to_obj()

    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigFileError(f"config file not found: {path}")
        try:
            loaded = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigFileError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigFileError(f"{path}: top level must be a mapping")
        for section, values in loaded.items():
            _apply_section(obj, section, values)

    for text in overrides or []:
        section, name, value = parse_override(text)
        _apply_section(obj, section, {name: value})

    fill = obj["composite"]["fill"]
    return RunConfig(
        detector=DetectorConfig(**obj["detector"]),
        segmenter=SegmenterConfig(**obj["segmenter"]),
        composite=CompositeConfig(
            fill=tuple(fill) if fill is not None else None,
            output_format_policy=obj["composite"]["output_format_policy"],
        ),
        thresholds=QAThresholds(**obj["thresholds"]),
        extractor=FeatureExtractorConfig(**obj["extractor"]),
        tsne=TsneConfig(**obj["tsne"]),
        bench=dict(obj["bench"]),
    )
