"""Pipeline configuration: every tunable with its default, JSON round-trip,
and validation. Unknown keys are rejected so typos fail loudly."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .blob_merge import THRESHOLD_RULES


class ConfigError(ValueError):
    pass


@dataclass
class GaborSettings:
    omega: float = 0.25
    thetas: list[float] = field(default_factory=lambda: [0.0, 35.0, 75.0])
    omega_t0s: list[float] = field(
        default_factory=lambda: [1.0 / 7.0, 1.0 / 8.0, 1.0 / 9.0]
    )
    sigma_x: float = 4.0
    sigma_y: float = 4.0
    sigma_t: float = 1.0
    spatial_extent: int = 25
    temporal_extent: int = 7

    def validate(self):
        for name in ("spatial_extent", "temporal_extent"):
            extent = getattr(self, name)
            if not isinstance(extent, int) or extent < 3 or extent % 2 == 0:
                raise ConfigError(f"gabor.{name} must be an odd integer >= 3")
        for name in ("sigma_x", "sigma_y", "sigma_t"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"gabor.{name} must be positive")
        if not self.thetas or not self.omega_t0s:
            raise ConfigError("gabor.thetas and gabor.omega_t0s must be non-empty")


@dataclass
class BlobSettings:
    min_blob_area: int = 9

    def validate(self):
        if self.min_blob_area < 1:
            raise ConfigError("blob.min_blob_area must be >= 1")


@dataclass
class MergeSettings:
    threshold_rule: str = "mst_mean_std"

    def validate(self):
        if self.threshold_rule not in THRESHOLD_RULES:
            raise ConfigError(
                f"merge.threshold_rule must be one of {THRESHOLD_RULES}"
            )


@dataclass
class TrackerSettings:
    phi: float = 1e9
    size_diff: float = 5.0
    max_missed: int = 10
    assignment: str = "greedy"

    def validate(self):
        if self.assignment not in ("greedy", "optimal"):
            raise ConfigError("tracker.assignment must be 'greedy' or 'optimal'")
        if self.max_missed < 0:
            raise ConfigError("tracker.max_missed must be >= 0")
        if self.phi <= 0:
            raise ConfigError("tracker.phi must be positive")


@dataclass
class EvalSettings:
    tre_starts: int = 20

    def validate(self):
        if self.tre_starts < 1:
            raise ConfigError("eval.tre_starts must be >= 1")


_SECTIONS = {
    "gabor": GaborSettings,
    "blob": BlobSettings,
    "merge": MergeSettings,
    "tracker": TrackerSettings,
    "eval": EvalSettings,
}


@dataclass
class PipelineConfig:
    gabor: GaborSettings = field(default_factory=GaborSettings)
    blob: BlobSettings = field(default_factory=BlobSettings)
    merge: MergeSettings = field(default_factory=MergeSettings)
    tracker: TrackerSettings = field(default_factory=TrackerSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)

    def validate(self) -> "PipelineConfig":
        for name in _SECTIONS:
            getattr(self, name).validate()
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        sections = {}
        for name, section_cls in _SECTIONS.items():
            payload = dict(data.get(name, {}))
            valid_keys = {f.name for f in fields(section_cls)}
            bad = set(payload) - valid_keys
            if bad:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
            sections[name] = section_cls(**payload)
        return cls(**sections).validate()

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        with Path(path).open("r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")
