"""Experiment configuration: JSON-backed, validated, override-friendly."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

PIPELINES = ("plain", "quant_only", "quant_approx", "full_encrypted")
RECOVERY_MODES = ("log", "bruteforce", "auto")
ENCRYPTED_PIPELINES = ("quant_approx", "full_encrypted")  # need group order q for the codec


@dataclass
class DataConfig:
    features: int = 16
    classes: int = 4
    classes_per_client: int = 2
    samples_per_client: int = 200
    separation: float = 3.0
    noise: float = 1.0
    test_fraction: float = 0.1


@dataclass
class ModelConfig:
    hidden: tuple[int, ...] = (16,)

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)


@dataclass
class ExperimentConfig:
    """All knobs of one simulated run; everything derives from ``seed``."""

    N: int = 8                    # total clients
    C: float = 1.0                # participation fraction per round
    threshold: int | None = None  # None: smallest integer > n/2
    rounds: int = 30
    E: int = 2                    # local epochs
    batch_size: int = 20
    eta: float = 0.1
    lr_decay: float = 0.995
    b: int = 10                   # fixed-point encoding bits
    recovery_mode: str = "auto"
    pipeline: str = "full_encrypted"
    seed: int = 0
    adversary_plan: list = field(default_factory=list)
    key_bits: int = 64
    group_bits: int = 512
    reuse_keys: bool = False      # benchmarking only; fresh keys per round otherwise
    server_eta: float | None = None
    fkg_retries: int = 3
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)

    def n_participants(self) -> int:
        return int(round(self.C * self.N))

    def threshold_for(self, n: int) -> int:
        t = self.threshold if self.threshold is not None else n // 2 + 1
        if not (n / 2 < t <= n):
            raise ValueError(f"threshold must satisfy n/2 < T <= n, got T={t}, n={n}")
        return t

    def validate(self) -> "ExperimentConfig":
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if not 0 < self.C <= 1:
            raise ValueError("C must lie in (0, 1]")
        n = self.n_participants()
        if n < 2:
            raise ValueError(f"C*N = {n} participants; need at least 2")
        self.threshold_for(n)
        if self.rounds < 1:
            raise ValueError("rounds must be positive")
        if self.E < 0:
            raise ValueError("local epochs must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.eta <= 0 or self.lr_decay <= 0:
            raise ValueError("eta and lr_decay must be positive")
        if not 2 <= self.b <= 15:
            raise ValueError(f"encoding bits b must be in 2..15, got {self.b}")
        if self.recovery_mode not in RECOVERY_MODES:
            raise ValueError(f"recovery_mode must be one of {RECOVERY_MODES}")
        if self.pipeline not in PIPELINES:
            raise ValueError(f"pipeline must be one of {PIPELINES}")
        if self.key_bits < 16 or self.group_bits <= self.key_bits:
            raise ValueError("need key_bits >= 16 and group_bits > key_bits")
        if self.data.classes < 2 or self.data.features < 1:
            raise ValueError("need at least 2 classes and 1 feature")
        if not 0 < self.data.test_fraction < 1:
            raise ValueError("test_fraction must lie in (0, 1)")
        for entry in self.adversary_plan:
            if not isinstance(entry, dict) or "client" not in entry or "behavior" not in entry:
                raise ValueError("adversary_plan entries need 'client' and 'behavior'")
        return self


def _to_dict(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_dict(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_to_dict(v) for v in obj]
    return obj


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return _to_dict(cfg)


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = dict(raw)
    data = DataConfig(**raw.pop("data", {}))
    model = ModelConfig(**raw.pop("model", {}))
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(data=data, model=model, **raw)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return config_from_dict(raw)


def save_config(cfg: ExperimentConfig, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(cfg: ExperimentConfig, overrides) -> ExperimentConfig:
    """Apply 'key=value' strings (dotted paths reach nested sections)."""
    raw = config_to_dict(cfg)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"override {item!r} is not of the form key=value")
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ValueError(f"unknown config section {part!r} in {key!r}")
            node = node[part]
        if parts[-1] not in node:
            raise ValueError(f"unknown config key {key!r}")
        node[parts[-1]] = _coerce(value)
    return config_from_dict(raw)
