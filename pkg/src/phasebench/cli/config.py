"""Experiment configuration schema (YAML or JSON file, schema version 1)."""
import hashlib
import json
from pathlib import Path
from typing import Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..fq.devices import PRESETS, DeviceModel
from ..mf.experiments import MF_METHODS

__all__ = ["ExperimentConfig", "load_config", "config_hash", "ConfigError"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ChannelGrid(_Strict):
    kind: Literal["dephasing", "depolarizing", "relaxation"]
    eps_p: list[float] = Field(min_length=1)

    @field_validator("eps_p")
    @classmethod
    def _range(cls, v):
        for e in v:
            if not 0.0 <= e < 1.0:
                raise ValueError(f"eps_p must lie in [0, 1), got {e}")
        return v


class InlineDevice(_Strict):
    name: str = "custom"
    connectivity: Literal["all-to-all", "square"]
    f_1q: float = Field(gt=0, le=1)
    f_2q: float = Field(gt=0, le=1)
    idle_kind: Literal["T1", "T2"]
    quality: float = Field(gt=0)
    eps_r: float = Field(ge=0, le=0.5)
    t_1q: float = Field(default=0.1, gt=0)
    t_2q: float = Field(default=1.0, gt=0)


class ExplicitAlpha(_Strict):
    explicit: int = Field(ge=1)


class KRange(_Strict):
    start: float = Field(gt=0)
    stop: float = Field(gt=0)
    step: float = Field(gt=0)

    def values(self) -> list:
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 10) for i in range(n)]


class Budgets(_Strict):
    n_functions: int = Field(default=20, ge=1)
    n_trajectories: int = Field(default=200, ge=1)
    n_shots: int = Field(default=100, ge=1)
    replicates: int = Field(default=20, ge=2)
    ml_samples: int = Field(default=2000, ge=2)
    inner_functions: int = Field(default=50, ge=1)
    vm_functions: int = Field(default=20, ge=1)
    vm_shots: int = Field(default=500, ge=1)
    bootstrap: int = Field(default=1600, ge=10)
    routing_trials: int = Field(default=16, ge=1)
    shadow_repetitions: int = Field(default=20, ge=1)

    @field_validator("ml_samples")
    @classmethod
    def _even(cls, v):
        if v % 2:
            raise ValueError("ml_samples must be even (balanced labels)")
        return v


class ExperimentConfig(_Strict):
    version: Literal[1] = 1
    kind: Literal["fq-accuracy", "mf-run", "shadow-validate", "extrapolate", "advantage-report"]
    seed: int = Field(ge=0, lt=2**64)
    n_q: list[int] = Field(min_length=1)
    channels: list[ChannelGrid] = Field(min_length=1)
    device: Union[str, InlineDevice] = "A"
    alpha_rule: Union[Literal["full", "half"], ExplicitAlpha] = "full"
    budgets: Budgets = Budgets()
    k_grid: Union[list[float], KRange] = KRange(start=1.0, stop=2.0, step=0.1)
    methods: list[str] = Field(default_factory=lambda: ["eigenshadow", "hypergraph", "ml"])
    eta: float = Field(default=0.01, ge=0, lt=0.5)
    cycle_time_s: float = Field(default=1e-6, gt=0)
    report_n_q: list[int] | None = None
    fq_n_q: list[int] | None = None
    vm_n_q: list[int] | None = None
    input_curves: str | None = None
    output_dir: str = "results"
    max_qubits: int = Field(default=24, ge=1)

    @field_validator("n_q", "report_n_q", "fq_n_q", "vm_n_q")
    @classmethod
    def _sizes(cls, v):
        if v is not None and any(n < 2 for n in v):
            raise ValueError("qubit counts must be >= 2")
        return v

    @field_validator("device")
    @classmethod
    def _preset(cls, v):
        if isinstance(v, str) and v not in PRESETS:
            raise ValueError(f"unknown device preset {v!r}; known: {sorted(PRESETS)}")
        return v

    @field_validator("methods")
    @classmethod
    def _methods(cls, v):
        bad = [m for m in v if m not in MF_METHODS]
        if bad:
            raise ValueError(f"unknown MF methods {bad}; known: {list(MF_METHODS)}")
        return v

    @field_validator("k_grid")
    @classmethod
    def _kgrid(cls, v):
        vals = v.values() if isinstance(v, KRange) else list(v)
        if len(vals) < 2 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("k grid needs at least two strictly increasing values")
        return v

    @model_validator(mode="after")
    def _alpha_fits(self):
        if isinstance(self.alpha_rule, ExplicitAlpha):
            for n in self.n_q:
                if self.alpha_rule.explicit > n:
                    raise ValueError(f"explicit alpha weight {self.alpha_rule.explicit} exceeds n_q={n}")
        return self

    def k_values(self) -> list:
        return self.k_grid.values() if isinstance(self.k_grid, KRange) else list(self.k_grid)

    def device_model(self) -> DeviceModel:
        if isinstance(self.device, str):
            return PRESETS[self.device]
        d = self.device.model_dump()
        return DeviceModel(name=d.pop("name"), **d)

    def device_name(self) -> str:
        return self.device if isinstance(self.device, str) else self.device.name

    def alpha_spec(self):
        """(rule, weight) for concept_for_rule."""
        if isinstance(self.alpha_rule, ExplicitAlpha):
            return "explicit", self.alpha_rule.explicit
        return self.alpha_rule, None

    def alpha_label(self) -> str:
        rule, w = self.alpha_spec()
        return rule if w is None else f"explicit:{w}"


def _format_errors(exc) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    from pydantic import ValidationError

    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<file>: not valid YAML/JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError("<root>: config must be a mapping")
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from exc


def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 of the canonical JSON of the validated config, output location excluded."""
    d = cfg.model_dump(mode="json", exclude={"output_dir"})
    canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
