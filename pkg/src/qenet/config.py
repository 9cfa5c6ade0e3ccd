"""Run configuration records and their JSON form.

A JSON config maps one-to-one onto these dataclasses; unknown keys are
rejected so that a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
import json
import math
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .annealing import Schedule, make_schedule
from .elastic_net import EnParams
from .errors import InvalidArgument
from .refiner import RefinerConfig
from .tunneling import TunnelParams

METHODS = ("en", "sa", "en+refine", "sa+refine")


@dataclass(frozen=True)
class SaSettings:
    """Annealing settings for tours.

    Temperatures are given per unit of instance extent and scaled by the
    instance's bounding-box size at run time. The geometric schedule
    falls from ``t0`` to ``t0 * t_final_ratio`` over the run.
    """

    schedule: str = "geometric"
    t0: float = 0.05
    t_final_ratio: float = 1e-3
    d_scale: float = 0.05
    offset: int = 1
    steps: int = 10_000

    def __post_init__(self):
        if self.schedule not in ("geometric", "logarithmic"):
            raise InvalidArgument(f"unknown schedule {self.schedule!r}")
        if self.steps < 1:
            raise InvalidArgument("steps must be >= 1")
        if not 0 < self.t_final_ratio < 1:
            raise InvalidArgument("t_final_ratio must lie in (0, 1)")

    def build(self, span: float = 1.0, steps: int | None = None) -> Schedule:
        steps = self.steps if steps is None else steps
        if self.schedule == "geometric":
            ratio = self.t_final_ratio ** (1.0 / max(steps - 1, 1))
            return make_schedule("geometric", T0=self.t0 * span, ratio=ratio)
        return make_schedule("logarithmic", D=self.d_scale * span, offset=self.offset)


@dataclass(frozen=True)
class BenchSettings:
    n: int = 30
    instances: int = 10
    methods: tuple[str, ...] = ("en", "sa")
    budget: int = 10_000
    tsp_files: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "tsp_files", tuple(self.tsp_files))
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise InvalidArgument(f"unknown methods {bad}; choose from {METHODS}")
        if self.budget < 1:
            raise InvalidArgument("budget must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    en: EnParams = field(default_factory=EnParams)
    sa: SaSettings = field(default_factory=SaSettings)
    refiner: RefinerConfig = field(default_factory=RefinerConfig)
    tunnel: TunnelParams = field(default_factory=TunnelParams)
    bench: BenchSettings = field(default_factory=BenchSettings)
    emit_csv: bool = True
    emit_json: bool = True


def _build(cls, data):
    if not isinstance(data, dict):
        raise InvalidArgument(f"{cls.__name__} config must be an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise InvalidArgument(f"unknown keys for {cls.__name__}: {unknown}")
    kwargs = {}
    for key, value in data.items():
        tp = hints[key]
        if dataclasses.is_dataclass(tp):
            kwargs[key] = _build(tp, value)
        elif tp is float and isinstance(value, (int, str)):
            kwargs[key] = float(value)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise InvalidArgument(str(exc)) from None


def config_from_dict(data: dict, cls=RunConfig):
    return _build(cls, data)


def config_to_dict(cfg) -> dict:
    def enc(v):
        if isinstance(v, float) and math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if isinstance(v, dict):
            return {k: enc(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [enc(x) for x in v]
        return v

    return enc(dataclasses.asdict(cfg))


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)


def override(cfg, section: str | None = None, **values):
    """Replace fields that are not ``None``; ``section`` picks a nested record."""
    values = {k: v for k, v in values.items() if v is not None}
    if not values:
        return cfg
    if section is None:
        return dataclasses.replace(cfg, **values)
    inner = dataclasses.replace(getattr(cfg, section), **values)
    return dataclasses.replace(cfg, **{section: inner})
