"""Run configuration: JSON text in, fully defaulted and validated description out."""

import hashlib
import json
from typing import List, Literal, Optional

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import ParseError, ValidationError
from ..models import FAMILIES, TARGETS

TASKS = ("verify", "maxwellian", "simulate", "sweep")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelBlock(_Strict):
    family: str
    params: dict = Field(default_factory=dict)
    mutate: Optional[str] = None

    @field_validator("family")
    @classmethod
    def _known_family(cls, v):
        if v not in FAMILIES:
            raise ValueError(f"unknown family {v!r}; choose from {sorted(FAMILIES)}")
        return v

    @field_validator("mutate")
    @classmethod
    def _known_mutation(cls, v):
        if v is not None and v not in TARGETS:
            raise ValueError(f"unknown mutation {v!r}; choose from {sorted(TARGETS)}")
        return v


class SampleBlock(_Strict):
    count: int = Field(1000, ge=1)
    seed: int = 42


class TolerancesBlock(_Strict):
    analytic: float = Field(1e-10, gt=0)
    symmetry: float = Field(1e-12, gt=0)
    fd: float = Field(1e-5, gt=0)
    angle: float = Field(1e-8, gt=0)
    qv_condition: float = Field(1e8, gt=0)
    ratio_floor: float = Field(1e-3, ge=0)
    transform_angle: float = Field(1e-6, gt=0)
    transform_condition: float = Field(10.0, ge=1)


class MaxwellianBlock(_Strict):
    states: Optional[List[List[float]]] = None
    count: int = Field(10, ge=1)


class InitialConditionBlock(_Strict):
    kind: Literal["equilibrium_gaussian", "gaussian", "uniform"] = "equilibrium_gaussian"
    amplitude: float = 0.5
    width: float = Field(3.0, gt=0)
    center: Optional[float] = None
    component: int = Field(0, ge=0)
    base: Optional[List[float]] = None


class SolverBlock(_Strict):
    mode: Literal["full", "simplified", "equilibrium"] = "full"
    eps: float = Field(0.1, gt=0)
    cfl: float = Field(0.4, gt=0, lt=1)
    t_final: float = Field(0.5, gt=0)
    u_star: Optional[List[float]] = None
    snapshot_every: int = Field(0, ge=0)
    time_step: Literal["fixed", "adaptive"] = "fixed"
    cells: int = Field(400, ge=4)
    x_min: float = -8.0
    x_max: float = 8.0
    ic: InitialConditionBlock = Field(default_factory=InitialConditionBlock)

    @model_validator(mode="after")
    def _domain(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        return self


class SweepBlock(_Strict):
    eps: List[float] = Field(default_factory=lambda: [0.1, 0.05, 0.025, 0.0125])
    slope_window: List[float] = Field(default_factory=lambda: [0.8, 1.2])

    @field_validator("eps")
    @classmethod
    def _eps_list(cls, v):
        if len(v) < 3:
            raise ValueError("a sweep needs at least 3 eps values")
        if any(e <= 0 for e in v):
            raise ValueError("eps values must be positive")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("eps values must be strictly decreasing")
        return v

    @field_validator("slope_window")
    @classmethod
    def _window(cls, v):
        if len(v) != 2 or not v[0] < v[1]:
            raise ValueError("slope_window must be [low, high] with low < high")
        return v


class RunConfig(_Strict):
    model: ModelBlock
    task: Literal["verify", "maxwellian", "simulate", "sweep"]
    sample: SampleBlock = Field(default_factory=SampleBlock)
    tolerances: TolerancesBlock = Field(default_factory=TolerancesBlock)
    maxwellian: MaxwellianBlock = Field(default_factory=MaxwellianBlock)
    solver: SolverBlock = Field(default_factory=SolverBlock)
    sweep: SweepBlock = Field(default_factory=SweepBlock)


def _path(loc):
    return ".".join(str(p) for p in loc)


def _line_of(text, key):
    """1-based line of the first occurrence of ``"key"`` in ``text`` (best effort)."""
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def load_raw(text):
    """Decode JSON text into a dict; raises :class:`ParseError` with the offending line."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError("line 1: top level must be a JSON object")
    return raw


def parse_config(text):
    """Parse JSON config text; raises :class:`ParseError` or :class:`ValidationError`."""
    return validate_config(load_raw(text), text)


def validate_config(raw, text=None):
    try:
        return RunConfig.model_validate(raw)
    except pydantic.ValidationError as exc:
        err = exc.errors()[0]
        path = _path(err["loc"]) or "<root>"
        where = ""
        if text is not None and err["loc"]:
            line = _line_of(text, err["loc"][-1] if isinstance(err["loc"][-1], str)
                            else err["loc"][0])
            where = f" (line {line})" if line else ""
        msg = err["msg"].removeprefix("Value error, ")
        raise ValidationError(f"{path}{where}: {msg}") from exc


def serialize(cfg):
    """Canonical JSON text of a resolved config (sorted keys, defaults included)."""
    return json.dumps(cfg.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def config_hash(cfg):
    return hashlib.sha256(serialize(cfg).encode()).hexdigest()
