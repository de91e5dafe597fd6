"""JSON run configurations (schema version 1).

Example::

    {
      "schema": 1,
      "model": {"chi": 1.5, "L": "pi"},
      "grid": {"N": 200},
      "initial": {
        "u": [{"type": "parabolic-bump", "center": 0, "height": 1.5, "half_width": 1}],
        "v": [{"type": "gaussian", "amp": 1.2, "rate": 3, "center": 0},
              {"type": "gaussian", "amp": 1.2, "rate": 3, "center": "pi"}]
      },
      "time": {"t_end": 30}
    }

Lengths and positions accept numbers or multiples of pi written as strings
(``"pi"``, ``"pi/2"``, ``"2*pi"``).  Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
import re
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field as PField, ValidationError, model_validator

from .core import Field, ModelParams, make_grid, project
from .errors import ConfigurationError
from .solver import DEFAULT_SAFETY, INTEGRATORS, SolverState, default_cells
from .steady import profile_from_dict

SCHEMA_VERSION = 1
MASS_TOL = 1e-6

_PI = re.compile(r"^\s*(?:([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)\s*\*?\s*)?pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def _real(value):
    """Numbers pass through; strings may be multiples of pi."""
    if isinstance(value, str):
        m = _PI.match(value)
        if not m:
            raise ValueError(f"expected a number or a multiple of pi, got {value!r}")
        factor = float(m.group(1)) if m.group(1) else 1.0
        div = float(m.group(2)) if m.group(2) else 1.0
        return factor * math.pi / div
    return value


Real = Annotated[float, BeforeValidator(_real)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(_Strict):
    chi: Real = PField(gt=0)
    L: Real = PField(gt=0)
    M: Real | None = PField(default=None, gt=0)


class GridSection(_Strict):
    N: int | None = PField(default=None, ge=4)


class ParabolicBump(_Strict):
    """``height * max(0, 1 - ((x - center)/half_width)^2)``."""

    type: Literal["parabolic-bump"]
    center: Real
    height: Real
    half_width: Real = PField(default=1.0, gt=0)

    def amplitude(self):
        return self.height

    def breakpoints(self):
        return (self.center - self.half_width, self.center + self.half_width)

    def __call__(self, x):
        return self.height * np.maximum(0.0, 1.0 - ((x - self.center) / self.half_width) ** 2)


class Gaussian(_Strict):
    """``amp * exp(-rate (x - center)^2)``."""

    type: Literal["gaussian"]
    amp: Real
    rate: Real = PField(gt=0)
    center: Real

    def amplitude(self):
        return self.amp

    def breakpoints(self):
        return ()

    def __call__(self, x):
        return self.amp * np.exp(-self.rate * (x - self.center) ** 2)


class Constant(_Strict):
    type: Literal["constant"]
    value: Real

    def amplitude(self):
        return self.value

    def breakpoints(self):
        return ()

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)


class ProfilePrimitive(_Strict):
    """A steady profile evaluated with the run's (chi, L, M) unless overridden."""

    type: Literal["profile"]
    branch: str
    k: int | None = None
    parity: Literal["plus", "minus"] | None = None
    orientation: Literal["left", "right"] | None = None
    L0: Real | None = None
    eps: Real | None = None
    chi: Real | None = None
    M: Real | None = None

    def amplitude(self):
        return 1.0

    def build(self, params: ModelParams):
        spec = self.model_dump(exclude={"type"}, exclude_none=True)
        spec.setdefault("chi", params.chi)
        spec.setdefault("M", params.M)
        spec["L"] = params.L
        return profile_from_dict(spec)


Primitive = Annotated[
    Union[ParabolicBump, Gaussian, Constant, ProfilePrimitive],
    PField(discriminator="type"),
]


class InitialSection(_Strict):
    u: list[Primitive] = PField(min_length=1)
    v: list[Primitive] = PField(min_length=1)

    @model_validator(mode="after")
    def _nonnegative_u(self):
        for i, prim in enumerate(self.u):
            if prim.amplitude() < 0:
                raise ValueError(f"initial.u[{i}] has a negative amplitude; cell densities must be nonnegative")
        return self


class TimeSection(_Strict):
    t_end: Real = PField(gt=0)
    safety: float = PField(default=DEFAULT_SAFETY, gt=0, le=1)
    snapshot_every: Real | None = PField(default=None, gt=0)
    monitor_every: Real = PField(default=0.05, gt=0)


class SolverSection(_Strict):
    order: Literal[1, 2] = 1
    integrator: Literal[tuple(INTEGRATORS)] = "euler"
    stop_on_steady: bool = True


class OutputSection(_Strict):
    directory: str | None = None
    formats: list[Literal["csv", "json"]] = ["csv", "json"]


class RunConfig(_Strict):
    schema_: Literal[1] = PField(default=SCHEMA_VERSION, alias="schema")
    model: ModelSection
    grid: GridSection = GridSection()
    initial: InitialSection
    time: TimeSection
    solver: SolverSection = SolverSection()
    output: OutputSection = OutputSection()

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    @property
    def N(self) -> int:
        return self.grid.N or default_cells(self.model.L)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

    def _params(self, mass: float) -> ModelParams:
        return ModelParams(self.model.chi, self.model.L, self.model.M if self.model.M is not None else mass)

    def initial_state(self) -> SolverState:
        """Project the initial primitives and check the declared mass."""
        grid = make_grid(self.model.L, self.N)
        provisional = ModelParams(self.model.chi, self.model.L, self.model.M or 1.0)

        u = _project_all(self.initial.u, grid, provisional, "u")
        if np.any(u < 0):
            raise ConfigurationError("initial cell density is negative somewhere")
        mass = math.fsum(u) * grid.dx
        if self.model.M is not None and abs(mass - self.model.M) > MASS_TOL * self.model.M:
            raise ConfigurationError(
                f"initial u has mass {mass:.12g} but model.M = {self.model.M:.12g} (tolerance {MASS_TOL})"
            )
        params = self._params(mass)
        return SolverState(0.0, Field(u, grid), Field(_project_all(self.initial.v, grid, provisional, "v"), grid), params)


def _project_all(prims, grid, params: ModelParams, component: str) -> np.ndarray:
    total = np.zeros(grid.N)
    for prim in prims:
        if isinstance(prim, ProfilePrimitive):
            prof = prim.build(params)
            f, bps = getattr(prof, component), prof.breakpoints
        else:
            f, bps = prim, prim.breakpoints()
        total += project(f, grid, breakpoints=bps).values
    return total


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "invalid configuration: " + "; ".join(lines)


def parse_config(text: str | bytes | dict) -> RunConfig:
    """Parse and validate a JSON configuration (text or already-decoded)."""
    try:
        data = json.loads(text) if isinstance(text, (str, bytes)) else text
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"configuration is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a JSON object")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(_format_errors(exc)) from exc


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
