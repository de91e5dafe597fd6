"""Positivity-preserving, energy-dissipating finite-volume solver.

The cell density is advanced with the upwind flux
``F = xi^+ u^E_j + xi^- u^W_{j+1}`` where the interface velocity is the
centred difference ``xi = -[(u - chi v)_{j+1} - (u - chi v)_j] / dx``; the
chemical uses the three-point Laplacian with mirrored ghost cells.  Walls
carry zero flux.

Monitor conventions
-------------------
``discrete_energy`` is

    dx * sum[u^2/(2 chi) + (Dv)^2/2 - u v + v^2/2]

i.e. exactly half of :func:`ksbump.energy.free_energy`.  The semi-discrete
decay ``dE/dt <= -I`` holds with this cross term and with the advective part
of the dissipation weighted by ``1/chi``; ``convention="displayed"`` drops
that weight.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .core import Field, Grid, ModelParams, make_grid
from .energy import relative_entropy
from .errors import ConfigurationError, IntegrationError
from .steady import SteadyProfile, project_profile

DEFAULT_SAFETY = 0.45
INTEGRATORS = {"euler": K.EULER, "ssprk2": K.SSPRK2}


def default_cells(L: float) -> int:
    """200 cells up to L = pi, 50 per unit length beyond."""
    return 200 if L <= math.pi + 1e-12 else int(round(50 * L))


@dataclass(frozen=True)
class SolverState:
    t: float
    u: Field
    v: Field
    params: ModelParams

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ConfigurationError("u and v must share a grid")
        if abs(self.u.grid.L - self.params.L) > 1e-12 * self.params.L:
            raise ConfigurationError("grid length differs from the model length")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def mass(self) -> float:
        return self.u.mass

    @classmethod
    def from_arrays(cls, t, u, v, params, grid=None):
        grid = grid or make_grid(params.L, len(u))
        return cls(float(t), Field(u, grid), Field(v, grid), params)


@dataclass(frozen=True)
class InterfaceData:
    xi: np.ndarray
    flux: np.ndarray
    uE: np.ndarray
    uW: np.ndarray


def _arrays(u, v=None):
    uu = np.ascontiguousarray(np.asarray(u, dtype=float))
    if v is None:
        return uu
    vv = np.ascontiguousarray(np.asarray(v, dtype=float))
    if uu.shape != vv.shape:
        raise ConfigurationError("u and v have different lengths")
    return uu, vv


def _dx(field_or_array, dx):
    if isinstance(field_or_array, Field):
        return field_or_array.grid.dx
    if dx is None:
        raise ConfigurationError("dx is required when passing plain arrays")
    return dx


def velocity(u, v, chi: float, dx: float | None = None) -> np.ndarray:
    """Interface velocities (N+1 values, zero at both walls)."""
    h = _dx(u, dx)
    uu, vv = _arrays(u, v)
    xi = np.empty(uu.size + 1)
    K.velocity(uu, vv, float(chi), h, xi)
    return xi


def reconstruct(u, order: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """East and west interface values of each cell."""
    uu = _arrays(u)
    uE, uW = np.empty_like(uu), np.empty_like(uu)
    K.reconstruct(uu, int(order), uE, uW)
    return uE, uW


def upwind_flux(u, xi, order: int = 1) -> np.ndarray:
    if order not in (1, 2):
        raise ConfigurationError(f"order must be 1 or 2, got {order!r}")
    uE, uW = reconstruct(u, order)
    xi = np.ascontiguousarray(np.asarray(xi, dtype=float))
    flux = np.empty(xi.size)
    K.upwind_flux(uE, uW, xi, flux)
    return flux


def interface_data(state: SolverState, order: int = 1) -> InterfaceData:
    xi = velocity(state.u, state.v, state.params.chi)
    uE, uW = reconstruct(state.u, order)
    flux = np.empty(xi.size)
    K.upwind_flux(uE, uW, xi, flux)
    return InterfaceData(xi, flux, uE, uW)


def _rhs_arrays(state, order, flux_sign=1.0):
    uu, vv = _arrays(state.u, state.v)
    n = uu.size
    du, dv = np.empty(n), np.empty(n)
    xi, flux = np.empty(n + 1), np.empty(n + 1)
    uE, uW = np.empty(n), np.empty(n)
    a = K.rhs(uu, vv, state.params.chi, state.grid.dx, int(order), float(flux_sign), du, dv, xi, flux, uE, uW)
    return du, dv, a, InterfaceData(xi, flux, uE, uW)


def rhs(state: SolverState, order: int = 1) -> tuple[Field, Field]:
    du, dv, _, _ = _rhs_arrays(state, order)
    return Field(du, state.grid), Field(dv, state.grid)


def stable_dt(state: SolverState, safety: float = DEFAULT_SAFETY) -> float:
    """Explicit step bound ``safety * min(dx/(2a), dx^2/(2 + dx^2), dx^2/(2 max u))``.

    ``a = max |xi|`` gives the positivity (CFL) bound and ``dx^2/(2 + dx^2)``
    the bound of the chemical's reaction-diffusion update.  The third term
    keeps the degenerate cell diffusion stable where the velocity vanishes,
    which is the case on the support of a steady aggregate.
    """
    xi = velocity(state.u, state.v, state.params.chi)
    return dt_bound(float(np.max(np.abs(xi))), state.grid.dx, safety, float(np.max(state.u.values)))


def dt_bound(a: float, dx: float, safety: float = DEFAULT_SAFETY, umax: float = 0.0) -> float:
    """The step bound of :func:`stable_dt` from its ingredients."""
    if not 0.0 < safety <= 1.0:
        raise ConfigurationError(f"safety factor must lie in (0, 1], got {safety}")
    return K.stable_dt(float(a), float(umax), float(dx), float(safety))


def step(state: SolverState, dt: float, integrator: str = "euler", order: int = 1) -> SolverState:
    """One explicit step (forward Euler or Heun's SSP-RK2)."""
    if integrator not in INTEGRATORS:
        raise ConfigurationError(f"integrator must be one of {sorted(INTEGRATORS)}, got {integrator!r}")
    du, dv, _, _ = _rhs_arrays(state, order)
    u1 = state.u.values + dt * du
    v1 = state.v.values + dt * dv
    if integrator == "ssprk2":
        mid = SolverState(state.t + dt, Field(u1, state.grid), Field(v1, state.grid), state.params)
        du1, dv1, _, _ = _rhs_arrays(mid, order)
        u1 = 0.5 * state.u.values + 0.5 * (u1 + dt * du1)
        v1 = 0.5 * state.v.values + 0.5 * (v1 + dt * dv1)
    if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(v1))):
        raise IntegrationError(f"non-finite values after a step of size {dt} at t = {state.t}", state)
    return SolverState(state.t + dt, Field(u1, state.grid), Field(v1, state.grid), state.params)


def discrete_energy(state: SolverState) -> float:
    uu, vv = _arrays(state.u, state.v)
    return float(K.energy(uu, vv, state.params.chi, state.grid.dx))


def discrete_dissipation(state: SolverState, order: int = 1, convention: str = "proof") -> float:
    """Discrete dissipation; ``"proof"`` weights the advective part by ``1/chi``."""
    if convention not in ("proof", "displayed"):
        raise ConfigurationError(f"unknown convention {convention!r}")
    _, dv, _, data = _rhs_arrays(state, order)
    return float(K.dissipation(data.xi, data.uE, data.uW, dv, state.params.chi, state.grid.dx, convention == "proof"))


MONITOR_COLUMNS = ("t", "mass", "umax", "E_delta", "I_delta", "rel_entropy")


@dataclass
class Monitors:
    t: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    umax: list = field(default_factory=list)
    E_delta: list = field(default_factory=list)
    I_delta: list = field(default_factory=list)
    rel_entropy: list = field(default_factory=list)

    def record(self, state: SolverState, order: int = 1):
        self.t.append(state.t)
        self.mass.append(state.mass)
        self.umax.append(float(np.max(state.u.values)))
        self.E_delta.append(discrete_energy(state))
        self.I_delta.append(discrete_dissipation(state, order))
        self.rel_entropy.append(relative_entropy(state.u, state.v, state.params, mass_tol=np.inf).value)

    def as_arrays(self) -> dict[str, np.ndarray]:
        return {name: np.asarray(getattr(self, name)) for name in MONITOR_COLUMNS}

    def __len__(self):
        return len(self.t)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(MONITOR_COLUMNS)
            for row in zip(*(getattr(self, c) for c in MONITOR_COLUMNS)):
                writer.writerow([repr(float(x)) for x in row])


def write_snapshot_csv(state: SolverState, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("x", "u", "v"))
        for x, u, v in zip(state.grid.centers, state.u.values, state.v.values):
            writer.writerow((repr(float(x)), repr(float(u)), repr(float(v))))


@dataclass(frozen=True)
class RunOptions:
    order: int = 1
    integrator: str = "euler"
    safety: float = DEFAULT_SAFETY
    monitor_every: float = 0.05
    snapshot_every: float | None = None
    stop_on_steady: bool = True
    steady_du: float = 1e-9
    steady_I: float = 1e-12
    steady_steps: int = 100
    max_steps: int = 50_000_000
    dt_min: float = 1e-14
    # mutation-testing hook: -1 reverses every interface flux
    flux_sign: float = 1.0

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ConfigurationError(f"order must be 1 or 2, got {self.order!r}")
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(f"integrator must be one of {sorted(INTEGRATORS)}")
        if not 0.0 < self.safety <= 1.0:
            raise ConfigurationError(f"safety factor must lie in (0, 1], got {self.safety}")
        if not self.monitor_every > 0:
            raise ConfigurationError("monitor_every must be positive")


@dataclass
class RunStats:
    steps: int = 0
    max_energy_increase: float = -math.inf
    max_relative_energy_increase: float = -math.inf
    max_decay_slack: float = -math.inf
    min_u: float = math.inf
    max_mass_drift: float = 0.0
    initial_mass: float = 0.0

    @property
    def relative_mass_drift(self) -> float:
        return self.max_mass_drift / self.initial_mass if self.initial_mass else 0.0

    def absorb(self, steps, stats):
        self.steps += steps
        if steps:
            self.max_energy_increase = max(self.max_energy_increase, stats[0])
            self.max_relative_energy_increase = max(self.max_relative_energy_increase, stats[1])
            self.max_decay_slack = max(self.max_decay_slack, stats[2])
            self.min_u = min(self.min_u, stats[3])
            self.max_mass_drift = max(self.max_mass_drift, stats[4])


@dataclass
class RunResult:
    state: SolverState
    monitors: Monitors
    snapshots: list
    stats: RunStats
    status: str

    @property
    def steady(self) -> bool:
        return self.status == "steady"


_STATUS = {
    K.STATUS_DONE: "t_end",
    K.STATUS_STEADY: "steady",
    K.STATUS_NONFINITE: "nonfinite",
    K.STATUS_UNDERFLOW: "dt-underflow",
    K.STATUS_MAXSTEPS: "max-steps",
}


def initial_state(initial, params: ModelParams, N: int | None = None) -> SolverState:
    """Build the starting state from a profile, a state or a ``(u, v)`` pair."""
    if isinstance(initial, SolverState):
        return initial
    if isinstance(initial, SteadyProfile):
        grid = make_grid(params.L, N or default_cells(params.L))
        u, v = project_profile(initial, grid)
        return SolverState(0.0, u, v, params)
    u0, v0 = initial
    if isinstance(u0, Field):
        return SolverState(0.0, u0, v0 if isinstance(v0, Field) else Field(v0, u0.grid), params)
    grid = make_grid(params.L, N or len(u0))
    return SolverState(0.0, Field(u0, grid), Field(v0, grid), params)


def run(
    initial,
    params: ModelParams,
    t_end: float,
    options: RunOptions | None = None,
    N: int | None = None,
) -> RunResult:
    """Integrate to ``t_end`` (or until steady), recording monitors and snapshots."""
    opts = options or RunOptions()
    state = initial_state(initial, params, N)
    if np.any(state.u.values < 0):
        raise ConfigurationError("initial cell density has negative entries")
    dx = state.grid.dx
    u = np.array(state.u.values, dtype=float)
    v = np.array(state.v.values, dtype=float)
    mass0 = math.fsum(u) * dx
    stats = RunStats(initial_mass=mass0)
    monitors = Monitors()
    monitors.record(state, opts.order)
    snapshots = [state] if opts.snapshot_every else []
    next_snap = opts.snapshot_every if opts.snapshot_every else math.inf
    t = state.t
    steady_count = 0
    status = "t_end"
    n_chunk = 0
    while t < t_end:
        n_chunk += 1
        t_stop = min(state.t + n_chunk * opts.monitor_every, t_end)
        if t_stop <= t:
            continue
        t, steps, code, steady_count, chunk = K.advance(
            u, v, params.chi, dx, opts.order, INTEGRATORS[opts.integrator], opts.safety,
            t, t_stop, opts.max_steps - stats.steps,
            opts.steady_du if opts.stop_on_steady else -1.0, opts.steady_I, opts.steady_steps,
            steady_count, float(opts.flux_sign), opts.dt_min, mass0,
        )
        stats.absorb(steps, chunk)
        current = SolverState(t, Field(u, state.grid), Field(v, state.grid), params)
        status = _STATUS[code]
        if code in (K.STATUS_NONFINITE, K.STATUS_UNDERFLOW):
            raise IntegrationError(f"integration failed ({status}) at t = {t}", current, stats)
        monitors.record(current, opts.order)
        if t >= next_snap - 1e-12 or code != K.STATUS_DONE or t >= t_end:
            if opts.snapshot_every:
                snapshots.append(current)
            while next_snap <= t + 1e-12:
                next_snap += opts.snapshot_every
        if code != K.STATUS_DONE:
            break
    final = SolverState(t, Field(u, state.grid), Field(v, state.grid), params)
    return RunResult(final, monitors, snapshots, stats, status)
