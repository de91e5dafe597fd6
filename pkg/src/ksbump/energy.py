"""Free energy, relative entropy and closed-form energies of steady states.

Conventions: :func:`free_energy` is ``(1/chi) int u^2 + int (v_x^2 + v^2 - 2uv)``.
The solver's monitor (``ksbump.solver.discrete_energy``) is exactly half of it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Field, Grid, ModelParams, critical_chi, make_grid
from .errors import BranchNotPresentError, ConfigurationError, KSError
from .steady import (
    ConstantProfile,
    CosineFamilyProfile,
    SteadyProfile,
    _SegmentedProfile,
    project_profile,
    similar_bump,
    solve_support_length,
)


def _unpack(u, v):
    if isinstance(u, Field) and isinstance(v, Field):
        if u.grid != v.grid:
            raise ConfigurationError("u and v live on different grids")
        return u.values, v.values, u.grid.dx
    raise ConfigurationError("free energy needs Field inputs (cell averages with a grid)")


def free_energy(u: Field, v: Field, chi: float) -> float:
    """Discrete free energy with the gradient taken over interior interfaces."""
    uu, vv, dx = _unpack(u, v)
    grad = np.diff(vv) / dx
    return float(dx * (np.dot(uu, uu) / chi + np.dot(grad, grad) + np.dot(vv, vv) - 2.0 * np.dot(uu, vv)))


def steady_energy_constant(params: ModelParams) -> float:
    ubar = params.ubar
    return ubar * ubar * params.L * (1.0 / params.chi - 1.0)


def steady_energy_similar(params: ModelParams, k: int) -> float:
    """Energy of the k-half-bump similar state, ``w^3 M^2 / (chi k (tan z - z))``."""
    chik = critical_chi(k, params.L)
    if not params.chi > chik:
        raise BranchNotPresentError(f"no {k}-half-bump state at chi = {params.chi} (chi_{k} = {chik})")
    omega = params.omega
    z = omega * solve_support_length(omega, params.L / k)
    return omega**3 * params.M**2 / (params.chi * k * (math.tan(z) - z))


def energy_limit(k: int, L: float, M: float = 1.0) -> float:
    """Large-chi limit ``-M^2 / (k tanh(L/k))`` of the k-half-bump energy."""
    if k < 1 or not L > 0:
        raise ValueError("need k >= 1 and L > 0")
    return -(M**2) / (k * math.tanh(L / k))


def steady_energy(profile: SteadyProfile) -> float:
    """``(1/chi) sum_i lambda_i m_i`` over the support components."""
    p = profile.params
    if isinstance(profile, (ConstantProfile, CosineFamilyProfile)):
        # u - chi v equals ubar - chi vbar on the whole interval
        return (p.ubar - p.chi * p.vbar) * p.M / p.chi
    if isinstance(profile, _SegmentedProfile):
        return math.fsum(s.cell.lam * s.cell.mass for s in profile.segments) / p.chi
    raise TypeError(f"no closed-form energy for {type(profile).__name__}")


def steady_energy_asymmetric(profile) -> float:
    return steady_energy(profile)


def quadrature_energy(profile: SteadyProfile, N: int) -> float:
    """:func:`free_energy` of the cell-averaged profile on an N-cell grid."""
    u, v = project_profile(profile, make_grid(profile.L, N))
    return free_energy(u, v, profile.params.chi)


@dataclass(frozen=True)
class EntropyResult:
    value: float
    mass_error: float
    mass_mismatch: bool

    def __float__(self):
        return self.value


def relative_entropy(u: Field, v: Field, params: ModelParams, mass_tol: float = 1e-8) -> EntropyResult:
    """``sum u ln(u/ubar) dx + (chi/2) sum (Dv)^2 dx`` with ``0 ln 0 = 0``."""
    uu, vv, dx = _unpack(u, v)
    ubar = params.ubar
    pos = uu > 0
    ent = dx * float(np.sum(uu[pos] * np.log(uu[pos] / ubar)))
    grad = np.diff(vv) / dx
    value = ent + 0.5 * params.chi * dx * float(np.dot(grad, grad))
    mass_error = math.fsum(uu) * dx - params.M
    mismatch = abs(mass_error) > mass_tol * max(1.0, params.M)
    if mismatch:
        warnings.warn(f"relative entropy: mass differs from M by {mass_error:.3e}", stacklevel=2)
    return EntropyResult(value, mass_error, mismatch)


@dataclass(frozen=True)
class EnergyReport:
    branch: str
    k: int
    chi: float
    E: float
    E_closed: float
    E_limit: float | None = None
    tolerance: float | None = None


def hierarchy_table(params: ModelParams, kmax: int, N: int | None = None) -> list[EnergyReport]:
    """Closed-form energies of the similar states k = 1..kmax and the constant.

    With ``N`` the energy is also evaluated by quadrature on an N-cell grid
    (``E``); otherwise ``E`` repeats the closed form.  Raises if the ordering
    E(1) < ... < E(k) < E(constant) is violated.
    """
    if not params.chi > critical_chi(1, params.L):
        raise BranchNotPresentError(f"no bump states at chi = {params.chi} <= chi_1")
    kmax = min(kmax, params.max_modes())
    reports = []
    for k in range(1, kmax + 1):
        closed = steady_energy_similar(params, k)
        if N is not None:
            quad, tol = quadrature_energy(similar_bump(params, k), N), 10.0 * params.L / N
        else:
            quad, tol = closed, 0.0
        reports.append(EnergyReport("similar-bump", k, params.chi, quad, closed, energy_limit(k, params.L, params.M), tol))
    closed = steady_energy_constant(params)
    reports.append(EnergyReport("constant", 0, params.chi, closed, closed, None, 0.0))
    reports.sort(key=lambda r: r.E_closed)
    order = [r.k for r in reports]
    expected = list(range(1, kmax + 1)) + [0]
    if order != expected or any(b.E_closed - a.E_closed <= 0 for a, b in zip(reports, reports[1:])):
        raise KSError(f"energy hierarchy violated at chi = {params.chi}: order {order}")
    return reports


def grid_for(L: float, N: int) -> Grid:
    return make_grid(L, N)
