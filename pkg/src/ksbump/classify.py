"""Match a computed state against the analytic steady branches.

Every candidate branch at the state's (chi, L, M) is projected onto the same
grid and compared in relative L1 norm.  Parameter-free branches (constant,
half-bumps, similar bumps) are compared directly; the asymmetric two-spike
family and the cosine family at chi = chi_k are fitted over their free
parameter first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .core import Field, ModelParams, critical_chi, project
from .errors import KSError
from .steady import (
    LEFT,
    MINUS,
    PLUS,
    RIGHT,
    ConstantProfile,
    CosineFamilyProfile,
    admissible_L0,
    asymmetric_two_bump,
    half_bump,
    project_profile,
    similar_bump,
)

RESIDUAL_THRESHOLD = 5e-2
# an asymmetric fit must beat every parameter-free branch by this factor
ASYMMETRIC_MARGIN = 0.5
AT_CRITICAL_TOL = 1e-9


@dataclass(frozen=True)
class Candidate:
    label: str
    residual: float
    profile: object = field(repr=False, compare=False)
    parameter: float | None = None


@dataclass(frozen=True)
class Classification:
    label: str
    residual: float
    profile: object = field(repr=False, compare=False)
    parameter: float | None = None
    candidates: tuple = field(default=(), repr=False, compare=False)

    @property
    def classified(self) -> bool:
        return self.label != "unclassified"


def relative_l1(u: np.ndarray, ref: np.ndarray) -> float:
    scale = float(np.sum(np.abs(u)))
    return float(np.sum(np.abs(u - ref)) / scale) if scale > 0 else math.inf


def _residual(profile, u: Field) -> float:
    ref, _ = project_profile(profile, u.grid)
    return relative_l1(u.values, ref.values)


def _label(profile) -> str:
    if isinstance(profile, ConstantProfile):
        return "constant"
    if isinstance(profile, CosineFamilyProfile):
        return f"cosine-{profile.k}"
    name = profile.branch
    if name == "half-bump":
        return f"half-bump-{profile.orientation}"
    if name == "similar-bump":
        return f"similar-{profile.k}-{profile.parity}"
    if name == "asymmetric":
        return "asymmetric-2"
    return name


def _fixed_candidates(params: ModelParams):
    yield ConstantProfile(params)
    if params.chi <= critical_chi(1, params.L):
        return
    yield half_bump(params, LEFT)
    yield half_bump(params, RIGHT)
    for k in range(2, params.max_modes() + 1):
        yield similar_bump(params, k, PLUS)
        yield similar_bump(params, k, MINUS)


def _fit_asymmetric(params: ModelParams, u: Field) -> Candidate | None:
    if params.chi <= critical_chi(2, params.L):
        return None
    lo, hi = admissible_L0(params)
    pad = 1e-9 * params.L
    res = minimize_scalar(
        lambda L0: _residual(asymmetric_two_bump(params, L0), u),
        bounds=(lo + pad, hi - pad),
        method="bounded",
        options={"xatol": 1e-6 * params.L},
    )
    prof = asymmetric_two_bump(params, float(res.x))
    return Candidate("asymmetric-2", float(res.fun), prof, float(res.x))


def _fit_cosine(params: ModelParams, u: Field) -> list[Candidate]:
    out = []
    for k in range(1, params.max_modes() + 2):
        chik = critical_chi(k, params.L)
        if abs(params.chi - chik) > AT_CRITICAL_TOL:
            continue
        exact = params.with_chi(chik)
        mode = project(lambda x: np.cos(k * math.pi * x / params.L), u.grid).values
        bound = params.ubar / chik
        # u = ubar + eps chi_k cos(k pi x / L): linear least squares in eps
        eps = float(np.dot(u.values - params.ubar, mode) / (chik * np.dot(mode, mode)))
        eps = min(max(eps, -bound), bound)
        prof = CosineFamilyProfile(exact, k, eps)
        out.append(Candidate(f"cosine-{k}", _residual(prof, u), prof, eps))
    return out


def classify_final(u: Field, params: ModelParams, threshold: float = RESIDUAL_THRESHOLD) -> Classification:
    """Best-matching steady branch of the cell density ``u``.

    Returns ``"unclassified"`` when no candidate comes within ``threshold``
    (relative L1).  The asymmetric family contains the symmetric double spike
    at ``L0 = L/2``; it is only preferred when it fits clearly better.
    """
    if abs(u.grid.L - params.L) > 1e-12 * params.L:
        raise KSError("field grid does not match the model length")
    fixed = [Candidate(_label(p), _residual(p, u), p) for p in _fixed_candidates(params)]
    fixed += _fit_cosine(params, u)
    best = min(fixed, key=lambda c: c.residual)
    asym = _fit_asymmetric(params, u)
    candidates = list(fixed)
    if asym is not None:
        candidates.append(asym)
        if asym.residual < ASYMMETRIC_MARGIN * best.residual:
            best = asym
    candidates.sort(key=lambda c: c.residual)
    label = best.label if best.residual < threshold else "unclassified"
    return Classification(label, best.residual, best.profile, best.parameter, tuple(candidates))


@dataclass(frozen=True)
class ComponentFit:
    """Free two-parameter fit ``A (cos w (x - c) - cos w l)^+`` of one aggregate."""

    A: float
    lstar: float
    center: float
    residual: float


def fit_component(u: Field, params: ModelParams, threshold: float = 1e-10) -> ComponentFit:
    """Fit amplitude and support length of the aggregate holding ``max u``.

    Boundary aggregates are centred on the wall; interior ones get a free
    centre.  The fit uses cell averages of the model shape so it is not
    biased by the grid.
    """
    grid = u.grid
    x = grid.centers
    vals = u.values
    j = int(np.argmax(vals))
    pos = vals > threshold * vals[j]
    lo = j
    while lo > 0 and pos[lo - 1]:
        lo -= 1
    hi = j
    while hi < grid.N - 1 and pos[hi + 1]:
        hi += 1
    omega = params.omega
    at_left, at_right = lo == 0, hi == grid.N - 1
    if at_left and not at_right:
        c0, free_centre = 0.0, False
    elif at_right and not at_left:
        c0, free_centre = params.L, False
    else:
        c0, free_centre = float(x[j]), True
    width = (hi - lo + 1) * grid.dx
    l0 = min(max(width if not free_centre else 0.5 * width, 0.51 * math.pi / omega), 0.99 * math.pi / omega)
    A0 = vals[j] / max(1.0 - math.cos(omega * l0), 1e-12)

    def model(theta):
        A, l = theta[0], theta[1]
        c = theta[2] if free_centre else c0

        def shape(y):
            return A * np.maximum(np.cos(omega * (y - c)) - math.cos(omega * l), 0.0) * (np.abs(y - c) < l)

        return project(shape, grid, breakpoints=[c - l, c + l]).values

    theta0 = [A0, l0] + ([c0] if free_centre else [])
    lower = [0.0, 1e-6] + ([0.0] if free_centre else [])
    upper = [np.inf, math.pi / omega] + ([params.L] if free_centre else [])
    res = least_squares(lambda th: model(th) - vals, theta0, bounds=(lower, upper), x_scale="jac")
    A, l = float(res.x[0]), float(res.x[1])
    c = float(res.x[2]) if free_centre else c0
    return ComponentFit(A, l, c, relative_l1(vals, model(res.x)))
