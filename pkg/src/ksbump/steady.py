"""Closed-form steady states of the Keller-Segel system with quadratic diffusion.

Every nonconstant branch is assembled from one building block: the monotone
half-bump on a cell of length ``ell`` with Neumann ends,

    u(y) = A (cos(w y) - cos(w l)),           0 < y < l
    v(y) = A (cos(w y) / chi - cos(w l)),     0 < y < l
    v(y) = B cosh(y - ell),                   l < y < ell

where ``w = sqrt(chi - 1)`` and ``l`` is the support length.  Cells are glued
end to end (reflecting every other one); two neighbouring cells either share
a vacuum end, where continuity of v forces a common ``B``, or share a bump
end, which forces identical cells.  Hence all cells of a steady state share
one ``B`` and the mass of each cell is proportional to its weight
``alpha(ell) = (l - tan(w l)/w) cosh(ell - l)``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams, critical_chi, project
from .errors import BranchNotPresentError, DomainError, NoRootError

LEFT = "left"
RIGHT = "right"
PLUS = "plus"
MINUS = "minus"

_BRACKET_MARGIN = 1e-13
_BISECTION_WIDTH = 1e-14


def _support_residual(lval, omega, ell):
    return math.tan(omega * lval) / omega - math.tanh(lval - ell)


def solve_support_length(omega: float, ell: float) -> float:
    """Support length of the half-bump on a cell of length ``ell``.

    Solves ``tan(omega*l)/omega = tanh(l - ell)`` for the unique root in
    ``(pi/(2 omega), pi/omega)`` by bisection followed by two Newton steps.
    The residual is increasing on that interval, so higher roots are never
    reached.
    """
    if not (omega > 0 and ell > 0):
        raise DomainError(f"need omega > 0 and ell > 0, got omega={omega!r}, ell={ell!r}")
    if not omega > math.pi / ell:
        raise NoRootError(
            f"no half-bump on a cell of length {ell}: omega = {omega} <= pi/ell = {math.pi / ell}"
        )
    period = math.pi / omega
    delta = _BRACKET_MARGIN * period
    lo, hi = 0.5 * period + delta, period - delta
    if _support_residual(hi, omega, ell) <= 0.0:
        hi = period
        if _support_residual(hi, omega, ell) <= 0.0:
            raise NoRootError(f"support-length root not bracketed for omega={omega}, ell={ell}")
    width = _BISECTION_WIDTH * period
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _support_residual(mid, omega, ell) > 0.0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    for _ in range(2):
        # d/dl [tan(wl)/w - tanh(l - ell)] = tan^2(wl) + tanh^2(l - ell) > 0
        slope = math.tan(omega * root) ** 2 + math.tanh(root - ell) ** 2
        if slope <= 0.0:
            break
        candidate = root - _support_residual(root, omega, ell) / slope
        if not lo <= candidate <= hi:
            break
        root = candidate
    return root


@dataclass(frozen=True)
class HalfCell:
    """One half-bump on a Neumann cell of length ``ell`` carrying ``mass``."""

    chi: float
    ell: float
    mass: float
    lstar: float
    A: float
    B: float
    lam: float

    @property
    def omega(self) -> float:
        return math.sqrt(self.chi - 1.0)

    @property
    def z(self) -> float:
        return self.omega * self.lstar

    @property
    def umax(self) -> float:
        return self.A * (1.0 - math.cos(self.z))

    def u(self, y):
        y = np.asarray(y, dtype=float)
        w = self.omega
        # mirrored cells map x = end - l* back to l* only up to a few ulps
        inside = y < self.lstar - 4.0 * np.spacing(self.ell)
        return np.where(inside, self.A * (np.cos(w * np.minimum(y, self.lstar)) - math.cos(self.z)), 0.0)

    def v(self, y):
        y = np.asarray(y, dtype=float)
        w = self.omega
        inner = self.A * (np.cos(w * np.minimum(y, self.lstar)) / self.chi - math.cos(self.z))
        outer = self.B * np.cosh(y - self.ell)
        return np.where(y < self.lstar, inner, outer)


def alpha_weight(omega: float, ell: float) -> float:
    """Mass weight of a cell: ``(l - tan(w l)/w) cosh(ell - l)`` (positive)."""
    lval = solve_support_length(omega, ell)
    return (lval - math.tan(omega * lval) / omega) * math.cosh(ell - lval)


def half_cell(chi: float, ell: float, mass: float) -> HalfCell:
    omega = math.sqrt(chi - 1.0)
    lval = solve_support_length(omega, ell)
    z = omega * lval
    A = mass / (math.sin(z) / omega - lval * math.cos(z))
    q = math.tan(z) / omega - lval
    lam = mass * omega**2 / q
    B = mass * (1.0 / chi - 1.0) / (q * math.cosh(lval - ell))
    return HalfCell(chi=chi, ell=ell, mass=mass, lstar=lval, A=A, B=B, lam=lam)


@dataclass(frozen=True)
class Segment:
    """A half-cell placed on ``[start, end]``; ``anchor`` is the bump end."""

    start: float
    end: float
    cell: HalfCell
    anchor: str

    def local(self, x):
        return x - self.start if self.anchor == LEFT else self.end - x


class SteadyProfile:
    """Common interface: vectorised ``u(x)``, ``v(x)`` and kink locations."""

    params: ModelParams
    branch: str

    @property
    def L(self) -> float:
        return self.params.L

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def u(self, x):
        raise NotImplementedError

    def v(self, x):
        raise NotImplementedError

    @property
    def umax(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _base_dict(profile, **extra):
    p = profile.params
    out = {
        "branch": profile.branch,
        "chi": p.chi,
        "L": p.L,
        "M": p.M,
        "k": None,
        "parity": None,
        "lstar": None,
        "A": None,
        "B": None,
        "lambda": None,
        "masses": None,
        "L0": None,
    }
    out.update(extra)
    return out


@dataclass(frozen=True)
class ConstantProfile(SteadyProfile):
    params: ModelParams
    branch: str = field(default="constant", init=False)

    def u(self, x):
        return np.full(np.shape(x), self.params.ubar)

    def v(self, x):
        return np.full(np.shape(x), self.params.vbar)

    @property
    def umax(self) -> float:
        return self.params.ubar

    def to_dict(self) -> dict:
        return _base_dict(self, k=0, masses=[self.params.M])


@dataclass(frozen=True)
class CosineFamilyProfile(SteadyProfile):
    """``(ubar, vbar) + eps (chi_k, 1) cos(k pi x / L)`` at ``chi = chi_k``."""

    params: ModelParams
    k: int
    eps: float
    branch: str = field(default="cosine", init=False)

    def __post_init__(self):
        chik = critical_chi(self.k, self.params.L)
        if abs(self.params.chi - chik) > 1e-12 * chik:
            raise BranchNotPresentError(
                f"cosine family of mode {self.k} exists only at chi = {chik}, got {self.params.chi}"
            )
        bound = self.params.ubar / chik
        if abs(self.eps) > bound * (1.0 + 1e-12):
            raise DomainError(f"eps must lie in [-{bound}, {bound}], got {self.eps}")

    @property
    def touches_zero(self) -> bool:
        return abs(self.eps) >= self.params.ubar / self.params.chi * (1.0 - 1e-12)

    def _mode(self, x):
        return np.cos(self.k * math.pi * np.asarray(x, dtype=float) / self.params.L)

    def u(self, x):
        return np.maximum(self.params.ubar + self.eps * self.params.chi * self._mode(x), 0.0)

    def v(self, x):
        return self.params.vbar + self.eps * self._mode(x)

    @property
    def umax(self) -> float:
        return self.params.ubar + abs(self.eps) * self.params.chi

    def to_dict(self) -> dict:
        d = _base_dict(self, k=self.k, masses=[self.params.M])
        d["eps"] = self.eps
        return d


def cosine_family(L: float, M: float, k: int, eps: float) -> CosineFamilyProfile:
    return CosineFamilyProfile(ModelParams(critical_chi(k, L), L, M), k, eps)


class _SegmentedProfile(SteadyProfile):
    segments: tuple[Segment, ...]

    def _locate(self, x):
        starts = np.array([s.start for s in self.segments])
        return np.clip(np.searchsorted(starts, x, side="right") - 1, 0, len(self.segments) - 1)

    def _evaluate(self, x, which):
        x = np.asarray(x, dtype=float)
        idx = self._locate(x)
        out = np.zeros(x.shape)
        for i, seg in enumerate(self.segments):
            sel = idx == i
            if np.any(sel):
                y = np.clip(seg.local(x[sel]), 0.0, seg.cell.ell)
                out[sel] = getattr(seg.cell, which)(y)
        return out

    def u(self, x):
        return self._evaluate(x, "u")

    def v(self, x):
        return self._evaluate(x, "v")

    @property
    def breakpoints(self):
        pts = []
        for seg in self.segments:
            lval = seg.cell.lstar
            pts.append(seg.start + lval if seg.anchor == LEFT else seg.end - lval)
            pts.extend([seg.start, seg.end])
        return tuple(sorted(set(pts)))

    @property
    def umax(self) -> float:
        return max(seg.cell.umax for seg in self.segments)

    @property
    def components(self) -> list[tuple[float, float, float, float]]:
        """Connected components of the support: ``(left, right, mass, lambda)``."""
        comps = []
        for seg in self.segments:
            c = seg.cell
            if seg.anchor == LEFT:
                lo, hi = seg.start, seg.start + c.lstar
            else:
                lo, hi = seg.end - c.lstar, seg.end
            if comps and abs(comps[-1][1] - lo) < 1e-12 * self.L and seg.anchor == LEFT:
                a, _, m, lam = comps[-1]
                comps[-1] = (a, hi, m + c.mass, lam)
            else:
                comps.append((lo, hi, c.mass, c.lam))
        return comps

    @property
    def lambdas(self) -> list[float]:
        return [c[3] for c in self.components]


def _build_segments(params: ModelParams, lengths: Sequence[float], first_anchor: str, total_mass: float):
    omega = params.omega
    lengths = [float(x) for x in lengths]
    if abs(sum(lengths) - params.L) > 1e-9 * params.L:
        raise DomainError(f"cell lengths sum to {sum(lengths)}, expected L = {params.L}")
    for ell in lengths:
        if not omega > math.pi / ell:
            raise BranchNotPresentError(
                f"cell of length {ell} admits no half-bump at chi = {params.chi} (needs chi > {critical_chi(1, ell)})"
            )
    anchors = [first_anchor if i % 2 == 0 else (RIGHT if first_anchor == LEFT else LEFT) for i in range(len(lengths))]
    for i in range(len(lengths) - 1):
        if anchors[i] == RIGHT and abs(lengths[i] - lengths[i + 1]) > 1e-12 * params.L:
            raise DomainError(
                f"cells {i} and {i + 1} share a bump end and must have equal lengths, "
                f"got {lengths[i]} and {lengths[i + 1]}"
            )
    alphas = {ell: alpha_weight(omega, ell) for ell in set(lengths)}
    total_alpha = math.fsum(alphas[ell] for ell in lengths)
    cells = {ell: half_cell(params.chi, ell, total_mass * alphas[ell] / total_alpha) for ell in set(lengths)}
    segments = []
    start = 0.0
    for i, ell in enumerate(lengths):
        end = params.L if i == len(lengths) - 1 else start + ell
        segments.append(Segment(start, end, cells[ell], anchors[i]))
        start = end
    return tuple(segments), [alphas[ell] for ell in lengths]


@dataclass(frozen=True)
class HalfBumpProfile(_SegmentedProfile):
    """Monotone boundary spike supported on ``[0, l*]`` or ``[L - l*, L]``."""

    params: ModelParams
    orientation: str
    lstar: float = field(init=False)
    A: float = field(init=False)
    B: float = field(init=False)
    lam: float = field(init=False)
    segments: tuple = field(init=False, repr=False)
    branch: str = field(default="half-bump", init=False)

    def __post_init__(self):
        if self.orientation not in (LEFT, RIGHT):
            raise DomainError(f"orientation must be 'left' or 'right', got {self.orientation!r}")
        p = self.params
        if not p.chi > critical_chi(1, p.L):
            raise BranchNotPresentError(f"half-bumps need chi > chi_1 = {critical_chi(1, p.L)}, got {p.chi}")
        cell = half_cell(p.chi, p.L, p.M)
        object.__setattr__(self, "segments", (Segment(0.0, p.L, cell, self.orientation),))
        for name, value in (("lstar", cell.lstar), ("A", cell.A), ("B", cell.B), ("lam", cell.lam)):
            object.__setattr__(self, name, value)

    @property
    def z(self) -> float:
        return self.params.omega * self.lstar

    def to_dict(self) -> dict:
        d = _base_dict(self, k=1, lstar=self.lstar, A=self.A, B=self.B, masses=[self.params.M])
        d["lambda"] = self.lam
        d["orientation"] = self.orientation
        return d


def half_bump(params: ModelParams, orientation: str = LEFT) -> HalfBumpProfile:
    return HalfBumpProfile(params, orientation)


@dataclass(frozen=True)
class SimilarBumpProfile(_SegmentedProfile):
    """``k`` identical half-bumps obtained by repeated reflection of one cell."""

    params: ModelParams
    k: int
    parity: str
    lk: float = field(init=False)
    Ak: float = field(init=False)
    Bk: float = field(init=False)
    lam: float = field(init=False)
    segments: tuple = field(init=False, repr=False)
    branch: str = field(default="similar-bump", init=False)

    def __post_init__(self):
        p = self.params
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        if self.parity not in (PLUS, MINUS):
            raise DomainError(f"parity must be 'plus' or 'minus', got {self.parity!r}")
        chik = critical_chi(self.k, p.L)
        if not p.chi > chik:
            raise BranchNotPresentError(
                f"{self.k} similar half-bumps need chi > chi_{self.k} = {chik}, got {p.chi}"
            )
        segs, _ = _build_segments(p, [p.L / self.k] * self.k, LEFT if self.parity == PLUS else RIGHT, p.M)
        object.__setattr__(self, "segments", segs)
        cell = segs[0].cell
        for name, value in (("lk", cell.lstar), ("Ak", cell.A), ("Bk", cell.B), ("lam", cell.lam)):
            object.__setattr__(self, name, value)

    @property
    def zk(self) -> float:
        return self.params.omega * self.lk

    def to_dict(self) -> dict:
        d = _base_dict(
            self, k=self.k, parity=self.parity, lstar=self.lk, A=self.Ak, B=self.Bk,
            masses=[s.cell.mass for s in self.segments],
        )
        d["lambda"] = self.lam
        return d


def similar_bump(params: ModelParams, k: int, parity: str = PLUS) -> SimilarBumpProfile:
    return SimilarBumpProfile(params, k, parity)


@dataclass(frozen=True)
class AsymmetricBumpProfile(_SegmentedProfile):
    """Two boundary spikes of unequal mass joined through a vacuum at ``L0``."""

    params: ModelParams
    L0: float
    lstar: float = field(init=False)
    lstarstar: float = field(init=False)
    m1: float = field(init=False)
    m2: float = field(init=False)
    Al: float = field(init=False)
    Ar: float = field(init=False)
    Bl: float = field(init=False)
    Br: float = field(init=False)
    alpha1: float = field(init=False)
    alpha2: float = field(init=False)
    segments: tuple = field(init=False, repr=False)
    branch: str = field(default="asymmetric", init=False)

    def __post_init__(self):
        p = self.params
        chi2 = critical_chi(2, p.L)
        if not p.chi > chi2:
            raise BranchNotPresentError(f"asymmetric bumps need chi > chi_2 = {chi2}, got {p.chi}")
        lo, hi = admissible_L0(p)
        if not lo < self.L0 < hi:
            raise DomainError(f"L0 = {self.L0} outside the admissible interval ({lo}, {hi})", (lo, hi))
        segs, alphas = _build_segments(p, [self.L0, p.L - self.L0], LEFT, p.M)
        object.__setattr__(self, "segments", segs)
        left, right = segs[0].cell, segs[1].cell
        values = {
            "lstar": left.lstar, "lstarstar": right.lstar, "m1": left.mass, "m2": right.mass,
            "Al": left.A, "Ar": right.A, "Bl": left.B, "Br": right.B,
            "alpha1": alphas[0], "alpha2": alphas[1],
        }
        for name, value in values.items():
            object.__setattr__(self, name, value)

    @property
    def lam1(self) -> float:
        return self.segments[0].cell.lam

    @property
    def lam2(self) -> float:
        return self.segments[1].cell.lam

    def to_dict(self) -> dict:
        d = _base_dict(
            self, k=2, lstar=[self.lstar, self.lstarstar], A=[self.Al, self.Ar],
            B=[self.Bl, self.Br], masses=[self.m1, self.m2], L0=self.L0,
        )
        d["lambda"] = [self.lam1, self.lam2]
        return d


def admissible_L0(params: ModelParams) -> tuple[float, float]:
    """Open interval of interface positions for asymmetric two-bump states."""
    width = math.pi / params.omega
    return width, params.L - width


def asymmetric_two_bump(params: ModelParams, L0: float) -> AsymmetricBumpProfile:
    return AsymmetricBumpProfile(params, L0)


@dataclass(frozen=True)
class MultiBumpProfile(_SegmentedProfile):
    """General composite of alternating half-cells with the given lengths."""

    params: ModelParams
    cell_lengths: tuple[float, ...]
    first_anchor: str = LEFT
    label: str = "multi-bump"
    segments: tuple = field(init=False, repr=False)
    branch: str = field(default="multi-bump", init=False)

    def __post_init__(self):
        if self.first_anchor not in (LEFT, RIGHT):
            raise DomainError(f"first_anchor must be 'left' or 'right', got {self.first_anchor!r}")
        segs, _ = _build_segments(self.params, self.cell_lengths, self.first_anchor, self.params.M)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "cell_lengths", tuple(float(x) for x in self.cell_lengths))

    def to_dict(self) -> dict:
        comps = self.components
        d = _base_dict(
            self, k=len(self.segments),
            lstar=[s.cell.lstar for s in self.segments],
            A=[s.cell.A for s in self.segments],
            B=[s.cell.B for s in self.segments],
            masses=[c[2] for c in comps],
        )
        d["lambda"] = [c[3] for c in comps]
        d["cell_lengths"] = list(self.cell_lengths)
        d["first_anchor"] = self.first_anchor
        d["label"] = self.label
        return d


def multi_bump(params: ModelParams, cell_lengths: Sequence[float], first_anchor: str = LEFT, label: str = "multi-bump"):
    return MultiBumpProfile(params, tuple(cell_lengths), first_anchor, label)


def interior_variants(profile: AsymmetricBumpProfile) -> list[SteadyProfile]:
    """Mirror image and the two glued rearrangements of an asymmetric state.

    The glued states put two copies of the profile side by side on ``(0, 2L)``
    (total mass ``2M``): mirror-then-original joins the two large spikes into
    one interior bump, original-then-mirror joins the two small ones.
    """
    p = profile.params
    L0 = profile.L0
    doubled = ModelParams(p.chi, 2.0 * p.L, 2.0 * p.M)
    mirror = asymmetric_two_bump(p, p.L - L0)
    large = multi_bump(doubled, [p.L - L0, L0, L0, p.L - L0], LEFT, "large-interior")
    small = multi_bump(doubled, [L0, p.L - L0, p.L - L0, L0], LEFT, "small-interior")
    return [mirror, large, small]


@dataclass(frozen=True)
class LimitProfile(SteadyProfile):
    """Large-chi limit: a Dirac mass at x = 0 and ``v = B_inf cosh(x - L)``."""

    params: ModelParams
    branch: str = field(default="limit", init=False)

    @property
    def Binf(self) -> float:
        return self.params.ubar * self.params.L / math.sinh(self.params.L)

    def u(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x == 0.0, np.inf, 0.0)

    def v(self, x):
        return self.Binf * np.cosh(np.asarray(x, dtype=float) - self.params.L)

    @property
    def umax(self) -> float:
        return math.inf

    def to_dict(self) -> dict:
        return _base_dict(self, k=1, B=self.Binf, masses=[self.params.M])


def limit_profile(params: ModelParams) -> LimitProfile:
    return LimitProfile(params)


def eval_profile(profile: SteadyProfile, x):
    """Pointwise ``(u, v)``; raises :class:`DomainError` outside ``[0, L]``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(xa > profile.L) or np.any(~np.isfinite(xa)):
        raise DomainError(f"evaluation points must lie in [0, {profile.L}]")
    u, v = profile.u(xa), profile.v(xa)
    if xa.ndim == 0:
        return float(u), float(v)
    return u, v


def profile_from_dict(data: dict) -> SteadyProfile:
    """Rebuild a profile from :meth:`SteadyProfile.to_dict` output."""
    params = ModelParams(data["chi"], data["L"], data["M"])
    branch = data["branch"]
    if branch == "constant":
        return ConstantProfile(params)
    if branch == "cosine":
        return CosineFamilyProfile(params, int(data["k"]), float(data["eps"]))
    if branch == "half-bump":
        return half_bump(params, data.get("orientation", LEFT))
    if branch == "similar-bump":
        return similar_bump(params, int(data["k"]), data["parity"])
    if branch == "asymmetric":
        return asymmetric_two_bump(params, float(data["L0"]))
    if branch == "multi-bump":
        return multi_bump(params, data["cell_lengths"], data["first_anchor"], data.get("label", "multi-bump"))
    if branch == "limit":
        return limit_profile(params)
    raise DomainError(f"unknown branch {branch!r}")


def project_profile(profile: SteadyProfile, grid, order: int = 3):
    """Cell averages ``(u, v)`` of a profile, splitting cells at its kinks."""
    bps = profile.breakpoints
    return project(profile.u, grid, order, bps), project(profile.v, grid, order, bps)
