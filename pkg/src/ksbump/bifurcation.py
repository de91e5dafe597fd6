"""Branch data for the bifurcation diagram of ``max u`` against chi."""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import ModelParams, critical_chi
from .energy import steady_energy_constant, steady_energy_similar
from .errors import BranchNotPresentError, ConfigurationError
from .steady import PLUS, solve_support_length, similar_bump

AT_CRITICAL_TOL = 1e-9
CSV_COLUMNS = ("chi", "branch", "k", "umax", "lk", "E_closed")


@dataclass(frozen=True)
class BranchPoint:
    chi: float
    branch: str  # "constant", "vertical" or "bump"
    k: int
    umax: float
    lk: float | None = None
    E: float | None = None

    def row(self):
        def fmt(x):
            return "" if x is None else repr(float(x))

        return (repr(float(self.chi)), self.branch, self.k, fmt(self.umax), fmt(self.lk), fmt(self.E))


def vertical_segment(k: int, params: ModelParams) -> tuple[float, float]:
    """Range of ``max u`` over the cosine family at ``chi = chi_k``.

    ``max u = ubar + |eps| chi_k`` with ``|eps| <= ubar / chi_k``, so the
    segment is ``[ubar, 2 ubar]`` whatever ``k`` is.
    """
    critical_chi(k, params.L)
    return params.ubar, 2.0 * params.ubar


def _at_critical(chi: float, chik: float) -> bool:
    return abs(chi - chik) <= AT_CRITICAL_TOL


def bump_point(params: ModelParams, k: int) -> BranchPoint:
    prof = similar_bump(params, k, PLUS)
    return BranchPoint(params.chi, "bump", k, prof.umax, prof.lk, steady_energy_similar(params, k))


def sweep(params: ModelParams, chi_grid: Sequence[float], kmax: int) -> list[BranchPoint]:
    """Constant branch, vertical segments and bump branches over ``chi_grid``.

    ``params`` supplies L and M; its chi is ignored.  A grid value within
    ``1e-9`` of some ``chi_k`` yields the two endpoints of the vertical
    segment instead of a bump point.
    """
    chis = np.asarray(chi_grid, dtype=float)
    if chis.ndim != 1 or np.any(np.diff(chis) < 0):
        raise ConfigurationError("chi grid must be a sorted one-dimensional sequence")
    if kmax < 1:
        raise ConfigurationError("kmax must be at least 1")
    points = []
    for chi in chis:
        p = params.with_chi(float(chi))
        e_const = steady_energy_constant(p)
        points.append(BranchPoint(p.chi, "constant", 0, p.ubar, None, e_const))
        for k in range(1, kmax + 1):
            chik = critical_chi(k, p.L)
            if _at_critical(p.chi, chik):
                lo, hi = vertical_segment(k, p)
                points.append(BranchPoint(p.chi, "vertical", k, lo, None, e_const))
                points.append(BranchPoint(p.chi, "vertical", k, hi, None, e_const))
            elif p.chi > chik:
                points.append(bump_point(p, k))
    return points


def support_curve(k: int, params: ModelParams, chi_grid: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Support length ``l_k*`` of one half-bump of the k-bump state along chi."""
    chis = np.asarray(chi_grid, dtype=float)
    chik = critical_chi(k, params.L)
    if np.any(chis <= chik):
        raise BranchNotPresentError(f"support curve of mode {k} needs chi > chi_{k} = {chik}")
    ell = params.L / k
    lks = np.array([solve_support_length(math.sqrt(c - 1.0), ell) for c in chis])
    return chis, lks


def norm_exponent(params: ModelParams, kmax: int) -> tuple[float, np.ndarray]:
    """Fitted ``p`` in ``max u_k ~ C k^(-p)`` over k = 1..kmax at fixed chi.

    Returns the exponent and the norms themselves.
    """
    kmax = min(kmax, params.max_modes())
    if kmax < 2:
        raise BranchNotPresentError("need at least two bump branches to fit an exponent")
    ks = np.arange(1, kmax + 1)
    norms = np.array([similar_bump(params, int(k)).umax for k in ks])
    slope = np.polyfit(np.log(ks), np.log(norms), 1)[0]
    return float(-slope), norms


def write_csv(points: Sequence[BranchPoint], path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for pt in points:
            writer.writerow(pt.row())
