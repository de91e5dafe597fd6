"""Acceptance suite: eleven numbered criteria with pass/fail and details.

The preset-based criteria share one set of simulations, computed by
:func:`run_presets` and passed in, so the suite integrates each scenario
once.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ModelParams, critical_chi, make_grid
from .energy import energy_limit, hierarchy_table, quadrature_energy, steady_energy, steady_energy_similar
from .errors import KSError
from .experiments import ScenarioResult, detect_plateaus, run_preset, slowest_transient
from .presets import PRESETS
from .solver import RunOptions, SolverState, run
from .steady import admissible_L0, asymmetric_two_bump, half_bump, project_profile, similar_bump, solve_support_length


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.number:2d} ({self.title}): {self.detail}"

    def as_dict(self):
        return {"number": self.number, "title": self.title, "passed": self.passed, "detail": self.detail}


def observed_order(hs, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    return float(np.polyfit(np.log(hs), np.log(np.abs(errors)), 1)[0])


def _preset_job(args):
    name, n_scale, flux_sign = args
    N = None
    if n_scale != 1.0:
        N = max(8, int(round(PRESETS[name].config.N * n_scale)))
    return run_preset(name, N=N, flux_sign=flux_sign)


def run_presets(names=None, n_scale: float = 1.0, flux_sign: float = 1.0, workers: int = 1) -> dict[str, ScenarioResult]:
    names = list(names or PRESETS)
    jobs = [(n, n_scale, flux_sign) for n in names]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_preset_job, jobs))
    else:
        results = [_preset_job(j) for j in jobs]
    return dict(zip(names, results))


def criterion_1() -> CriterionResult:
    want = {1: 2.0, 2: 5.0, 3: 10.0, 4: 17.0}
    got = {k: critical_chi(k, math.pi) for k in want}
    err = max(abs(got[k] - want[k]) for k in want)
    return CriterionResult(1, "critical values", err <= 1e-12, f"chi_k(pi) = {list(got.values())}, max error {err:.1e}")


def criterion_2() -> CriterionResult:
    cases = [  # (chi, ell, reference, tolerance)
        (4.0, math.pi, 1.22, 5e-3),
        (10.0, 3.0, 0.6326, 5e-4),
        (10.0, 2.0, 0.6449, 5e-4),
        (20.0, 5.0, 0.4121, 5e-4),
    ]
    parts, ok = [], True
    for chi, ell, ref, tol in cases:
        l = solve_support_length(math.sqrt(chi - 1.0), ell)
        ok &= abs(l - ref) <= tol
        parts.append(f"l*({chi:g}, {ell:.4g}) = {l:.5f} vs {ref}")
    return CriterionResult(2, "support lengths", ok, "; ".join(parts))


def criterion_3() -> CriterionResult:
    p = ModelParams(50.0, 6.0)
    lo, hi = admissible_L0(p)
    w = math.sqrt(49.0)
    ok = abs(lo - 0.4488) <= 5e-4 and abs(hi - 5.5512) <= 5e-4
    ok &= abs(lo - math.pi / w) <= 1e-12 and abs(hi - (6.0 - math.pi / w)) <= 1e-12
    return CriterionResult(3, "asymmetric window", ok, f"L0 in ({lo:.6f}, {hi:.6f})")


def criterion_4() -> CriterionResult:
    A = half_bump(ModelParams(20.0, 5.0, 1.0)).A
    return CriterionResult(4, "amplitude", abs(A - 3.1668) <= 2e-3, f"A = {A:.6f} vs 3.1668")


def criterion_5() -> CriterionResult:
    L, chis = 6.0, (5.0, 10.0, 20.0, 40.0, 80.0)
    order_ok, parts = True, []
    kmax = 0
    for chi in chis:
        p = ModelParams(chi, L)
        try:
            table = hierarchy_table(p, p.max_modes())
        except KSError as exc:
            order_ok = False
            parts.append(str(exc))
            continue
        kmax = max(kmax, p.max_modes())
        parts.append(f"chi={chi:g}: {len(table) - 1} bump levels ordered")
    big = ModelParams(1e4, L)
    gaps = [abs(steady_energy_similar(big, k) - energy_limit(k, L)) for k in range(1, kmax + 1)]
    limit_ok = max(gaps) <= 1e-3
    parts.append(
        f"at chi=1e4 |E(u_k) + 1/(k tanh(6/k))| for k=1..{kmax}: max {max(gaps):.3e} (k=1: {gaps[0]:.3e}), limit 1e-3"
    )
    return CriterionResult(5, "energy hierarchy and limit", order_ok and limit_ok, "; ".join(parts))


def criterion_6(Ns=(100, 200, 400, 800)) -> CriterionResult:
    prof = half_bump(ModelParams(4.0, math.pi))
    closed = steady_energy(prof)
    errs = [quadrature_energy(prof, N) - closed for N in Ns]
    rate = observed_order([math.pi / N for N in Ns], errs)
    return CriterionResult(
        6, "closed form vs quadrature", rate >= 1.0,
        f"errors {', '.join(f'{e:.2e}' for e in errs)} on N={list(Ns)}, order {rate:.2f}",
    )


def well_balanced_drift(profile, Ns, steps: int = 1000) -> list[float]:
    """Max-norm change of the projected profile after ``steps`` Euler steps."""
    drifts = []
    for N in Ns:
        u, v = project_profile(profile, make_grid(profile.L, N))
        state = SolverState(0.0, u, v, profile.params)
        opts = RunOptions(max_steps=steps, stop_on_steady=False, monitor_every=1e30)
        res = run(state, profile.params, math.inf, opts)
        drifts.append(float(np.max(np.abs(res.state.u.values - u.values))))
    return drifts


def criterion_7(results: dict[str, ScenarioResult], Ns=(100, 200, 400, 800)) -> CriterionResult:
    bad = []
    worst_mass = worst_inc = 0.0
    min_u = math.inf
    for name, r in results.items():
        structural = [c for c in r.checks if c.name in ("mass-conservation", "positivity", "energy-decay", "integration")]
        bad += [f"{name}:{c.name}" for c in structural if not c.passed]
        worst_mass = max(worst_mass, r.stats.relative_mass_drift)
        worst_inc = max(worst_inc, r.stats.max_energy_increase)
        min_u = min(min_u, r.stats.min_u)
    profiles = {
        "half-bump chi=4": half_bump(ModelParams(4.0, math.pi)),
        "asymmetric chi=10 L=5 L0=3": asymmetric_two_bump(ModelParams(10.0, 5.0), 3.0),
    }
    notes = []
    for label, prof in profiles.items():
        rate = observed_order([prof.L / N for N in Ns], well_balanced_drift(prof, Ns))
        notes.append(f"{label} drift order {rate:.2f}")
        if rate < 1.0:
            bad.append(f"well-balanced {label}")
    detail = (
        f"{len(results)} presets: max relative mass drift {worst_mass:.2e}, min u {min_u:.1e}, "
        f"max one-step E increase {worst_inc:.1e}; " + "; ".join(notes)
    )
    if bad:
        detail += "; failing: " + ", ".join(bad)
    return CriterionResult(7, "scheme structure", not bad, detail)


def decay_fit(times, deviations) -> tuple[float, float]:
    """Exponential rate and R^2 of a log-linear fit."""
    t = np.asarray(times, dtype=float)
    y = np.log(np.asarray(deviations, dtype=float))
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) @ (y - y.mean())))
    return -float(slope), r2


def criterion_8(results: dict[str, ScenarioResult]) -> CriterionResult:
    r = results["fig2"]
    if r.result is None:
        return CriterionResult(8, "global attractor below chi_1", False, f"run failed: {r.error}")
    ubar = r.result.state.params.ubar
    snaps = r.result.snapshots
    times = np.array([s.t for s in snaps])
    dev = np.array([np.max(np.abs(s.u.values - ubar)) for s in snaps])
    final = dev[-1]
    tail = (times >= 0.5 * times[-1]) & (dev > 0)
    rate, r2 = decay_fit(times[tail], dev[tail])
    ok = final < 1e-6 and rate > 0 and r2 > 0.99
    return CriterionResult(
        8, "global attractor below chi_1", ok,
        f"final |u - ubar|_inf = {final:.2e} at t = {times[-1]:.1f}; tail rate {rate:.4f}, R^2 {r2:.5f}",
    )


CRITERION_9 = {
    "fig9": "constant",
    "fig10-a1.2": "similar-2-plus",
    "fig10-a0.8": "half-bump-left",
    "meta-i": "half-bump-left",
    "meta-ii": "similar-2-minus",
    "meta-iii": "similar-2-plus",
}


def criterion_9(results: dict[str, ScenarioResult]) -> CriterionResult:
    parts, ok = [], True
    for name, want in CRITERION_9.items():
        c = results[name].classification
        got = c.label if c else "failed"
        res = c.residual if c else math.inf
        ok &= got == want and res < 5e-2
        parts.append(f"{name}: {got} ({res:.1e})")
    return CriterionResult(9, "dynamic branch selection", ok, "; ".join(parts))


def criterion_10(results: dict[str, ScenarioResult]) -> CriterionResult:
    parts, ok = [], True
    for name in ("meta-i", "meta-ii"):
        r = results[name]
        if r.result is None:
            ok = False
            parts.append(f"{name}: run failed")
            continue
        m = r.result.monitors
        plateaus = detect_plateaus(m.t, m.E_delta)
        target = r.E_closed_half
        gap = abs(r.E_final - target) if target is not None else math.inf
        ok &= len(plateaus) >= 2 and gap <= 1e-3
        parts.append(
            f"{name}: {len(plateaus)} plateau(s) (slowest transient rate {slowest_transient(m.t, m.E_delta):.1e}), "
            f"|E_final - E_closed/2| = {gap:.1e}"
        )
    return CriterionResult(10, "metastability signature", ok, "; ".join(parts))


def criterion_11() -> CriterionResult:
    p = ModelParams(1e4, 3.0)
    ratio = half_bump(p).umax / p.omega
    q = ModelParams(40.0, math.pi)
    norms = [similar_bump(q, k).umax for k in range(1, 6)]
    decreasing = all(b < a for a, b in zip(norms, norms[1:]))
    ok = 0.98 < ratio < 1.02 and decreasing
    return CriterionResult(
        11, "norm asymptotics", ok,
        f"max u / omega = {ratio:.5f} at chi=1e4, L=3; norms k=1..5 at chi=40: "
        + ", ".join(f"{x:.4f}" for x in norms),
    )


def validate(n_scale: float = 1.0, flux_sign: float = 1.0, workers: int = 1, results=None) -> dict:
    """Run every criterion; returns ``{"passed", "criteria", "presets"}``.

    ``n_scale`` rescales every grid (0.5 halves N); ``flux_sign = -1``
    reverses the fluxes as a fault-injection check.
    """
    if results is None:
        results = run_presets(n_scale=n_scale, flux_sign=flux_sign, workers=workers)
    Ns = tuple(max(8, int(round(N * n_scale))) for N in (100, 200, 400, 800))
    crits = [
        criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6(Ns),
        criterion_7(results, Ns), criterion_8(results), criterion_9(results), criterion_10(results), criterion_11(),
    ]
    return {
        "passed": all(c.passed for c in crits),
        "n_scale": n_scale,
        "flux_sign": flux_sign,
        "criteria": [c.as_dict() for c in crits],
        "presets": {name: r.summary() for name, r in results.items()},
    }
