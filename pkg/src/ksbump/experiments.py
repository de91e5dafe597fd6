"""Run configured scenarios, classify the outcome and write artifacts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classify import Classification, ComponentFit, classify_final, fit_component
from .config import GridSection, RunConfig
from .energy import steady_energy
from .errors import IntegrationError, KSError
from .presets import Expectation, get_preset
from .solver import RunOptions, RunResult, RunStats, run, write_snapshot_csv

PLATEAU_RTOL = 1e-6
MASS_RTOL = 1e-12
ENERGY_STEP_TOL = 1e-10
ENERGY_MATCH_TOL = 1e-3


def detect_plateaus(t, E, rtol: float = PLATEAU_RTOL) -> list[tuple[float, float]]:
    """Maximal windows of the sampled trace where ``|dE/dt| < rtol |E|``.

    The slope is the finite difference between consecutive samples; each
    window is returned as ``(t_start, t_end)``.
    """
    t = np.asarray(t, dtype=float)
    E = np.asarray(E, dtype=float)
    if t.size < 2:
        return []
    dt = np.diff(t)
    keep = dt > 0
    slope = np.zeros_like(dt)
    slope[keep] = np.diff(E)[keep] / dt[keep]
    flat = keep & (np.abs(slope) < rtol * np.abs(E[1:]))
    windows = []
    start = None
    for i, f in enumerate(flat):
        if f and start is None:
            start = t[i]
        elif not f and start is not None:
            windows.append((float(start), float(t[i])))
            start = None
    if start is not None:
        windows.append((float(start), float(t[-1])))
    return windows


def slowest_transient(t, E, rtol: float = PLATEAU_RTOL) -> float:
    """Smallest local minimum of ``|dE/dt| / |E|`` that is not flat at ``rtol``.

    Quasi-stationary stretches that the threshold misses show up here, so it
    tells how far the slowest such stretch is from counting as a plateau.
    """
    t, E = np.asarray(t, dtype=float), np.asarray(E, dtype=float)
    dt = np.diff(t)
    keep = dt > 0
    rates = np.abs(np.diff(E)[keep] / dt[keep]) / np.abs(E[1:][keep])
    if rates.size < 3:
        return math.nan
    inner = rates[1:-1]
    minima = inner[(inner <= rates[:-2]) & (inner <= rates[2:]) & (inner >= rtol)]
    return float(minima.min()) if minima.size else math.nan


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class ScenarioResult:
    name: str
    config: RunConfig
    expect: Expectation
    result: RunResult | None
    stats: RunStats
    classification: Classification | None
    fit: ComponentFit | None
    plateaus: list
    checks: list[Check] = field(default_factory=list)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def E_final(self) -> float | None:
        return self.result.monitors.E_delta[-1] if self.result else None

    @property
    def E_closed_half(self) -> float | None:
        if self.classification is None or not self.classification.classified:
            return None
        try:
            return 0.5 * steady_energy(self.classification.profile)
        except TypeError:
            return None

    def summary(self) -> dict:
        state = self.result.state if self.result else None
        p = self.config.model
        return {
            "preset": self.name,
            "final_branch_guess": self.classification.label if self.classification else "failed",
            "classification_residual": self.classification.residual if self.classification else None,
            "fitted_parameter": self.classification.parameter if self.classification else None,
            "umax": float(np.max(state.u.values)) if state else None,
            "lstar_fit": self.fit.lstar if self.fit else None,
            "A_fit": self.fit.A if self.fit else None,
            "center_fit": self.fit.center if self.fit else None,
            "E_final": self.E_final,
            "E_closed_half": self.E_closed_half,
            "t_final": state.t if state else None,
            "status": self.result.status if self.result else "failed",
            "error": self.error,
            "parameters": {
                "chi": p.chi,
                "L": p.L,
                "M": state.params.M if state else p.M,
                "N": self.config.N,
                "t_end": self.config.time.t_end,
                "safety": self.config.time.safety,
                "order": self.config.solver.order,
                "integrator": self.config.solver.integrator,
            },
            "stats": {
                "steps": self.stats.steps,
                "max_energy_increase": self.stats.max_energy_increase,
                "max_decay_slack": self.stats.max_decay_slack,
                "min_u": self.stats.min_u,
                "relative_mass_drift": self.stats.relative_mass_drift,
            },
            "plateaus": [list(w) for w in self.plateaus],
            "criteria": [c.as_dict() for c in self.checks],
        }


def _structure_checks(stats: RunStats) -> list[Check]:
    return [
        Check("mass-conservation", stats.relative_mass_drift <= MASS_RTOL,
              f"max relative mass drift {stats.relative_mass_drift:.3e} (limit {MASS_RTOL:g})"),
        Check("positivity", stats.min_u >= 0.0, f"min u over all steps {stats.min_u:.3e}"),
        Check("energy-decay", stats.max_energy_increase <= ENERGY_STEP_TOL,
              f"largest one-step increase of E_delta {stats.max_energy_increase:.3e} (limit {ENERGY_STEP_TOL:g})"),
    ]


def run_scenario(
    config: RunConfig,
    name: str = "custom",
    expect: Expectation | None = None,
    *,
    order: int | None = None,
    safety: float | None = None,
    N: int | None = None,
    flux_sign: float = 1.0,
    out_dir=None,
    formats=None,
) -> ScenarioResult:
    """Integrate ``config`` and evaluate the structural and expected-outcome checks."""
    expect = expect or Expectation()
    if N is not None:
        config = config.model_copy(update={"grid": GridSection(N=N)})
    state = config.initial_state()
    opts = RunOptions(
        order=order or config.solver.order,
        integrator=config.solver.integrator,
        safety=safety or config.time.safety,
        monitor_every=config.time.monitor_every,
        snapshot_every=config.time.snapshot_every,
        stop_on_steady=config.solver.stop_on_steady,
        flux_sign=flux_sign,
    )
    try:
        res = run(state, state.params, config.time.t_end, opts)
    except IntegrationError as exc:
        stats = exc.stats or RunStats(initial_mass=state.mass)
        out = ScenarioResult(name, config, expect, None, stats, None, None, [], error=str(exc))
        out.checks = _structure_checks(stats) + [Check("integration", False, str(exc))]
        _write(out, out_dir, formats or config.output.formats)
        return out

    params = res.state.params
    cls = classify_final(res.state.u, params)
    fit = None
    if params.chi > 1.0 and cls.label != "constant":
        try:
            fit = fit_component(res.state.u, params)
        except (KSError, ValueError):
            fit = None
    m = res.monitors
    plateaus = detect_plateaus(m.t, m.E_delta)
    out = ScenarioResult(name, config, expect, res, res.stats, cls, fit, plateaus)
    checks = _structure_checks(res.stats)
    if expect.labels:
        checks.append(Check("final-branch", cls.label in expect.labels,
                            f"classified {cls.label} (residual {cls.residual:.3e}), expected one of {list(expect.labels)}"))
    if expect.min_plateaus is not None:
        checks.append(Check("plateaus", len(plateaus) >= expect.min_plateaus,
                            f"{len(plateaus)} plateau(s) at rtol {PLATEAU_RTOL:g}, need {expect.min_plateaus}; "
                            f"slowest transient |dE/dt|/|E| = {slowest_transient(m.t, m.E_delta):.3e}"))
        target = out.E_closed_half
        ok = target is not None and abs(out.E_final - target) <= ENERGY_MATCH_TOL
        checks.append(Check("final-energy", ok, f"E_delta {out.E_final:.10f} vs closed form / 2 = {target}"))
    out.checks = checks
    _write(out, out_dir, formats or config.output.formats)
    return out


def run_preset(name: str, **kwargs) -> ScenarioResult:
    preset = get_preset(name)
    return run_scenario(preset.config, preset.name, preset.expect, **kwargs)


def _write(out: ScenarioResult, out_dir, formats):
    if out_dir is None:
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    if "csv" in formats and out.result is not None:
        out.result.monitors.write_csv(path / "monitors.csv")
        write_snapshot_csv(out.result.state, path / "final.csv")
        for i, snap in enumerate(out.result.snapshots):
            write_snapshot_csv(snap, path / f"snapshot_{i:04d}.csv")
    if "json" in formats:
        (path / "summary.json").write_text(json.dumps(out.summary(), indent=2, default=_json_default) + "\n")
        (path / "config.json").write_text(out.config.to_json() + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")
