"""Named scenarios: initial data, run length and the expected final branch."""

from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig, parse_config
from .errors import ConfigurationError


@dataclass(frozen=True)
class Expectation:
    # accepted classification labels; empty means "demonstration only"
    labels: tuple[str, ...] = ()
    min_plateaus: int | None = None
    note: str = ""


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    config: RunConfig
    expect: Expectation


def _bump(center, height, half_width=1.0):
    return {"type": "parabolic-bump", "center": center, "height": height, "half_width": half_width}


def _gauss(amp, rate, center):
    return {"type": "gaussian", "amp": amp, "rate": rate, "center": center}


def _config(chi, L, u, v, t_end, N=None, snapshot_every=None):
    return parse_config(
        {
            "schema": 1,
            "model": {"chi": chi, "L": L, "M": 1.0},
            "grid": {"N": N},
            "initial": {"u": u, "v": v},
            "time": {"t_end": t_end, "snapshot_every": snapshot_every},
        }
    )


def _build() -> dict[str, ScenarioPreset]:
    out = {}

    def add(name, config, expect):
        out[name] = ScenarioPreset(name, config, expect)

    add(
        "fig2",
        # the slowest mode decays at about 0.07, so 1e-6 needs t ~ 200
        _config(1.5, "pi", [_bump(0, 1.5)], [_gauss(1.2, 3, 0), _gauss(1.2, 3, "pi")], 250.0, snapshot_every=5.0),
        Expectation(("constant",), note="convergence to the constant state below chi_1"),
    )
    for a in (1.0, 1.1, 1.3, 1.5):
        add(
            f"fig3-a{a}",
            _config(2.0, "pi", [_bump(a, 0.75)], [_gauss(0.5, 3, 0), _gauss(0.5, 3, "pi")], 35.0, snapshot_every=1.0),
            Expectation(("cosine-1", "constant"), note="a member of the cosine family at chi = chi_1"),
        )
    add(
        "fig9",
        _config(4.0, "pi", [_bump("pi/2", 0.75)], [_gauss(1.2, 3, 0), _gauss(1.2, 3, "pi")], 35.0, snapshot_every=1.0),
        Expectation(("constant",), note="symmetric data return to the constant state for chi_1 < chi < chi_2"),
    )
    fig10 = {1.2: ("similar-2-plus",), 1.0: ("asymmetric-2",), 0.95: ("asymmetric-2",), 0.8: ("half-bump-left",)}
    for a, labels in fig10.items():
        add(
            f"fig10-a{a}",
            _config(6.0, "pi", [_bump("pi/2", 0.75)], [_gauss(1.2, 3, 0), _gauss(a, 3, "pi")], 35.0, snapshot_every=1.0),
            Expectation(labels, note="tilting the chemical selects the final spike configuration"),
        )
    add(
        "meta-i",
        _config(20.0, 5.0, [_bump(3, 0.75)], [_gauss(0.5, 2, 2)], 35.0, snapshot_every=0.5),
        Expectation(("half-bump-left",), min_plateaus=2, note="interior spike creeps to the left wall"),
    )
    add(
        "meta-ii",
        # the merged bump reaches the midpoint at rate ~0.04, hence the longer run
        _config(20.0, 10.0, [_bump(2, 0.375), _bump(8, 0.375)], [_gauss(1.2, 2, 3), _gauss(0.6, 2, 7)], 80.0,
                snapshot_every=1.0),
        Expectation(("similar-2-minus",), min_plateaus=2, note="two bumps merge into one interior bump"),
    )
    add(
        "meta-iii",
        _config(20.0, 10.0, [_bump(3, 0.375), _bump(7, 0.375)], [_gauss(1.2, 2, 2), _gauss(0.6, 2, 8)], 35.0,
                snapshot_every=1.0),
        Expectation(("similar-2-plus",), note="bumps separate to a symmetric double boundary spike"),
    )
    return out


PRESETS: dict[str, ScenarioPreset] = _build()

# group names expand to all of their members
GROUPS = {
    "fig3": tuple(n for n in PRESETS if n.startswith("fig3-")),
    "fig10": tuple(n for n in PRESETS if n.startswith("fig10-")),
}


def preset_names(name: str) -> tuple[str, ...]:
    if name in GROUPS:
        return GROUPS[name]
    if name in PRESETS:
        return (name,)
    available = ", ".join(sorted([*PRESETS, *GROUPS]))
    raise ConfigurationError(f"unknown preset {name!r}; available: {available}")


def get_preset(name: str) -> ScenarioPreset:
    if name not in PRESETS:
        preset_names(name)  # raises for unknown names
        raise ConfigurationError(f"{name!r} is a group; use preset_names() to expand it")
    return PRESETS[name]
