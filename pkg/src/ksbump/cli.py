"""Command-line interface: ``ksbump <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bifurcation
from .config import load_config
from .core import ModelParams
from .energy import hierarchy_table, quadrature_energy, steady_energy_constant
from .errors import KSError
from .experiments import run_preset, run_scenario
from .presets import preset_names
from .steady import (
    LEFT,
    PLUS,
    ConstantProfile,
    asymmetric_two_bump,
    cosine_family,
    half_bump,
    interior_variants,
    limit_profile,
    similar_bump,
)
from .validation import validate

ENERGY_COLUMNS = ("branch", "k", "chi", "L", "M", "E_closed", "E_quadrature", "E_limit")


def _float_list(text: str) -> list[float]:
    """``"1,2,3"`` or ``"start:stop:count"`` (log-spaced when prefixed ``log:``)."""
    if text.startswith("log:"):
        a, b, n = text[4:].split(":")
        return list(np.geomspace(float(a), float(b), int(n)))
    if text.count(":") == 2:
        a, b, n = text.split(":")
        return list(np.linspace(float(a), float(b), int(n)))
    return [float(x) for x in text.split(",") if x.strip()]


def _emit(text: str, out: str | None, filename: str):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / filename).write_text(text)
    print(f"wrote {path / filename}")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x):
    return "" if x is None else repr(float(x))


def cmd_steady(args) -> int:
    p = ModelParams(args.chi, args.L, args.M)
    b = args.branch
    if b == "constant":
        prof = ConstantProfile(p)
    elif b == "cosine":
        prof = cosine_family(p.L, p.M, args.k, args.eps)
    elif b == "half-bump":
        prof = half_bump(p, args.orientation)
    elif b == "similar":
        prof = similar_bump(p, args.k, args.parity)
    elif b == "asymmetric":
        prof = asymmetric_two_bump(p, args.L0)
    else:
        prof = limit_profile(p)
    profiles = [prof]
    if b == "asymmetric" and args.variants:
        profiles += interior_variants(prof)
    if args.format == "json":
        docs = [q.to_dict() for q in profiles]
        _emit(json.dumps(docs if len(docs) > 1 else docs[0], indent=2) + "\n", args.out, "profile.json")
    else:
        x = np.linspace(0.0, p.L, args.samples)
        rows = []
        labels = [b, "mirror", "large-interior", "small-interior"] if len(profiles) > 1 else [prof.branch]
        for q, label in zip(profiles, labels):
            xs = np.linspace(0.0, q.L, args.samples) if q.L != p.L else x
            rows += [(label, repr(float(a)), repr(float(u)), repr(float(v))) for a, u, v in zip(xs, q.u(xs), q.v(xs))]
        _emit(_csv_text(("profile", "x", "u", "v"), rows), args.out, "profile.csv")
    return 0


def cmd_energy_table(args) -> int:
    rows = []
    for chi in _float_list(args.chi):
        p = ModelParams(chi, args.L, args.M)
        N = args.n
        if p.max_modes() >= 1:
            for rep in hierarchy_table(p, args.kmax, N):
                if rep.branch == "constant":
                    continue
                rows.append(("similar-bump", rep.k, chi, p.L, p.M, _fmt(rep.E_closed),
                             _fmt(rep.E if N else None), _fmt(rep.E_limit)))
        quad = quadrature_energy(ConstantProfile(p), N) if N else None
        rows.append(("constant", 0, chi, p.L, p.M, _fmt(steady_energy_constant(p)), _fmt(quad), ""))
    rows = [tuple(str(c) for c in r) for r in rows]
    if args.format == "json":
        docs = [dict(zip(ENERGY_COLUMNS, r)) for r in rows]
        _emit(json.dumps(docs, indent=2) + "\n", args.out, "energy_table.json")
    else:
        _emit(_csv_text(ENERGY_COLUMNS, rows), args.out, "energy_table.csv")
    return 0


def cmd_bifurcate(args) -> int:
    p = ModelParams(1.0 + 1e-9, args.L, args.M)
    pts = bifurcation.sweep(p, sorted(_float_list(args.chi)), args.kmax)
    if args.format == "json":
        docs = [dict(zip(bifurcation.CSV_COLUMNS, pt.row())) for pt in pts]
        _emit(json.dumps(docs, indent=2) + "\n", args.out, "bifurcation.json")
    else:
        _emit(_csv_text(bifurcation.CSV_COLUMNS, [pt.row() for pt in pts]), args.out, "bifurcation.csv")
    return 0


def _run_kwargs(args):
    return {"order": args.order, "safety": args.safety, "N": args.n}


def _formats(args):
    return [args.format] if args.format else None


def _report(result) -> int:
    summary = result.summary()
    print(json.dumps({k: summary[k] for k in ("preset", "final_branch_guess", "umax", "lstar_fit", "E_final")}))
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {result.name} {c.name}: {c.detail}")
    return 0 if result.passed else 1


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg.output.directory
    result = run_scenario(cfg, Path(args.config).stem, out_dir=out, formats=_formats(args), **_run_kwargs(args))
    return _report(result)


def cmd_preset(args) -> int:
    status = 0
    names = preset_names(args.name)
    for name in names:
        out = None
        if args.out:
            out = Path(args.out) / name if len(names) > 1 else Path(args.out)
        status |= _report(run_preset(name, out_dir=out, formats=_formats(args), **_run_kwargs(args)))
    return status


def cmd_validate(args) -> int:
    report = validate(n_scale=args.n_scale, flux_sign=-1.0 if args.mutate_flux_sign else 1.0, workers=args.workers)
    for c in report["criteria"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} criterion {c['number']:2d} ({c['title']}): {c['detail']}")
    text = json.dumps(report, indent=2, default=float) + "\n"
    if args.out:
        _emit(text, args.out, "validation.json")
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ksbump", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="csv", run_flags=False):
        p.add_argument("--out", help="output directory (default: stdout for tables)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        if run_flags:
            p.add_argument("--order", type=int, choices=(1, 2), default=None)
            p.add_argument("--safety", type=float, default=None)
            p.add_argument("--n", type=int, default=None, help="number of cells")

    p = sub.add_parser("steady", help="evaluate a steady-state branch")
    common(p)
    p.add_argument("branch", choices=("constant", "cosine", "half-bump", "similar", "asymmetric", "limit"))
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--L", type=float, default=math.pi)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--parity", choices=("plus", "minus"), default=PLUS)
    p.add_argument("--orientation", choices=("left", "right"), default=LEFT)
    p.add_argument("--L0", type=float)
    p.add_argument("--variants", action="store_true", help="also emit the mirrored and glued asymmetric states")
    p.add_argument("--samples", type=int, default=401)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("energy-table", help="closed-form and quadrature energies")
    common(p)
    p.add_argument("--chi", required=True, help="comma list, a:b:n or log:a:b:n")
    p.add_argument("--L", type=float, default=6.0)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--n", type=int, default=None, help="cells for the quadrature column")
    p.set_defaults(func=cmd_energy_table)

    p = sub.add_parser("bifurcate", help="branch table for the bifurcation diagram")
    common(p)
    p.add_argument("--chi", required=True, help="comma list, a:b:n or log:a:b:n")
    p.add_argument("--L", type=float, default=math.pi)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=4)
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("simulate", help="run a JSON configuration")
    common(p, fmt_default=None, run_flags=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("preset", help="run a named scenario (or group)")
    common(p, fmt_default=None, run_flags=True)
    p.add_argument("name")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("validate", help="run the acceptance criteria")
    p.add_argument("--out")
    p.add_argument("--n-scale", type=float, default=1.0, help="scale every grid (0.5 halves N)")
    p.add_argument("--mutate-flux-sign", action="store_true", help="fault injection: reverse every flux")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
