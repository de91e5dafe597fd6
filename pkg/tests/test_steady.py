import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.integrate import quad

from ksbump.core import ModelParams, make_grid
from ksbump.errors import BranchNotPresentError, DomainError, NoRootError
from ksbump.solver import SolverState, rhs
from ksbump.steady import (
    MINUS,
    RIGHT,
    ConstantProfile,
    admissible_L0,
    asymmetric_two_bump,
    cosine_family,
    eval_profile,
    half_bump,
    interior_variants,
    limit_profile,
    profile_from_dict,
    project_profile,
    similar_bump,
    solve_support_length,
)
from ksbump.validation import observed_order


def residual(omega, ell, lval):
    return math.tan(omega * lval) / omega - math.tanh(lval - ell)


def quad_mass(profile):
    pts = [b for b in profile.breakpoints if 0 < b < profile.L]
    return quad(profile.u, 0.0, profile.L, points=pts, limit=200, epsabs=1e-13, epsrel=1e-13)[0]


# ---------------------------------------------------------------- support length


@pytest.mark.parametrize(
    "omega, ell, ref, tol",
    [
        (math.sqrt(3.0), math.pi, 1.22, 5e-3),
        (3.0, 3.0, 0.6326, 5e-4),
        (3.0, 2.0, 0.6449, 5e-4),
        (math.sqrt(19.0), 5.0, 0.4121, 5e-4),
    ],
)
def test_support_length_reference_values(omega, ell, ref, tol):
    assert abs(solve_support_length(omega, ell) - ref) <= tol


def test_support_length_large_omega_collapses_to_quarter_wave():
    lval = solve_support_length(1e3, 1.0)
    assert math.pi / 2 < 1e3 * lval < math.pi / 2 + 0.1


def test_support_length_no_root_below_threshold():
    with pytest.raises(NoRootError):
        solve_support_length(1.0, 2.0)
    with pytest.raises(NoRootError):
        solve_support_length(math.pi / 3.0, 3.0)


def test_support_length_bit_identical():
    a = solve_support_length(2.345, 1.7)
    b = solve_support_length(2.345, 1.7)
    assert a.hex() == b.hex()


@given(st.floats(0.2, 20.0), st.floats(1.001, 300.0))
def test_support_length_bracket_and_residual(ell, factor):
    omega = factor * math.pi / ell
    lval = solve_support_length(omega, ell)
    assert math.pi / (2 * omega) < lval < math.pi / omega
    assert abs(residual(omega, ell, lval)) < 1e-12


@given(st.floats(0.5, 10.0), st.floats(1.01, 50.0), st.floats(1.001, 3.0))
def test_support_length_decreasing_in_chi(ell, factor, ratio):
    omega_a = factor * math.pi / ell
    assert solve_support_length(omega_a, ell) > solve_support_length(omega_a * ratio, ell)


def test_support_length_same_for_both_meta_lengths():
    # the meta-i setup is quoted with L = 5 and with L = 10; the solved
    # support length must be the same to 1e-6 for the choice not to matter
    omega = math.sqrt(19.0)
    assert abs(solve_support_length(omega, 5.0) - solve_support_length(omega, 10.0)) <= 1e-6


def test_support_length_both_meta_lengths_near_reference():
    omega = math.sqrt(19.0)
    for ell in (5.0, 10.0):
        assert abs(solve_support_length(omega, ell) - 0.4121) <= 5e-4


# ---------------------------------------------------------------- half-bump


def test_half_bump_amplitude():
    assert abs(half_bump(ModelParams(20.0, 5.0, 1.0)).A - 3.1668) <= 2e-3


def test_half_bump_mass_against_antiderivative():
    h = half_bump(ModelParams(4.0, math.pi, 1.0))
    w, lval = h.params.omega, h.lstar
    mass = h.A * (math.sin(w * lval) / w - lval * math.cos(w * lval))
    assert abs(mass - 1.0) <= 1e-10
    assert abs(quad_mass(h) - 1.0) <= 1e-10


def test_half_bump_large_chi_norm_near_omega():
    p = ModelParams(400.0, 3.0, 1.0)
    assert abs(half_bump(p).umax / p.omega - 1.0) <= 0.02


@pytest.mark.parametrize("chi, L", [(4.0, math.pi), (20.0, 5.0), (2.5, 3.0), (400.0, 3.0)])
def test_half_bump_invariants(chi, L):
    p = ModelParams(chi, L)
    h = half_bump(p)
    w = p.omega
    assert math.pi / (2 * w) < h.lstar < math.pi / w and h.lstar < L
    assert math.pi / 2 < h.z < math.pi
    assert abs(residual(w, L, h.lstar)) < 1e-12
    assert h.A > 0
    assert eval_profile(h, h.lstar)[0] == 0.0
    x = np.linspace(0, h.lstar, 400)
    assert np.all(np.diff(h.u(x)) < 0)
    inner = h.A * (math.cos(h.z) / chi - math.cos(h.z))
    outer = h.B * math.cosh(h.lstar - L)
    assert abs(inner - outer) <= 1e-10
    # derivative match of v at the support edge
    d_inner = -h.A * w * math.sin(h.z) / chi
    d_outer = h.B * math.sinh(h.lstar - L)
    assert abs(d_inner - d_outer) <= 1e-9 * max(1.0, abs(d_inner))
    assert abs(quad_mass(h) - p.M) <= 1e-9


def test_half_bump_right_orientation_is_mirror():
    p = ModelParams(6.0, math.pi)
    left, right = half_bump(p), half_bump(p, RIGHT)
    x = np.linspace(0, math.pi, 301)
    np.testing.assert_allclose(right.u(x), left.u(math.pi - x), atol=1e-12)
    np.testing.assert_allclose(right.v(x), left.v(math.pi - x), atol=1e-12)


def test_half_bump_absent_below_first_threshold():
    with pytest.raises(BranchNotPresentError):
        half_bump(ModelParams(2.0, math.pi))


@given(st.floats(0.5, 10.0), st.floats(0.05, 5.0), st.floats(1.001, 30.0))
def test_norm_grows_with_chi(L, M, ratio):
    chi_a = critical_chi_plus(L)
    chi_b = 1.0 + (chi_a - 1.0) * ratio
    assert half_bump(ModelParams(chi_b, L, M)).umax > half_bump(ModelParams(chi_a, L, M)).umax


def critical_chi_plus(L):
    return (math.pi / L) ** 2 * 1.05 + 1.0


def test_norm_ratio_tends_to_one():
    ratios = [half_bump(ModelParams(chi, 3.0)).umax / math.sqrt(chi - 1) for chi in (10.0, 1e2, 1e3, 1e4, 1e5)]
    gaps = [abs(r - 1.0) for r in ratios]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.01


# ---------------------------------------------------------------- evaluation


def test_eval_profile_domain_and_constant():
    p = ModelParams(3.0, 2.0, 1.5)
    c = ConstantProfile(p)
    assert eval_profile(c, 0.7) == (p.ubar, p.vbar)
    with pytest.raises(DomainError):
        eval_profile(c, 2.5)
    with pytest.raises(DomainError):
        eval_profile(half_bump(ModelParams(4.0, math.pi)), [-0.1, 1.0])


def test_cosine_family_touching_zero():
    ubar = 1.0 / math.pi
    prof = cosine_family(math.pi, 1.0, 1, ubar / 2.0)
    assert prof.touches_zero
    assert abs(eval_profile(prof, math.pi)[0]) <= 1e-15


@given(st.integers(1, 5), st.floats(-1.0, 1.0))
def test_cosine_family_invariants(k, frac):
    L, M = 4.0, 1.3
    chik = (k * math.pi / L) ** 2 + 1.0
    ubar = M / L
    prof = cosine_family(L, M, k, frac * ubar / chik)
    x = np.linspace(0, L, 257)
    u, v = prof.u(x), prof.v(x)
    assert np.all(u >= -1e-15)
    np.testing.assert_allclose(u - chik * v, ubar - chik * ubar, atol=1e-12)
    if abs(frac) == 1.0:
        assert prof.touches_zero and np.min(u) <= 1e-15
    elif abs(frac) < 0.999:
        assert not prof.touches_zero and np.min(u) > 0


def test_cosine_family_rejects_out_of_range():
    with pytest.raises(DomainError):
        cosine_family(math.pi, 1.0, 1, 0.2)


# ---------------------------------------------------------------- similar bumps


def test_similar_five_bumps_mass():
    prof = similar_bump(ModelParams(40.0, math.pi, 1.0), 5)
    assert abs(quad_mass(prof) - 1.0) <= 1e-10
    assert all(abs(s.cell.mass - 0.2) <= 1e-14 for s in prof.segments)


def test_similar_existence_threshold():
    similar_bump(ModelParams(6.0, math.pi), 2)
    with pytest.raises(BranchNotPresentError):
        similar_bump(ModelParams(6.0, math.pi), 3)


def test_similar_plus_parity_symmetric():
    prof = similar_bump(ModelParams(12.0, math.pi), 2)
    x = np.linspace(0, math.pi, 200)
    np.testing.assert_allclose(prof.u(x), prof.u(math.pi - x), atol=1e-12)


@pytest.mark.parametrize("k, parity", [(2, "plus"), (3, "plus"), (3, "minus"), (4, "minus")])
def test_similar_junction_symmetry_and_parity(k, parity):
    L = 6.0
    prof = similar_bump(ModelParams(30.0, L), k, parity)
    ell = L / k
    assert abs(residual(prof.params.omega, ell, prof.lk)) < 1e-12
    y = np.linspace(0, ell, 101)
    for i in range(1, k):
        xi = i * ell
        lo, hi = np.clip(xi - y, 0, L), np.clip(xi + y, 0, L)
        np.testing.assert_allclose(prof.u(lo), prof.u(hi), atol=1e-12)
    assert (prof.u(0.0) > 0) == (parity == "plus")
    if parity == MINUS:
        assert prof.u(0.0) == 0.0


def test_norm_ordering_in_k():
    p = ModelParams(40.0, math.pi)
    norms = [half_bump(p).umax] + [similar_bump(p, j).umax for j in range(2, 6)]
    assert all(b < a for a, b in zip(norms, norms[1:]))


# ---------------------------------------------------------------- asymmetric states


def test_asymmetric_window():
    lo, hi = admissible_L0(ModelParams(50.0, 6.0))
    assert abs(lo - 0.4488) <= 5e-4 and abs(hi - 5.5512) <= 5e-4


def test_asymmetric_support_lengths():
    prof = asymmetric_two_bump(ModelParams(10.0, 5.0), 3.0)
    assert abs(prof.lstar - 0.6326) <= 5e-4
    assert abs(prof.lstarstar - 0.6449) <= 5e-4


def test_asymmetric_midpoint_is_double_spike():
    p = ModelParams(15.0, 4.0, 1.2)
    a = asymmetric_two_bump(p, 2.0)
    s = similar_bump(p, 2)
    assert abs(a.m1 - 0.6) <= 1e-12 and abs(a.m2 - 0.6) <= 1e-12
    x = np.linspace(0, 4.0, 401)
    np.testing.assert_allclose(a.u(x), s.u(x), atol=1e-10)
    np.testing.assert_allclose(a.v(x), s.v(x), atol=1e-10)


@pytest.mark.parametrize("chi, L, L0", [(10.0, 5.0, 3.0), (50.0, 6.0, 1.0), (50.0, 6.0, 4.7), (20.0, 10.0, 6.0)])
def test_asymmetric_invariants(chi, L, L0):
    p = ModelParams(chi, L)
    a = asymmetric_two_bump(p, L0)
    w = p.omega
    assert abs(residual(w, L0, a.lstar)) < 1e-12
    assert abs(residual(w, L - L0, a.lstarstar)) < 1e-12
    assert abs(a.m1 + a.m2 - p.M) <= 1e-14
    a1 = (a.lstar - math.tan(w * a.lstar) / w) * math.cosh(L0 - a.lstar)
    a2 = (a.lstarstar - math.tan(w * a.lstarstar) / w) * math.cosh(L - L0 - a.lstarstar)
    assert a.m1 / a1 == pytest.approx(a.m2 / a2, rel=1e-12)
    assert abs(a.Bl - a.Br) <= 1e-10
    gap = np.linspace(a.lstar, L - a.lstarstar, 200)
    assert np.all(a.u(gap) == 0.0)
    assert a.u(L - a.lstarstar) == 0.0
    h = 1e-6
    for x0 in (a.lstar, L0, L - a.lstarstar):
        vl, vc, vr = a.v(np.array([x0 - h, x0, x0 + h]))
        assert abs(vl - vc) < 1e-5 and abs(vr - vc) < 1e-5
        # one-sided slopes agree up to the O(h) curvature term
        assert abs((vc - vl) / h - (vr - vc) / h) < 1e-3
    assert abs(quad_mass(a) - p.M) <= 1e-9


def test_asymmetric_rejects_outside_window():
    p = ModelParams(50.0, 6.0)
    with pytest.raises(DomainError) as info:
        asymmetric_two_bump(p, 0.3)
    lo, hi = info.value.interval
    assert lo == pytest.approx(math.pi / 7) and hi == pytest.approx(6 - math.pi / 7)


# ---------------------------------------------------------------- glued variants


def test_interior_variants_reflection_and_masses():
    a = asymmetric_two_bump(ModelParams(20.0, 10.0), 6.0)
    mirror, large, small = interior_variants(a)
    x = np.linspace(0, 10.0, 300)
    np.testing.assert_allclose(mirror.u(x), a.u(10.0 - x), atol=1e-12)
    big, little = max(a.m1, a.m2), min(a.m1, a.m2)
    # each glued interior bump is two copies of one boundary spike
    assert large.components[1][2] == pytest.approx(2 * big, rel=1e-12)
    assert small.components[1][2] == pytest.approx(2 * little, rel=1e-12)
    for glued in (large, small):
        assert abs(quad_mass(glued) - 2 * a.params.M) <= 1e-9


def _glued_rhs_norms(Ns, norm):
    a = asymmetric_two_bump(ModelParams(20.0, 5.0), 3.0)
    large = interior_variants(a)[1]
    out = []
    for N in Ns:
        u, v = project_profile(large, make_grid(large.L, N))
        du, _ = rhs(SolverState(0.0, u, v, large.params))
        out.append(norm(du.values, large.L / N))
    return out


def pairwise_orders(Ns, values):
    return [math.log2(a / b) for a, b in zip(values, values[1:])]


def test_glued_variant_stationary_in_max_norm():
    # max norm of du/dt must halve at every refinement
    Ns = (400, 800, 1600, 3200)
    res = _glued_rhs_norms(Ns, lambda d, dx: np.max(np.abs(d)))
    assert min(pairwise_orders(Ns, res)) >= 1.0, res


def test_glued_variant_stationary_in_l1():
    Ns = (400, 800, 1600, 3200)
    res = _glued_rhs_norms(Ns, lambda d, dx: dx * np.sum(np.abs(d)))
    assert all(b < a for a, b in zip(res, res[1:]))
    assert observed_order([1.0 / N for N in Ns[1:]], res[1:]) >= 0.8, res


# ---------------------------------------------------------------- limit profile


def test_limit_profile_closed_form():
    lp = limit_profile(ModelParams(100.0, 3.0, 1.0))
    x = np.linspace(0, 3, 50)
    np.testing.assert_allclose(lp.v(x), np.cosh(3 - x) / math.sinh(3), rtol=1e-14)


@pytest.mark.parametrize("L, M", [(3.0, 1.0), (6.0, 2.0)])
def test_limit_profile_mass(L, M):
    lp = limit_profile(ModelParams(50.0, L, M))
    assert quad(lp.v, 0, L, epsabs=1e-13)[0] == pytest.approx(M, rel=1e-12)


def test_half_bump_approaches_limit_profile():
    p = ModelParams(400.0, 3.0, 1.0)
    x = np.linspace(1.0, 3.0, 201)
    assert np.max(np.abs(half_bump(p).v(x) - limit_profile(p).v(x))) <= 2e-2


# ---------------------------------------------------------------- profile ODE properties

bump_profiles = st.sampled_from(
    [
        ("half", 4.0, math.pi, None),
        ("half", 30.0, 2.0, None),
        ("similar", 40.0, math.pi, 3),
        ("similar", 25.0, 6.0, 2),
        ("asym", 50.0, 6.0, 2.2),
        ("asym", 10.0, 5.0, 3.0),
    ]
)


def _build(spec):
    kind, chi, L, extra = spec
    p = ModelParams(chi, L)
    if kind == "half":
        return half_bump(p)
    if kind == "similar":
        return similar_bump(p, extra)
    return asymmetric_two_bump(p, extra)


@given(bump_profiles)
def test_u_minus_chi_v_constant_on_components(spec):
    prof = _build(spec)
    for lo, hi, _, _ in prof.components:
        x = np.linspace(lo, hi, 200)[1:-1]
        g = prof.u(x) - prof.params.chi * prof.v(x)
        assert np.ptp(g) <= 1e-10 * max(1.0, np.max(np.abs(g)))


@given(bump_profiles)
def test_v_solves_screened_poisson_piecewise(spec):
    prof = _build(spec)
    edges = sorted(set((0.0, prof.L, *prof.breakpoints)))
    for h in (1e-3, 5e-4):
        worst = 0.0
        for a, b in zip(edges, edges[1:]):
            if b - a < 10 * h:
                continue
            x = np.arange(a + h, b - h, h)[1:-1]
            vpp = (prof.v(x + h) - 2 * prof.v(x) + prof.v(x - h)) / h**2
            worst = max(worst, np.max(np.abs(vpp - prof.v(x) + prof.u(x))))
        scale = max(1.0, prof.params.chi * prof.umax)
        assert worst <= 1e-1 * scale * h**2 + 1e-6 * scale


# ---------------------------------------------------------------- serialization


@pytest.mark.parametrize(
    "prof",
    [
        half_bump(ModelParams(4.0, math.pi)),
        similar_bump(ModelParams(40.0, math.pi), 3, MINUS),
        asymmetric_two_bump(ModelParams(10.0, 5.0), 3.0),
        cosine_family(math.pi, 1.0, 2, 0.01),
        ConstantProfile(ModelParams(1.5, 2.0)),
        limit_profile(ModelParams(1e4, 3.0)),
    ],
)
def test_profile_json_round_trip(prof):
    doc = json.loads(json.dumps(prof.to_dict()))
    for key in ("branch", "chi", "L", "M", "k", "parity", "lstar", "A", "B", "lambda", "masses", "L0"):
        assert key in doc
    again = profile_from_dict(doc)
    assert again.to_dict() == prof.to_dict()
    x = np.linspace(0.01, prof.L, 50)
    np.testing.assert_array_equal(again.v(x), prof.v(x))


def test_json_keeps_full_precision():
    h = half_bump(ModelParams(4.0, math.pi))
    doc = json.loads(json.dumps(h.to_dict()))
    assert doc["lstar"] == h.lstar and doc["A"] == h.A and doc["lambda"] == h.lam


@given(st.floats(2.5, 200.0), st.floats(1.0, 8.0))
def test_half_bump_exists_iff_above_first_threshold(chi, L):
    assume(abs(chi - (math.pi / L) ** 2 - 1) > 1e-9)
    p = ModelParams(chi, L)
    if chi > (math.pi / L) ** 2 + 1:
        half_bump(p)
    else:
        with pytest.raises(BranchNotPresentError):
            half_bump(p)
