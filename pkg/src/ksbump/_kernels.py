"""Compiled inner loops of the finite-volume scheme.

Arrays are 0-based: cell j = 0..N-1, interface i = 0..N with interface i
between cells i-1 and i.  Interfaces 0 and N are the walls.
"""

import numpy as np
from numba import njit

EULER = 0
SSPRK2 = 1

STATUS_DONE = 0
STATUS_STEADY = 1
STATUS_NONFINITE = 2
STATUS_UNDERFLOW = 3
STATUS_MAXSTEPS = 4
# relative shrink of the step bound, see stable_dt
DT_MARGIN = 1e-12


@njit(cache=True)
def velocity(u, v, chi, dx, xi):
    n = u.shape[0]
    xi[0] = 0.0
    xi[n] = 0.0
    for i in range(1, n):
        xi[i] = -((u[i] - chi * v[i]) - (u[i - 1] - chi * v[i - 1])) / dx


@njit(cache=True)
def reconstruct(u, order, uE, uW):
    """East/west point values; order 2 uses minmod slopes clipped at zero."""
    n = u.shape[0]
    if order == 1:
        for j in range(n):
            uE[j] = u[j]
            uW[j] = u[j]
        return
    for j in range(n):
        # ghost cells u_0 = u_1 and u_{N+1} = u_N give zero slope at the walls
        left = u[j] - u[j - 1] if j > 0 else 0.0
        right = u[j + 1] - u[j] if j < n - 1 else 0.0
        if left * right <= 0.0:
            half = 0.0
        elif abs(left) < abs(right):
            half = 0.5 * left
        else:
            half = 0.5 * right
        e = u[j] + half
        w = u[j] - half
        uE[j] = e if e > 0.0 else 0.0
        uW[j] = w if w > 0.0 else 0.0


@njit(cache=True)
def upwind_flux(uE, uW, xi, flux):
    n = uE.shape[0]
    flux[0] = 0.0
    flux[n] = 0.0
    for i in range(1, n):
        x = xi[i]
        if x > 0.0:
            flux[i] = x * uE[i - 1]
        elif x < 0.0:
            flux[i] = x * uW[i]
        else:
            flux[i] = 0.0


@njit(cache=True)
def rhs(u, v, chi, dx, order, flux_sign, du, dv, xi, flux, uE, uW):
    """Semi-discrete right-hand side; returns the CFL speed ``a``."""
    n = u.shape[0]
    velocity(u, v, chi, dx, xi)
    reconstruct(u, order, uE, uW)
    upwind_flux(uE, uW, xi, flux)
    if flux_sign != 1.0:
        for i in range(n + 1):
            flux[i] *= flux_sign
    inv_dx = 1.0 / dx
    inv_dx2 = inv_dx * inv_dx
    for j in range(n):
        du[j] = -(flux[j + 1] - flux[j]) * inv_dx
        vl = v[j - 1] if j > 0 else v[j]
        vr = v[j + 1] if j < n - 1 else v[j]
        dv[j] = ((vr + vl) - 2.0 * v[j]) * inv_dx2 - v[j] + u[j]
    a = 0.0
    for i in range(n + 1):
        s = abs(xi[i])
        if s > a:
            a = s
    return a


@njit(cache=True)
def energy(u, v, chi, dx):
    """Discrete free energy with the ``-u v`` cross term (half the continuous one)."""
    n = u.shape[0]
    s = 0.0
    for j in range(n):
        s += u[j] * u[j] / (2.0 * chi) - u[j] * v[j] + 0.5 * v[j] * v[j]
    g = 0.0
    for i in range(1, n):
        d = (v[i] - v[i - 1]) / dx
        g += d * d
    return dx * (s + 0.5 * g)


@njit(cache=True)
def dissipation(xi, uE, uW, dv, chi, dx, weight_chi):
    n = dv.shape[0]
    s = 0.0
    for i in range(1, n):
        m = uE[i - 1] if uE[i - 1] < uW[i] else uW[i]
        s += xi[i] * xi[i] * m
    if weight_chi:
        s /= chi
    t = 0.0
    for j in range(n):
        t += dv[j] * dv[j]
    return dx * (s + t)


@njit(cache=True)
def stable_dt(a, umax, dx, safety):
    """``safety * min(dx/(2a), dx^2/(2 + dx^2), dx^2/(2 umax))``.

    The last bound is the explicit limit of the degenerate diffusion, whose
    linearization has eigenvalues down to ``-4 u / dx^2``.  A relative
    margin of 1e-12 keeps the upwind convex-combination weights positive
    after rounding when the bound is attained exactly.
    """
    dt = dx * dx / (2.0 + dx * dx)
    if umax > 0.0:
        porous = dx * dx / (2.0 * umax)
        if porous < dt:
            dt = porous
    if a > 0.0:
        advective = dx / (2.0 * a)
        if advective < dt:
            dt = advective
    return safety * dt * (1.0 - DT_MARGIN)


@njit(cache=True)
def advance(u, v, chi, dx, order, scheme, safety, t, t_stop, max_steps,
            steady_du, steady_I, steady_needed, steady_count, flux_sign, dt_min, mass0):
    """Integrate in place until ``t_stop``, steady detection or failure.

    Returns ``(t, steps, status, steady_count, stats)`` where ``stats`` holds
    ``[max energy increase, max relative increase, max slack (dE + dt I)/dt^2,
    min u, max |mass drift|, last E, last I, last max|du|, last dt]``.
    """
    n = u.shape[0]
    du = np.empty(n)
    dv = np.empty(n)
    du1 = np.empty(n)
    dv1 = np.empty(n)
    u1 = np.empty(n)
    v1 = np.empty(n)
    xi = np.empty(n + 1)
    flux = np.empty(n + 1)
    uE = np.empty(n)
    uW = np.empty(n)
    stats = np.zeros(9)
    stats[0] = -np.inf
    stats[1] = -np.inf
    stats[2] = -np.inf
    stats[3] = np.inf

    E_old = energy(u, v, chi, dx)
    steps = 0
    status = STATUS_DONE
    while t < t_stop:
        if steps >= max_steps:
            status = STATUS_MAXSTEPS
            break
        a = rhs(u, v, chi, dx, order, flux_sign, du, dv, xi, flux, uE, uW)
        I_now = dissipation(xi, uE, uW, dv, chi, dx, True)
        dumax = 0.0
        for j in range(n):
            if abs(du[j]) > dumax:
                dumax = abs(du[j])
        stats[5] = E_old
        stats[6] = I_now
        stats[7] = dumax
        if dumax < steady_du and I_now < steady_I:
            steady_count += 1
            if steady_count >= steady_needed:
                status = STATUS_STEADY
                break
        else:
            steady_count = 0

        umax = 0.0
        for j in range(n):
            if u[j] > umax:
                umax = u[j]
        dt = stable_dt(a, umax, dx, safety)
        if dt < dt_min:
            status = STATUS_UNDERFLOW
            break
        last = False
        if t + dt >= t_stop:
            dt = t_stop - t
            last = True

        if scheme == EULER:
            for j in range(n):
                u1[j] = u[j] + dt * du[j]
                v1[j] = v[j] + dt * dv[j]
        else:
            for j in range(n):
                u1[j] = u[j] + dt * du[j]
                v1[j] = v[j] + dt * dv[j]
            rhs(u1, v1, chi, dx, order, flux_sign, du1, dv1, xi, flux, uE, uW)
            for j in range(n):
                u1[j] = 0.5 * u[j] + 0.5 * (u1[j] + dt * du1[j])
                v1[j] = 0.5 * v[j] + 0.5 * (v1[j] + dt * dv1[j])

        finite = True
        for j in range(n):
            if not (np.isfinite(u1[j]) and np.isfinite(v1[j])):
                finite = False
                break
        if not finite:
            status = STATUS_NONFINITE
            break

        mass = 0.0
        umin = np.inf
        for j in range(n):
            u[j] = u1[j]
            v[j] = v1[j]
            mass += u1[j]
            if u1[j] < umin:
                umin = u1[j]
        mass *= dx
        E_new = energy(u, v, chi, dx)
        inc = E_new - E_old
        if inc > stats[0]:
            stats[0] = inc
        rel = inc / (1.0 + abs(E_old))
        if rel > stats[1]:
            stats[1] = rel
        if dt > 0.0:
            slack = (inc + dt * I_now) / (dt * dt)
            if slack > stats[2]:
                stats[2] = slack
        if umin < stats[3]:
            stats[3] = umin
        drift = abs(mass - mass0)
        if drift > stats[4]:
            stats[4] = drift
        stats[8] = dt
        E_old = E_new
        steps += 1
        t = t_stop if last else t + dt
    return t, steps, status, steady_count, stats
