"""Compiled path loops for the omega-killed stable process.

One step from state ``x`` draws a stable increment over ``h``, accumulates
the clock by the trapezoid of the capped rate at both endpoints and kills
with probability ``1 - exp(-dA)``.  The three uniforms a step needs come
from a single Philox block.  A path that sits inside ``(-eps, 0)`` for two consecutive steps
is killed outright: the clock diverges before the process can reach zero
from below.

Step ``n`` of path ``i`` always uses Philox block ``n`` of stream ``i``;
results never depend on thread scheduling.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .rng import uniform_triple
from .stable import cms_standard

MODE_FIRST_EXCURSION = 0
MODE_UP_CROSS = 1
MODE_DOWN_ENTRY = 2
MODE_SUP = 3
MODE_FIXED_TIMES = 4

STATUS_STOPPED = 0
STATUS_KILLED = 1
STATUS_CENSORED = 2


@njit(cache=True)
def omega_capped(x, k, alpha, eps):
    if x >= 0.0:
        return 0.0
    d = -x
    if d < eps:
        d = eps
    return k * d ** (-alpha)


@njit(cache=True)
def gain(x, r, K):
    if x <= 0.0:
        return 0.0
    v = x ** r - K
    return v if v > 0.0 else 0.0


@njit(cache=True)
def step(x, steps, path, dt, h_cap, scaled, alpha, B, S, sigma, k, eps, k0, k1):
    """One Euler step; returns ``(x_new, h, dA, u_kill)``."""
    if scaled:
        a = abs(x)
        if a < eps:
            a = eps
        h = dt * a if alpha == 1.0 else dt * a ** alpha
    else:
        h = dt
    if h > h_cap:
        h = h_cap
    u1, u2, u3 = uniform_triple(steps, path, k0, k1)
    spread = h if alpha == 1.0 else h ** (1.0 / alpha)
    x_new = x + sigma * spread * cms_standard(alpha, B, S, u1, u2)
    if x < 0.0 or x_new < 0.0:
        dA = 0.5 * h * (omega_capped(x, k, alpha, eps) + omega_capped(x_new, k, alpha, eps))
    else:
        dA = 0.0
    return x_new, h, dA, u3


@njit(cache=True)
def killed_now(u_kill, dA):
    if dA == math.inf:
        return True
    return dA > 0.0 and u_kill < -math.expm1(-dA)


@njit(cache=True)
def _one_path(i, mode, x0, dt, horizon, max_steps, scaled, eps, alpha, B, S, sigma,
              k, p_glue, r, K, threshold, checkpoints, k0, k1,
              value, status, end_x, n_steps, end_t, cp_values):
    x = x0
    t = 0.0
    steps = 0
    band = 0
    entered = x0 < 0.0
    sup = x0 if x0 > 0.0 else 0.0
    ci = 0
    ncp = checkpoints.shape[0]
    value[i] = 0.0
    status[i] = STATUS_CENSORED

    if mode == MODE_UP_CROSS and x0 >= threshold:
        value[i] = gain(x0, r, K)
        status[i] = STATUS_STOPPED
    elif mode == MODE_DOWN_ENTRY and 0.0 < x0 <= threshold:
        value[i] = gain(x0, r, K)
        status[i] = STATUS_STOPPED
    elif mode == MODE_FIXED_TIMES:
        while ci < ncp and checkpoints[ci] <= 0.0:
            cp_values[i, ci] = gain(x0, r, K)
            ci += 1
        if ci == ncp:
            status[i] = STATUS_STOPPED
    if status[i] == STATUS_STOPPED:
        end_x[i] = x0
        n_steps[i] = 0
        end_t[i] = 0.0
        return

    while True:
        if steps >= max_steps or t >= horizon:
            if mode == MODE_SUP:
                value[i] = sup ** r
            status[i] = STATUS_CENSORED
            break
        cap = horizon - t
        at_checkpoint = False
        if mode == MODE_FIXED_TIMES and checkpoints[ci] - t <= cap:
            cap = checkpoints[ci] - t
            at_checkpoint = True
        x_new, h, dA, u_kill = step(x, steps, i, dt, cap, scaled, alpha, B, S, sigma,
                                    k, eps, k0, k1)
        if p_glue >= 0.0:
            # killing decided once per excursion, independently of its path
            dA = 0.0
            if (x >= 0.0 or steps == 0) and x_new < 0.0 and u_kill < p_glue:
                dA = math.inf
        steps += 1
        if h == cap:
            t = checkpoints[ci] if at_checkpoint else horizon
        else:
            at_checkpoint = False
            t += h
        if x_new < 0.0:
            entered = True
        if -eps < x_new < 0.0:
            band += 1
        else:
            band = 0
        if (band >= 2 and p_glue < 0.0) or killed_now(u_kill, dA):
            status[i] = STATUS_KILLED
            if mode == MODE_FIRST_EXCURSION:
                value[i] = 1.0
            elif mode == MODE_SUP:
                value[i] = sup ** r
            x = x_new
            break
        x = x_new
        if mode == MODE_FIRST_EXCURSION:
            if entered and x >= 0.0:
                status[i] = STATUS_STOPPED
                break
        elif mode == MODE_UP_CROSS:
            if x >= threshold:
                value[i] = gain(x, r, K)
                status[i] = STATUS_STOPPED
                break
        elif mode == MODE_DOWN_ENTRY:
            if 0.0 < x <= threshold:
                value[i] = gain(x, r, K)
                status[i] = STATUS_STOPPED
                break
        elif mode == MODE_SUP:
            if x > sup:
                sup = x
        else:
            if at_checkpoint:
                cp_values[i, ci] = gain(x, r, K)
                ci += 1
                if ci == ncp:
                    status[i] = STATUS_STOPPED
                    break
    end_x[i] = x
    n_steps[i] = steps
    end_t[i] = t


@njit(cache=True, parallel=True)
def run_paths(mode, n_paths, x0, dt, horizon, max_steps, scaled, eps, alpha, B, S, sigma,
              k, p_glue, r, K, threshold, checkpoints, k0, k1,
              value, status, end_x, n_steps, end_t, cp_values):
    for i in prange(n_paths):
        _one_path(i, mode, x0, dt, horizon, max_steps, scaled, eps, alpha, B, S, sigma,
                  k, p_glue, r, K, threshold, checkpoints, k0, k1,
                  value, status, end_x, n_steps, end_t, cp_values)


@njit(cache=True)
def record_path(path, x0, dt, horizon, max_steps, scaled, eps, alpha, B, S, sigma, k, k0, k1):
    """Full trajectory of one path until killing, horizon or ``max_steps``.

    Returns times, states and clock values (one entry per step, the start
    included) and the number of recorded entries, plus a killed flag.
    """
    times = np.empty(max_steps + 1)
    states = np.empty(max_steps + 1)
    clock = np.empty(max_steps + 1)
    times[0] = 0.0
    states[0] = x0
    clock[0] = 0.0
    x = x0
    t = 0.0
    a = 0.0
    band = 0
    killed = False
    n = 0
    while n < max_steps and t < horizon:
        x_new, h, dA, u_kill = step(x, n, path, dt, horizon - t, scaled, alpha, B, S, sigma,
                                    k, eps, k0, k1)
        n += 1
        t = horizon if h == horizon - t else t + h
        a += dA
        if -eps < x_new < 0.0:
            band += 1
        else:
            band = 0
        times[n] = t
        states[n] = x_new
        clock[n] = a
        x = x_new
        if band >= 2 or killed_now(u_kill, dA):
            killed = True
            break
    return times[:n + 1], states[:n + 1], clock[:n + 1], killed


@njit(cache=True, parallel=True)
def frozen_kill_times(n_paths, x, dt, k, alpha, eps, k0, k1, max_steps, out):
    """Kill times for a state held fixed at ``x``, using the per-step rule."""
    rate = omega_capped(x, k, alpha, eps)
    dA = dt * rate
    p_kill = -math.expm1(-dA)
    for i in prange(n_paths):
        out[i] = math.inf
        for n in range(max_steps):
            _, _, u3 = uniform_triple(n, i, k0, k1)
            if u3 < p_kill:
                out[i] = (n + 1) * dt
                break
