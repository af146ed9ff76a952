"""Pure-Python RK4 kernel, used when the compiled extension is unavailable.

Mirrors ``_rk4.pyx`` operation for operation; see that file for the contract.
"""

import math

import numpy as np


def rk4(rhs, a, b, u_a, v_a, steps, guard):
    f = rhs.func
    us = [u_a]
    vs = [v_a]
    blowup = -1
    h = (b - a) / steps
    half = 0.5 * h
    if not (abs(u_a) <= guard and abs(v_a) <= guard):
        blowup = 0
    u, v = u_a, v_a
    cu = cv = 0.0
    i = 0
    while blowup < 0 and i < steps:
        t = a + i * h
        k1u = v
        k1v = f(t, u, v)
        k2u = v + half * k1v
        k2v = f(t + half, u + half * k1u, v + half * k1v)
        k3u = v + half * k2v
        k3v = f(t + half, u + half * k2u, v + half * k2v)
        k4u = v + h * k3v
        k4v = f(t + h, u + h * k3u, v + h * k3v)
        # compensated accumulation of the increments
        du = h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) - cu
        dv = h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) - cv
        su = u + du
        sv = v + dv
        cu = (su - u) - du
        cv = (sv - v) - dv
        u = su
        v = sv
        i += 1
        us.append(u)
        vs.append(v)
        if not (abs(u) <= guard and abs(v) <= guard):
            blowup = i
    u_arr = np.full(steps + 1, math.nan)
    v_arr = np.full(steps + 1, math.nan)
    u_arr[: len(us)] = us
    v_arr[: len(vs)] = vs
    return u_arr, v_arr, blowup
