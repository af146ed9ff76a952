# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernel: interprets an expression's postfix program per stage.

Must stay arithmetically identical to ``_rk4_py.rk4`` (same operation order,
no FMA contraction) so both backends produce bitwise-equal trajectories.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sin, cos, tan, sinh, cosh, tanh, sqrt, fabs, pow, isfinite

cnp.import_array()

DEF OP_CONST = 0
DEF OP_T = 1
DEF OP_U = 2
DEF OP_UP = 3
DEF OP_NEG = 4
DEF OP_ADD = 5
DEF OP_SUB = 6
DEF OP_MUL = 7
DEF OP_DIV = 8
DEF OP_POW = 9
DEF OP_EXP = 10
DEF OP_LN = 11
DEF OP_SIN = 12
DEF OP_COS = 13
DEF OP_TAN = 14
DEF OP_SINH = 15
DEF OP_COSH = 16
DEF OP_TANH = 17
DEF OP_SQRT = 18
DEF OP_ABS = 19


cdef inline double run(const int[::1] code, const double[::1] consts,
                       double[::1] stack, double t, double u, double up) noexcept nogil:
    cdef Py_ssize_t pc = 0, sp = 0, n = code.shape[0]
    cdef int op
    while pc < n:
        op = code[pc]
        pc += 1
        if op == OP_CONST:
            stack[sp] = consts[code[pc]]
            pc += 1
            sp += 1
        elif op == OP_T:
            stack[sp] = t
            sp += 1
        elif op == OP_U:
            stack[sp] = u
            sp += 1
        elif op == OP_UP:
            stack[sp] = up
            sp += 1
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == OP_POW:
            sp -= 1
            stack[sp - 1] = pow(stack[sp - 1], stack[sp])
        elif op == OP_EXP:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == OP_LN:
            stack[sp - 1] = log(stack[sp - 1])
        elif op == OP_SIN:
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == OP_TAN:
            stack[sp - 1] = tan(stack[sp - 1])
        elif op == OP_SINH:
            stack[sp - 1] = sinh(stack[sp - 1])
        elif op == OP_COSH:
            stack[sp - 1] = cosh(stack[sp - 1])
        elif op == OP_TANH:
            stack[sp - 1] = tanh(stack[sp - 1])
        elif op == OP_SQRT:
            stack[sp - 1] = sqrt(stack[sp - 1])
        elif op == OP_ABS:
            stack[sp - 1] = fabs(stack[sp - 1])
    return stack[0]


def rk4(rhs, double a, double b, double u_a, double v_a, Py_ssize_t steps, double guard):
    """Integrate u'' = f(t, u, u') with classical RK4 on a uniform grid.

    Returns ``(u, v, blowup)`` where ``blowup`` is the index of the first node
    that is non-finite or exceeds ``guard`` in magnitude, or -1. On blow-up the
    arrays are valid only up to ``blowup - 1``.
    """
    program = rhs.program
    cdef const int[::1] code = np.asarray(program.code, dtype=np.intc)
    cdef const double[::1] consts = np.asarray(program.consts, dtype=np.float64) \
        if len(program.consts) else np.zeros(1)
    cdef double[::1] stack = np.empty(max(program.stack_size, 1))
    u_arr = np.full(steps + 1, np.nan)
    v_arr = np.full(steps + 1, np.nan)
    cdef double[::1] us = u_arr
    cdef double[::1] vs = v_arr
    cdef double h = (b - a) / steps
    cdef double half = 0.5 * h
    cdef double t, u, v, cu = 0.0, cv = 0.0, du, dv, su, sv, k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v
    cdef Py_ssize_t i, blowup = -1

    us[0] = u_a
    vs[0] = v_a
    with nogil:
        if not (fabs(u_a) <= guard and fabs(v_a) <= guard):
            blowup = 0
        u = u_a
        v = v_a
        i = 0
        while blowup < 0 and i < steps:
            t = a + i * h
            k1u = v
            k1v = run(code, consts, stack, t, u, v)
            k2u = v + half * k1v
            k2v = run(code, consts, stack, t + half, u + half * k1u, v + half * k1v)
            k3u = v + half * k2v
            k3v = run(code, consts, stack, t + half, u + half * k2u, v + half * k2v)
            k4u = v + h * k3v
            k4v = run(code, consts, stack, t + h, u + h * k3u, v + h * k3v)
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
            us[i] = u
            vs[i] = v
            if not (fabs(u) <= guard and fabs(v) <= guard):
                blowup = i
    return u_arr, v_arr, blowup
