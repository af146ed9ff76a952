"""Shooting iterations v <- v - E(v)/k and the H1-seminorm projection.

All five strategies share the update; they differ only in how the slope
``k`` is chosen:

=======================  ==================================================
projection               k = b - a
fixed-point              k = a fixed nonzero constant (usually 1)
newton                   k = central-difference slope of E at the current v
constant-slope-newton    k = that slope at the starting guess, then frozen
secant                   k = slope of the chord through the last two iterates
=======================  ==================================================
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ivp import Blowup, IntegratorConfig, Trajectory, end_state, integrate
from .problems import Tpbvp

__all__ = [
    "Method", "MethodSpec", "Status", "IterationRecord", "SolveResult",
    "SlopeDegenerate", "deviation", "update_step", "slope_for", "solve",
    "project_trajectory", "projection_seminorm", "seminorm_quadrature",
]


class Method(enum.Enum):
    PROJECTION = "projection"
    FIXED_POINT = "fixed-point"
    NEWTON = "newton"
    CONSTANT_SLOPE_NEWTON = "constant-slope-newton"
    SECANT = "secant"


class Status(enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    MAX_ITERATIONS = "MaxIterationsReached"
    SLOPE_DEGENERATE = "SlopeDegenerate"


class SlopeDegenerate(ArithmeticError):
    """The slope k is zero or non-finite, so no update can be taken."""


@dataclass(frozen=True)
class MethodSpec:
    kind: Method = Method.PROJECTION
    fixed_slope: float = 1.0
    secant_seed: Optional[tuple] = None
    fd_step: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "kind", Method(self.kind))
        if self.fixed_slope == 0 or not math.isfinite(self.fixed_slope):
            raise ValueError("fixed_slope must be finite and nonzero")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")
        if self.secant_seed is not None:
            s0, s1 = map(float, self.secant_seed)
            if s0 == s1:
                raise ValueError("secant seed values must be distinct")
            object.__setattr__(self, "secant_seed", (s0, s1))

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class IterationRecord:
    """One iterate. ``E`` is nan if the shot blew up; ``k`` is nan if no update followed."""

    index: int
    v: float
    E: float
    k: float = math.nan

    def to_json(self):
        return {"index": self.index, "v": _json_float(self.v),
                "E": _json_float(self.E), "k": _json_float(self.k)}


def _json_float(x):
    return x if math.isfinite(x) else None


@dataclass
class SolveResult:
    status: Status
    trace: list
    root: float = math.nan
    final_trajectory: Optional[Trajectory] = field(default=None, repr=False)
    method: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def iterations(self) -> int:
        """Number of updates performed (trace length minus the starting guess)."""
        return len(self.trace) - 1

    @property
    def shots(self) -> int:
        """Number of IVP solves recorded in the trace."""
        return len(self.trace)

    @property
    def final_E(self) -> float:
        return self.trace[-1].E

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "status": self.status.value,
            "root": _json_float(self.root),
            "iterations": self.iterations,
            "trace": [r.to_json() for r in self.trace],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def deviation(problem: Tpbvp, v_a: float, cfg: IntegratorConfig = IntegratorConfig()) -> float:
    """E(v_a) = u(b; v_a) - u_b. Raises :class:`Blowup` on a divergent shot."""
    return _shoot(problem, v_a, cfg)[0]


def _shoot(problem, v_a, cfg):
    traj = integrate(problem.rhs, problem.a, problem.b, problem.u_a, v_a, cfg)
    return end_state(traj)[0] - problem.u_b, traj


def update_step(v: float, E: float, k: float) -> float:
    if k == 0 or not math.isfinite(k):
        raise SlopeDegenerate(f"slope k={k!r} admits no update")
    return v - E / k


def fd_slope(problem, v, step, cfg):
    """Central-difference dE/dv at ``v`` with step max(step, step*|v|)."""
    h = max(step, step * abs(v))
    return (deviation(problem, v + h, cfg) - deviation(problem, v - h, cfg)) / (2 * h)


@dataclass
class IterationState:
    """What slope rules may look at: the current iterate and the history."""

    v: float
    E: float
    previous: Optional[tuple] = None  # (v, E) of the preceding iterate
    frozen_slope: Optional[float] = None


def slope_for(method: MethodSpec, problem: Tpbvp, state: IterationState,
              cfg: IntegratorConfig = IntegratorConfig()) -> float:
    """Slope k for the next update.

    Raises :class:`SlopeDegenerate` for a zero or non-finite slope and lets
    :class:`Blowup` from finite-difference shots propagate.
    """
    kind = method.kind
    if kind is Method.PROJECTION:
        k = problem.b - problem.a
    elif kind is Method.FIXED_POINT:
        k = method.fixed_slope
    elif kind is Method.NEWTON:
        k = fd_slope(problem, state.v, method.fd_step, cfg)
    elif kind is Method.CONSTANT_SLOPE_NEWTON:
        if state.frozen_slope is None:
            state.frozen_slope = fd_slope(problem, state.v, method.fd_step, cfg)
        k = state.frozen_slope
    else:
        if state.previous is None:
            raise ValueError("secant slope needs a previous iterate")
        v0, E0 = state.previous
        k = (state.E - E0) / (state.v - v0) if state.v != v0 else math.nan
    if k == 0 or not math.isfinite(k):
        raise SlopeDegenerate(f"{method.name}: slope k={k!r} at v={state.v!r}")
    return k


def default_secant_seed(v0: float) -> tuple:
    return (v0 - 0.2, v0)


def solve(problem: Tpbvp, method: MethodSpec = MethodSpec(), v0: float = 0.0, tol: float = 1e-6,
          max_iters: int = 100, cfg: IntegratorConfig = IntegratorConfig()) -> SolveResult:
    """Iterate v <- v - E(v)/k until |E(v)| < tol.

    The trace holds every iterate, the starting guess included. The secant
    method starts from its seed pair (default ``(v0 - 0.2, v0)``) and the first
    two records are those seeds. ``max_iters`` bounds the number of updates.
    Divergence (a blown-up shot, |v| beyond ``cfg.guard`` or a non-finite
    iterate) is reported through the status, never raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    trace = []

    def finish(status, root=math.nan, traj=None):
        return SolveResult(status, trace, root, traj, method.name)

    if method.kind is Method.SECANT:
        seeds = list(method.secant_seed or default_secant_seed(float(v0)))
    else:
        seeds = [float(v0)]
    v = seeds.pop(0)
    state = IterationState(v, math.nan)

    for index in range(max_iters + 1):
        try:
            E, traj = _shoot(problem, v, cfg)
        except Blowup:
            trace.append(IterationRecord(index, v, math.nan))
            return finish(Status.DIVERGED)
        if not math.isfinite(E):
            trace.append(IterationRecord(index, v, E))
            return finish(Status.DIVERGED)
        if abs(E) < tol:
            trace.append(IterationRecord(index, v, E))
            return finish(Status.CONVERGED, v, traj)
        if index == max_iters:
            trace.append(IterationRecord(index, v, E))
            return finish(Status.MAX_ITERATIONS)

        state.v, state.E = v, E
        if seeds:
            # seed record: the next point is given, not computed
            trace.append(IterationRecord(index, v, E))
            v_next = seeds.pop(0)
        else:
            try:
                k = slope_for(method, problem, state, cfg)
            except Blowup:
                trace.append(IterationRecord(index, v, E))
                return finish(Status.DIVERGED)
            except SlopeDegenerate:
                trace.append(IterationRecord(index, v, E))
                return finish(Status.SLOPE_DEGENERATE)
            trace.append(IterationRecord(index, v, E, k))
            v_next = update_step(v, E, k)
        state.previous = (v, E)
        if not math.isfinite(v_next) or abs(v_next) > cfg.guard:
            return finish(Status.DIVERGED)
        v = v_next
    raise AssertionError("unreachable")


# -- projection ----------------------------------------------------------

def project_trajectory(traj: Trajectory, u_b: float) -> Trajectory:
    """The function through both boundary values with the same second derivative.

    u*(t) = u(t) - E (t - a)/(b - a) and u*'(t) = u'(t) - E/(b - a), where
    E = u(b) - u_b. Among functions meeting both boundary conditions this one
    minimizes the H1 seminorm of u* - u.
    """
    a, b = traj.a, traj.b
    E = float(traj.u[-1]) - u_b
    L = b - a
    u_star = traj.u - E * (traj.t - a) / L
    v_star = traj.v - E / L
    # pin the right end exactly; (t-a)/L may round away from 1
    u_star[-1] = u_b
    return Trajectory(traj.t, u_star, v_star)


def projection_seminorm(traj: Trajectory, u_b: float) -> float:
    """S = integral of (u*' - u')^2 over [a, b]; equals E^2/(b - a)."""
    E = float(traj.u[-1]) - u_b
    return E * E / (traj.b - traj.a)


def seminorm_quadrature(t, dw) -> float:
    """Trapezoid-rule integral of ``dw**2`` over the grid ``t``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(dw, dtype=float) ** 2
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))
