"""Shooting methods for u'' = f(t, u, u'), u(a) = u_a, u(b) = u_b.

The shooting-projection update v <- v - E(v)/(b - a) alongside fixed-point,
Newton, constant-slope Newton and secant shooting, with tools to sweep the
deviation curve E(v) and check local convergence.
"""

from .analysis import ConvergenceVerdict, SweepTable, convergence_check, estimate_order, root_slope, sweep
from .expr import Expression, ParseError, evaluate, parse, to_source
from .ivp import Blowup, IntegratorConfig, Trajectory, end_state, integrate, sample
from .problems import Tpbvp, builtin, exact_error, load
from .shooting import (
    IterationRecord, Method, MethodSpec, SolveResult, Status, deviation,
    project_trajectory, projection_seminorm, slope_for, solve, update_step,
)

__version__ = "0.1.0"
