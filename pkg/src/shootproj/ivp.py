"""Fixed-step RK4 integration of u'' = f(t, u, u') from initial data at ``a``.

The inner loop runs in the compiled ``_rk4`` extension when it is importable
and in ``_rk4_py`` otherwise. Set ``SHOOTPROJ_BACKEND=python`` to force the
fallback. Both backends give bitwise-identical trajectories.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _rk4_py
from .expr import Expression

try:
    from . import _rk4 as _rk4_c
except ImportError:  # extension not built
    _rk4_c = None

BACKENDS = {"python": _rk4_py.rk4}
if _rk4_c is not None:
    BACKENDS["c"] = _rk4_c.rk4

_requested = os.environ.get("SHOOTPROJ_BACKEND", "auto")
if _requested == "auto":
    BACKEND = "c" if "c" in BACKENDS else "python"
elif _requested in BACKENDS:
    BACKEND = _requested
else:
    raise ImportError(f"SHOOTPROJ_BACKEND={_requested!r} is not available; have {sorted(BACKENDS)}")


@dataclass(frozen=True)
class IntegratorConfig:
    steps: int = 1000
    guard: float = 1e8

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if not self.guard > 0:
            raise ValueError(f"guard must be positive, got {self.guard!r}")


class Blowup(ArithmeticError):
    """An integration left the finite region bounded by the guard.

    Not a program error: shooting treats it as a divergent shot.
    """

    def __init__(self, step: int, t: float):
        super().__init__(f"integration blew up at step {step} (t={t!r})")
        self.step = step
        self.t = t


class Trajectory:
    """Nodes ``(t_i, u_i, v_i)`` of an IVP solution on a uniform grid.

    ``v`` holds u' at the nodes. The arrays are read-only.
    """

    __slots__ = ("t", "u", "v")

    def __init__(self, t, u, v):
        t, u, v = (np.array(x, dtype=float) for x in (t, u, v))
        if not (t.ndim == 1 and t.shape == u.shape == v.shape and t.size >= 2):
            raise ValueError("t, u, v must be 1-d arrays of equal length >= 2")
        for x in (t, u, v):
            x.flags.writeable = False
        self.t, self.u, self.v = t, u, v

    @property
    def a(self) -> float:
        return float(self.t[0])

    @property
    def b(self) -> float:
        return float(self.t[-1])

    @property
    def steps(self) -> int:
        return self.t.size - 1

    def __len__(self):
        return self.t.size

    def __repr__(self):
        return f"Trajectory(a={self.a!r}, b={self.b!r}, steps={self.steps})"

    def nodes(self):
        return zip(self.t.tolist(), self.u.tolist(), self.v.tolist())


def grid(a: float, b: float, steps: int) -> np.ndarray:
    h = (b - a) / steps
    t = a + np.arange(steps + 1) * h
    t[-1] = b
    return t


def integrate(rhs: Expression, a: float, b: float, u_a: float, v_a: float,
              cfg: IntegratorConfig = IntegratorConfig(), backend: str | None = None) -> Trajectory:
    """Solve u'' = rhs(t, u, u') with u(a) = u_a, u'(a) = v_a by classical RK4.

    Raises
    ------
    Blowup
        If u or u' becomes non-finite or exceeds ``cfg.guard`` in magnitude.
    ValueError
        On non-finite inputs or ``b <= a``.
    """
    a, b, u_a, v_a = float(a), float(b), float(u_a), float(v_a)
    if not all(map(math.isfinite, (a, b, u_a, v_a))):
        raise ValueError("a, b, u_a and v_a must be finite")
    if not b > a:
        raise ValueError("b must exceed a")
    kernel = BACKENDS[backend or BACKEND]
    u, v, blowup = kernel(rhs, a, b, u_a, v_a, int(cfg.steps), float(cfg.guard))
    t = grid(a, b, cfg.steps)
    if blowup >= 0:
        raise Blowup(int(blowup), float(t[blowup]))
    return Trajectory(t, u, v)


def end_state(traj: Trajectory) -> tuple[float, float]:
    return float(traj.u[-1]), float(traj.v[-1])


def sample(traj: Trajectory, t: float) -> tuple[float, float]:
    """Cubic Hermite interpolation of (u, u') at ``t`` within the containing step."""
    ts = traj.t
    if not ts[0] <= t <= ts[-1]:
        raise ValueError(f"t={t!r} outside [{ts[0]!r}, {ts[-1]!r}]")
    i = int(np.searchsorted(ts, t, side="right")) - 1
    i = min(max(i, 0), ts.size - 2)
    t0, t1 = ts[i], ts[i + 1]
    if t == t0:
        return float(traj.u[i]), float(traj.v[i])
    if t == t1:
        return float(traj.u[i + 1]), float(traj.v[i + 1])
    h = t1 - t0
    s = (t - t0) / h
    u0, u1 = traj.u[i], traj.u[i + 1]
    m0, m1 = traj.v[i] * h, traj.v[i + 1] * h
    s2, s3 = s * s, s * s * s
    u = ((2 * s3 - 3 * s2 + 1) * u0 + (s3 - 2 * s2 + s) * m0
         + (-2 * s3 + 3 * s2) * u1 + (s3 - s2) * m1)
    du = ((6 * s2 - 6 * s) * u0 + (3 * s2 - 4 * s + 1) * m0
          + (-6 * s2 + 6 * s) * u1 + (3 * s2 - 2 * s) * m1) / h
    return float(u), float(du)


def write_csv(traj: Trajectory, path_or_file) -> None:
    """Write ``t,u,up`` rows, one per node, with round-trip float precision."""
    if hasattr(path_or_file, "write"):
        _write_rows(traj, path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write_rows(traj, fh)


def _write_rows(traj, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("t", "u", "up"))
    for row in traj.nodes():
        w.writerow([repr(x) for x in row])


def read_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return Trajectory([float(r["t"]) for r in rows],
                      [float(r["u"]) for r in rows],
                      [float(r["up"]) for r in rows])
