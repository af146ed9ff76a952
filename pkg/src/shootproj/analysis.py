"""E-curve sweeps, the local convergence test |1 - m/k| < 1, and order estimates."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ivp import Blowup, IntegratorConfig
from .problems import Tpbvp
from .shooting import IterationRecord, deviation

__all__ = ["SweepRow", "SweepTable", "ConvergenceVerdict", "sweep", "root_slope",
           "convergence_check", "estimate_order"]


@dataclass(frozen=True)
class SweepRow:
    v: float
    E: Optional[float]  # None marks a blown-up shot

    @property
    def ok(self) -> bool:
        return self.E is not None


@dataclass(frozen=True)
class SweepTable:
    rows: tuple

    def __post_init__(self):
        if len(self.rows) < 2:
            raise ValueError("a sweep needs at least 2 rows")
        vs = [r.v for r in self.rows]
        if any(x >= y for x, y in zip(vs, vs[1:])):
            raise ValueError("sweep abscissae must be strictly increasing")

    def __len__(self):
        return len(self.rows)

    @property
    def v(self) -> np.ndarray:
        return np.array([r.v for r in self.rows])

    @property
    def E(self) -> np.ndarray:
        """Deviation values with nan at blow-up markers."""
        return np.array([math.nan if r.E is None else r.E for r in self.rows])

    def sign_changes(self) -> int:
        E = self.E[np.isfinite(self.E)]
        s = np.sign(E[E != 0])
        return int(np.count_nonzero(s[1:] != s[:-1]))

    def local_extrema(self) -> list:
        """Abscissae of interior local extrema among consecutive finite rows."""
        out = []
        rows = self.rows
        for r0, r1, r2 in zip(rows, rows[1:], rows[2:]):
            if not (r0.ok and r1.ok and r2.ok):
                continue
            if (r1.E - r0.E) * (r2.E - r1.E) < 0:
                out.append(r1.v)
        return out

    def write_csv(self, path_or_file) -> None:
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("v", "E", "status"))
        for r in self.rows:
            w.writerow((repr(r.v), "" if r.E is None else repr(r.E), "ok" if r.ok else "blowup"))

    @classmethod
    def read_csv(cls, path) -> "SweepTable":
        with open(path, newline="") as fh:
            rows = [SweepRow(float(r["v"]), float(r["E"]) if r["status"] == "ok" else None)
                    for r in csv.DictReader(fh)]
        return cls(tuple(rows))


def _safe_deviation(problem, v, cfg):
    try:
        E = deviation(problem, v, cfg)
    except Blowup:
        return SweepRow(v, None)
    return SweepRow(v, E if math.isfinite(E) else None)


def sweep(problem: Tpbvp, v_lo: float, v_hi: float, n: int,
          cfg: IntegratorConfig = IntegratorConfig(), workers: int = 1) -> SweepTable:
    """Evaluate E on ``n`` equally spaced points of [v_lo, v_hi].

    Blown-up shots are kept as rows with ``E=None``. With ``workers > 1`` the
    shots run on a thread pool; row order is unaffected.
    """
    if not v_lo < v_hi:
        raise ValueError("v_lo must be less than v_hi")
    if n < 2:
        raise ValueError("n must be >= 2")
    vs = np.linspace(v_lo, v_hi, n).tolist()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda v: _safe_deviation(problem, v, cfg), vs))
    else:
        rows = [_safe_deviation(problem, v, cfg) for v in vs]
    return SweepTable(tuple(rows))


def root_slope(problem: Tpbvp, root: float, cfg: IntegratorConfig = IntegratorConfig()) -> float:
    """m = dE/dv at ``root`` by central difference (step max(1e-6, 1e-6|root|)).

    Raises :class:`Blowup` if either probe shot blows up.
    """
    if not math.isfinite(root):
        raise ValueError("root must be finite")
    h = max(1e-6, 1e-6 * abs(root))
    return (deviation(problem, root + h, cfg) - deviation(problem, root - h, cfg)) / (2 * h)


@dataclass(frozen=True)
class ConvergenceVerdict:
    m: float
    k: float
    contraction: float
    locally_convergent: bool
    quadratic: bool


def convergence_check(m: float, k: float) -> ConvergenceVerdict:
    """Local behaviour of v <- v - E/k near a root where E has slope ``m``.

    The iteration contracts iff |1 - m/k| < 1 (for k > 0: 0 < m < 2k) and is
    quadratic when k equals m (relative tolerance 1e-6).
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    contraction = abs(1 - m / k)
    return ConvergenceVerdict(
        m=m, k=k, contraction=contraction,
        locally_convergent=contraction < 1,
        quadratic=math.isclose(m, k, rel_tol=1e-6),
    )


def estimate_order(trace: Sequence[IterationRecord], root: float, tail: int = 8) -> float:
    """Empirical order p from log|e_{n+1}| ~ p log|e_n| with e = v - root.

    Fits the last ``tail`` usable iterates only and clamps to [0.5, 3].
    """
    usable = [(rec.index, abs(rec.v - root)) for rec in trace]
    usable = [(i, e) for i, e in usable if math.isfinite(e) and e > 0][-tail:]
    pairs = [(e0, e1) for (i0, e0), (i1, e1) in zip(usable, usable[1:]) if i1 == i0 + 1]
    if len(pairs) < 3:
        raise ValueError(f"need at least 4 consecutive usable iterates, have {len(pairs) + 1}")
    x, y = np.log(np.array(pairs)).T
    slope = np.polyfit(x, y, 1)[0]
    return float(min(max(slope, 0.5), 3.0))
