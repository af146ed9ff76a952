"""Dirichlet two-point boundary value problems: built-ins and a config-file format.

Config files are ``key = value`` lines::

    # comment
    name = my-problem
    a = 0
    b = 5
    u_a = 1
    u_b = 2
    rhs = "-(1/50)*u*cosh(t*u/5 + u)"
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .expr import Expression, ParseError, parse
from .ivp import Trajectory

__all__ = ["Tpbvp", "ExactSolution", "ConfigError", "builtin", "BUILTINS",
           "load", "loads", "dumps", "dump", "exact_error"]


@dataclass(frozen=True)
class ExactSolution:
    u: Callable[[float], float]
    du: Callable[[float], float]


@dataclass(frozen=True)
class Tpbvp:
    """u'' = rhs(t, u, u') on (a, b) with u(a) = u_a and u(b) = u_b."""

    name: str
    a: float
    b: float
    u_a: float
    u_b: float
    rhs: Expression
    exact: Optional[ExactSolution] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for key in ("a", "b", "u_a", "u_b"):
            x = getattr(self, key)
            if not math.isfinite(x):
                raise ValueError(f"{key} must be finite, got {x!r}")
        if not self.b > self.a:
            raise ValueError("b must exceed a")
        if self.exact is not None:
            if abs(self.exact.u(self.a) - self.u_a) > 1e-9 or abs(self.exact.u(self.b) - self.u_b) > 1e-9:
                raise ValueError(f"exact solution of {self.name!r} misses the boundary values")

    @property
    def length(self) -> float:
        return self.b - self.a


# -- built-ins -----------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def _ex1_theta(t):
    return _SQRT2 / 8 * t + 13 / 6


def _ex1_u(t):
    # ln(tan^2(theta)/2 + 1/2) == -ln 2 - 2 ln|cos theta|
    return -math.log(2.0) - 2.0 * math.log(abs(math.cos(_ex1_theta(t))))


def _ex1_du(t):
    return _SQRT2 / 4 * math.tan(_ex1_theta(t))


def _paper_ex1():
    a, b = -2 * _SQRT2 / 3, 4 * _SQRT2 / 3
    exact = ExactSolution(_ex1_u, _ex1_du)
    return Tpbvp("paper-ex1", a, b, _ex1_u(a), _ex1_u(b), parse("(1/8)*exp(u)"), exact)


def _paper_ex2():
    exact = ExactSolution(lambda t: t / math.sqrt(1 + t * t),
                          lambda t: (1 + t * t) ** -1.5)
    return Tpbvp("paper-ex2", 1.0, 2.0, 1 / math.sqrt(2), 2 / math.sqrt(5),
                 parse("-3*u^2*up/t"), exact)


def _paper_ex3():
    return Tpbvp("paper-ex3", 0.0, 5.0, 1.0, 2.0, parse("-(1/50)*u*cosh(t*u/5 + u)"))


BUILTINS = {
    "paper-ex1": _paper_ex1,
    "paper-ex2": _paper_ex2,
    "paper-ex3": _paper_ex3,
}


def builtin(name: str) -> Tpbvp:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {', '.join(BUILTINS)}") from None


# -- config files --------------------------------------------------------

_KEYS = ("name", "a", "b", "u_a", "u_b", "rhs")


class ConfigError(ValueError):
    def __init__(self, message, line=None, path=None):
        where = f"{path or '<string>'}:{line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.path = path


def _unquote(text):
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _strip_comment(line):
    # '#' inside a quoted value is kept
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def loads(text: str, path=None) -> Tpbvp:
    """Parse a problem from config text. Errors carry the offending line number."""
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError("expected 'key = value'", lineno, path)
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, path)
        value = _unquote(value)
        if key == "rhs":
            try:
                values[key] = parse(value)
            except ParseError as exc:
                raise ConfigError(f"rhs: {exc}", lineno, path) from None
        elif key == "name":
            values[key] = value
        else:
            try:
                values[key] = float(value)
            except ValueError:
                raise ConfigError(f"{key}: not a number: {value!r}", lineno, path) from None
        lines[key] = lineno
    missing = [k for k in _KEYS if k not in values and k != "name"]
    if missing:
        raise ConfigError(f"missing key(s): {', '.join(missing)}", path=path)
    values.setdefault("name", "custom")
    try:
        return Tpbvp(**values)
    except ValueError as exc:
        raise ConfigError(str(exc), path=path) from None


def load(path) -> Tpbvp:
    with open(path) as fh:
        return loads(fh.read(), path=str(path))


def dumps(problem: Tpbvp) -> str:
    rhs = problem.rhs.source or str(problem.rhs)
    return (f"name = {problem.name}\n"
            f"a = {problem.a!r}\n"
            f"b = {problem.b!r}\n"
            f"u_a = {problem.u_a!r}\n"
            f"u_b = {problem.u_b!r}\n"
            f'rhs = "{rhs}"\n')


def dump(problem: Tpbvp, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(problem))


def exact_error(traj: Trajectory, problem: Tpbvp) -> float:
    """Max over nodes of |u_i - exact u(t_i)|."""
    if problem.exact is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution")
    exact = np.array([problem.exact.u(t) for t in traj.t.tolist()])
    return float(np.max(np.abs(traj.u - exact)))
