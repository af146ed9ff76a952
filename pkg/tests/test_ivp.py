import math

import numpy as np
import pytest

from shootproj import ivp
from shootproj.expr import parse
from shootproj.ivp import Blowup, IntegratorConfig, Trajectory, end_state, integrate, sample
from shootproj.problems import builtin

CFG = IntegratorConfig()

# derivative of t/sqrt(1+t^2) is (1+t^2)^(-3/2); values at t=1, 2 checked with mpmath
EX2_V_A = 2 ** -1.5
EX2_U_B = 2 / math.sqrt(5)
EX2_V_B = 0.0894427190999915878


def line():
    return integrate(parse("0"), 0, 1, 0, 1, CFG)


def parabola():
    return integrate(parse("2"), 0, 1, 0, 0, CFG)


def ex2():
    return integrate(parse("-3*u^2*up/t"), 1, 2, 1 / math.sqrt(2), EX2_V_A, CFG)


def test_config_defaults_and_validation():
    assert IntegratorConfig() == IntegratorConfig(1000, 1e8)
    for bad in (dict(steps=0), dict(steps=2.5), dict(guard=0), dict(guard=-1)):
        with pytest.raises(ValueError):
            IntegratorConfig(**bad)


def test_straight_line_exact(backend):
    # exact in real arithmetic; 1000 accumulated steps of h=0.001 leave rounding only
    u_b, v_b = end_state(line())
    assert v_b == 1.0
    assert abs(u_b - 1.0) <= 1e-13


def test_parabola(backend):
    u_b, v_b = end_state(parabola())
    assert u_b == pytest.approx(1.0, abs=1e-13)
    assert v_b == pytest.approx(2.0, abs=1e-12)


def test_ex2_end_state(backend):
    u_b, v_b = end_state(ex2())
    assert abs(u_b - EX2_U_B) <= 1e-8
    assert abs(v_b - EX2_V_B) <= 1e-8


def test_trajectory_grid():
    traj = integrate(parse("u"), -1.5, 2.0, 1, 0, IntegratorConfig(steps=7))
    assert len(traj) == 8 and traj.steps == 7
    assert traj.t[0] == -1.5 and traj.t[-1] == 2.0
    assert np.all(np.diff(traj.t) > 0)
    assert np.allclose(np.diff(traj.t), 3.5 / 7, rtol=0, atol=1e-15)
    assert (traj.a, traj.b) == (-1.5, 2.0)


def test_trajectory_is_read_only():
    traj = line()
    with pytest.raises(ValueError):
        traj.u[0] = 5.0


@pytest.mark.parametrize("rhs", ["0", "1", "-3.5", "t", "2*t - 1", "3*t^2", "t^2 - 4*t + 1"])
def test_exact_on_low_degree_polynomials_in_t(rhs, backend):
    # u'' = c2 t^2 + c1 t + c0 has a quartic solution, which RK4 reproduces
    e = parse(rhs)
    a, b, u_a, v_a = -0.5, 1.7, 0.3, -1.1
    traj = integrate(e, a, b, u_a, v_a, IntegratorConfig(steps=37))

    def exact(t):
        # integrate twice by Simpson on [a, t]: exact for the integrand degrees involved
        s = np.linspace(a, t, 3)
        f = np.array([e(x, 0, 0) for x in s])
        h = (t - a) / 2
        # u(t) = u_a + v_a (t-a) + int_a^t (t-s) f(s) ds
        return u_a + v_a * (t - a) + h / 3 * ((t - s[0]) * f[0] + 4 * (t - s[1]) * f[1] + (t - s[2]) * f[2])

    for t, u in zip(traj.t, traj.u):
        assert u == pytest.approx(exact(t), abs=1e-12)


def test_determinism(backend):
    p = builtin("paper-ex3")
    t1 = integrate(p.rhs, p.a, p.b, p.u_a, 2.0, CFG)
    t2 = integrate(p.rhs, p.a, p.b, p.u_a, 2.0, CFG)
    assert t1.u.tobytes() == t2.u.tobytes() and t1.v.tobytes() == t2.v.tobytes()


@pytest.mark.skipif("c" not in ivp.BACKENDS, reason="compiled kernel not built")
@pytest.mark.parametrize("name", ["paper-ex1", "paper-ex2", "paper-ex3"])
@pytest.mark.parametrize("v_a", [-1.0, 0.0, 0.37, 3.2232])
def test_backends_bitwise_equal(name, v_a):
    p = builtin(name)
    out = []
    for b in ("c", "python"):
        try:
            out.append(integrate(p.rhs, p.a, p.b, p.u_a, v_a, CFG, backend=b))
        except Blowup as exc:
            out.append(exc.step)
    if isinstance(out[0], int):
        assert out[0] == out[1]
        return
    assert out[0].u.tobytes() == out[1].u.tobytes()
    assert out[0].v.tobytes() == out[1].v.tobytes()


def test_rk4_order_on_ex1(backend):
    p = builtin("paper-ex1")
    v_a = math.sqrt(2) / 4 * math.tan(2)
    ref = end_state(integrate(p.rhs, p.a, p.b, p.u_a, v_a, IntegratorConfig(10000)))[0]
    errs = [abs(end_state(integrate(p.rhs, p.a, p.b, p.u_a, v_a, IntegratorConfig(n)))[0] - ref)
            for n in (250, 500, 1000)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    for r in ratios:
        assert 14 <= r <= 18, ratios


def test_blowup_is_reported(backend):
    with pytest.raises(Blowup) as info:
        integrate(parse("exp(u)"), 0, 5, 0, 10, CFG)
    assert 0 < info.value.step <= CFG.steps
    with pytest.raises(Blowup):
        integrate(parse("u"), 0, 50, 1, 0, IntegratorConfig(guard=1e3))
    with pytest.raises(Blowup) as info:
        integrate(parse("0"), 0, 1, 0, 1e9, CFG)
    assert info.value.step == 0


def test_nan_rhs_blows_up(backend):
    with pytest.raises(Blowup):
        integrate(parse("ln(u)"), 0, 1, -1, 0, CFG)


@pytest.mark.parametrize("args", [(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, math.nan, 0), (0, 1, 0, math.inf)])
def test_integrate_preconditions(args):
    with pytest.raises(ValueError):
        integrate(parse("0"), *args, CFG)


def test_sample_at_nodes_is_exact():
    traj = ex2()
    for i in (0, 1, 500, 999, 1000):
        assert sample(traj, traj.t[i]) == (traj.u[i], traj.v[i])


def test_sample_interpolates():
    assert sample(line(), 0.5) == pytest.approx((0.5, 1.0), abs=1e-15)
    u, up = sample(parabola(), 0.5)
    assert abs(u - 0.25) <= 1e-12 and abs(up - 1.0) <= 1e-12
    u, up = sample(ex2(), 1.2345)
    exact = 1.2345 / math.sqrt(1 + 1.2345 ** 2)
    assert abs(u - exact) < 1e-9


def test_sample_outside_interval():
    with pytest.raises(ValueError):
        sample(line(), 1.0001)
    with pytest.raises(ValueError):
        sample(line(), -1e-9)


def test_csv_round_trip(tmp_path):
    traj = ex2()
    path = tmp_path / "traj.csv"
    ivp.write_csv(traj, path)
    assert path.read_text().splitlines()[0] == "t,u,up"
    back = ivp.read_csv(path)
    assert back.u.tobytes() == traj.u.tobytes()
    assert back.t.tobytes() == traj.t.tobytes()
    assert back.v.tobytes() == traj.v.tobytes()


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([0.0], [0.0], [0.0])
    with pytest.raises(ValueError):
        Trajectory([0, 1], [0, 1, 2], [0, 1])


@pytest.mark.parametrize("env, expected", [
    ("python", "python"),
    ("auto", "c" if "c" in ivp.BACKENDS else "python"),
])
def test_backend_selected_at_import(env, expected):
    import os
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-c", "from shootproj import ivp; print(ivp.BACKEND)"],
                          env={**os.environ, "SHOOTPROJ_BACKEND": env}, capture_output=True, text=True)
    assert proc.stdout.strip() == expected


def test_unknown_backend_rejected():
    import os
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-c", "import shootproj"],
                          env={**os.environ, "SHOOTPROJ_BACKEND": "fortran"}, capture_output=True, text=True)
    assert proc.returncode != 0 and "SHOOTPROJ_BACKEND" in proc.stderr
