import pytest

from shootproj import ivp


@pytest.fixture(params=sorted(ivp.BACKENDS))
def backend(request, monkeypatch):
    """Run a test once per available RK4 backend."""
    monkeypatch.setattr(ivp, "BACKEND", request.param)
    return request.param


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
