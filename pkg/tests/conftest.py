import pytest
from hypothesis import HealthCheck, settings

from cbfweyl import cbf

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# the five families used throughout the interval and oracle checks
CORE = [
    cbf.Power(0.5),
    cbf.Power(1.0),
    cbf.Power(1.5),
    cbf.KleinGordon(),
    cbf.SumOfPowers(1.0, 0.5),
]
# everything cheap to evaluate (measure-defined families use nested quadrature)
FAST = CORE + [cbf.Power(2.0), cbf.Log1p()]


def ids(specs):
    return [s.label() for s in specs]


@pytest.fixture(params=FAST, ids=ids(FAST))
def fast_spec(request):
    return request.param


@pytest.fixture(params=CORE, ids=ids(CORE))
def core_spec(request):
    return request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
