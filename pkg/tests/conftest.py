import pytest
from hypothesis import HealthCheck, settings

from earedge.kws import load_model
from earedge.scenario import bundled_path

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def int8_model():
    return load_model(bundled_path("kws_int8.kws"))


@pytest.fixture(scope="session")
def float_model():
    return load_model(bundled_path("kws_float.kws"))


@pytest.fixture(scope="session")
def verdicts(request):
    """Collects one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(VERDICTS, [])
    return lines


VERDICTS = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
