import os
import sys
import time
from pathlib import Path

import pytest
from gmpy2 import mpq
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from lunelab.bounds import run_scenario  # noqa: E402
from lunelab.flows import ScenarioConfig  # noqa: E402

settings.register_profile("ci", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

EPS = mpq(1, 100)
SCENARIOS = Path(__file__).parent.parent / "scenarios"


@pytest.fixture(scope="session")
def main_config() -> ScenarioConfig:
    return ScenarioConfig.load(SCENARIOS / "torus.json")


@pytest.fixture(scope="session")
def main_run(main_config):
    """The six-lune scenario, run once per session; (report, seconds)."""
    t0 = time.perf_counter()
    rep = run_scenario(main_config)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="session")
def genus_run():
    return run_scenario(ScenarioConfig.load(SCENARIOS / "genus.json"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
