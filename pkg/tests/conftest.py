import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

from holee_barriers import DriftCurve, build_semi_spectrum  # noqa: E402
from holee_barriers.fixtures import JGB_PARAMS  # noqa: E402
from holee_barriers.spectral import ModelParams  # noqa: E402


@pytest.fixture(scope="session")
def jgb():
    z, beta, r0 = JGB_PARAMS
    params = ModelParams.from_beta(beta)
    return dict(z=z, beta=beta, r0=r0, params=params, sigma=params.sigma,
                spectrum=build_semi_spectrum(params), drift=DriftCurve.constant(r0))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from test_acceptance import ACCEPTANCE_KEY

    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
