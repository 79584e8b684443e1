import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from balancelaw.models import CATALOG, build_model

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def catalog():
    return {name: build_model(name) for name in CATALOG}


@pytest.fixture(params=CATALOG)
def model(request, catalog):
    return catalog[request.param]


def draw(model, count, seed=0):
    rng = np.random.default_rng(seed)
    lo, hi = model.box[:, 0], model.box[:, 1]
    return model.from_sample(lo + (hi - lo) * rng.random((count, lo.size)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for number in sorted(verdicts):
            terminalreporter.write_line(verdicts[number])
