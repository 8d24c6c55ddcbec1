import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hadquant.geometry import SPD, Euclidean, Hyperboloid

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

MANIFOLDS = {
    "euclidean2": Euclidean(2),
    "euclidean3": Euclidean(3),
    "hyperboloid": Hyperboloid(2),
    "hyperboloid-k0.25": Hyperboloid(3, kappa=-0.25),
    "spd3": SPD(3),
}


@pytest.fixture(params=sorted(MANIFOLDS), ids=sorted(MANIFOLDS))
def manifold(request):
    return MANIFOLDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ------------------------------------------------------
_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """``record(number, name, ok, detail)`` for the acceptance summary."""
    log = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number, name, ok, detail=""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        log[number] = line
        with request.config.pluginmanager.get_plugin("capturemanager").global_and_fixture_disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_ACCEPTANCE, {})
    if log:
        terminalreporter.section("acceptance criteria")
        for k in sorted(log):
            terminalreporter.write_line(log[k])
