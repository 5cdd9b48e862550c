import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gossip_mobility import _level_kernels as lk
from gossip_mobility import _sim_kernels as sk
from gossip_mobility.network import NetworkSpec, reachable_from_source

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_spec(rng, n, mobility_density=0.5, gossip_density=0.6, lambda_e=None, mobility=True):
    """Random network with rates in [0.1, 2] whose positions all hear from the source."""
    while True:
        src = np.where(rng.random(n) < 0.5, rng.uniform(0.1, 2.0, n), 0.0)
        if not src.any():
            src[rng.integers(n)] = rng.uniform(0.1, 2.0)
        g = np.where(rng.random((n, n)) < gossip_density, rng.uniform(0.1, 2.0, (n, n)), 0.0)
        np.fill_diagonal(g, 0.0)
        m = np.zeros((n, n))
        if mobility:
            upper = np.triu(
                np.where(rng.random((n, n)) < mobility_density, rng.uniform(0.1, 2.0, (n, n)), 0.0), 1
            )
            m = upper + upper.T
        le = rng.uniform(0.1, 2.0) if lambda_e is None else lambda_e
        spec = NetworkSpec(n, le, src, g, m)
        if reachable_from_source(spec).all():
            return spec


@pytest.fixture
def numpy_backend(monkeypatch):
    """Route every kernel dispatcher to the pure-numpy fallback."""
    monkeypatch.setattr(lk, "USE_NUMBA", False)
    monkeypatch.setattr(sk, "USE_NUMBA", False)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
