import time

import numpy as np
import pytest

from nonsmooth_adm.sim import compute_metrics, naive_variant, presets, run_scenario


@pytest.fixture(scope="session")
def fig3_run():
    """(scenario, trace, metrics, wall_seconds) for the bundled one-joint impact."""
    sc = presets()["fig3_one_dof"]
    t0 = time.perf_counter()
    trace = run_scenario(sc)
    elapsed = time.perf_counter() - t0
    return sc, trace, compute_metrics(trace, sc), elapsed


@pytest.fixture(scope="session")
def fig3_naive_run():
    sc = naive_variant(presets()["fig3_one_dof"])
    trace = run_scenario(sc)
    return sc, trace, compute_metrics(trace, sc)


@pytest.fixture(scope="session")
def fig5_run():
    sc = presets()["fig5_two_dof"]
    trace = run_scenario(sc)
    return sc, trace, compute_metrics(trace, sc)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
