import os

import pytest

from bicutan import harness, net

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
REFERENCE_CONFIG_PATH = os.path.join(REPO_ROOT, "configs", "reference.json")
OBSERVATIONS_SAMPLE = os.path.join(REPO_ROOT, "data", "observations_sample.csv")
OBSERVED_REFERENCE = os.path.join(REPO_ROOT, "data", "observed_reference.csv")


@pytest.fixture(scope="session")
def network():
    return net.build_bicutan_network()


@pytest.fixture(scope="session")
def reference_config():
    return harness.ScenarioConfig.from_file(REFERENCE_CONFIG_PATH)


@pytest.fixture()
def tiny_config(reference_config):
    """A fast scenario for functional tests: light demand, short horizon."""
    demand = dict(reference_config.demand)
    demand["rates"] = {"A": 0.05, "B": 0.04, "C": 0.04}
    return reference_config.replaced(
        demand=demand, duration_s=240.0, warmup_s=60.0, replications=2
    )
