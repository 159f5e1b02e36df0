import pytest

from ujssp import fixtures, instances


@pytest.fixture
def unit_trio():
    return fixtures.unit_reward_trio()


@pytest.fixture
def equal_er_quartet():
    return fixtures.equal_expected_reward_quartet()


@pytest.fixture
def walkthrough():
    return fixtures.stepwise_quartet()


def rand_instance(seed, n, scheme=instances.Scheme.I):
    return instances.generate_uniform(n, scheme, seed)
