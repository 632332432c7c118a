import pytest

from influence_market import Uniform, make_environment

# Two workhorse instances reused across the suite: same faces, different
# prior, so one is balanced and the other unbalanced.
MU_LOW = 0.25
MU_HIGH = 2.0 / 3.0


@pytest.fixture
def env_balanced():
    return make_environment(MU_LOW, 0.5, MU_HIGH)


@pytest.fixture
def env_unbalanced():
    return make_environment(MU_LOW, 0.3, MU_HIGH)


@pytest.fixture
def dist():
    return Uniform(0.0, 1.5)
