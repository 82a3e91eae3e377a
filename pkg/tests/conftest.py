import numpy as np
import pytest

from vital.fec import FecConfig
from vital.robot import BodyTwist, GaitParams, robot_preset
from vital.terrain import TerrainMap


@pytest.fixture
def model():
    return robot_preset("hyq-like")


@pytest.fixture
def config():
    return FecConfig()


@pytest.fixture
def flat():
    return TerrainMap(kind="flat")


@pytest.fixture
def stairs():
    return TerrainMap(kind="stairs", rise=0.10, going=0.25, n_steps=5, start_x=0.0)


@pytest.fixture
def zero_twist():
    return BodyTwist(np.zeros(3), np.zeros(3))


@pytest.fixture
def forward_twist():
    return BodyTwist(np.array([0.2, 0.0, 0.0]), np.zeros(3))


@pytest.fixture
def gait():
    return GaitParams(step_length=0.14, step_frequency=1.4, duty_factor=0.5, t_remaining=0.357)
