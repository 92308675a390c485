from __future__ import annotations

from pathlib import Path

import pytest

from sewarm.robot import ArmPair, load_model

CONFIG_DIR = Path(__file__).resolve().parents[1] / "src" / "sewarm" / "configs"


@pytest.fixture(scope="session")
def parallel_right():
    return load_model(CONFIG_DIR / "parallel_right.toml")


@pytest.fixture(scope="session")
def parallel_left():
    return load_model(CONFIG_DIR / "parallel_left.toml")


@pytest.fixture(scope="session")
def perpendicular_right():
    return load_model(CONFIG_DIR / "perpendicular_right.toml")


@pytest.fixture(scope="session")
def perpendicular_left():
    return load_model(CONFIG_DIR / "perpendicular_left.toml")


@pytest.fixture(scope="session")
def parallel_pair(parallel_left, parallel_right):
    return ArmPair(left=parallel_left, right=parallel_right)


@pytest.fixture(scope="session")
def perpendicular_pair(perpendicular_left, perpendicular_right):
    return ArmPair(left=perpendicular_left, right=perpendicular_right)
