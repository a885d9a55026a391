"""
Fixtures compartilhadas dos testes.
"""
from pathlib import Path

import numpy as np
import pytest

from app.models.tsp import Instance
from app.schemas.config import NetConfig
from app.services.instance_service import generate_instances
from app.nn.params import init_params

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240101)


@pytest.fixture
def square() -> Instance:
    """Quadrado unitário: tour ótimo 0-1-2-3 com custo 4."""
    return Instance.from_coords([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], name="square")


@pytest.fixture
def instance10() -> Instance:
    return generate_instances(10, 1, seed=7)[0]


@pytest.fixture
def instances8():
    return generate_instances(8, 6, seed=11)


@pytest.fixture
def tiny_net() -> NetConfig:
    return NetConfig(d=8, n_layers=1, clip=10.0)


@pytest.fixture
def tiny_params(tiny_net):
    return init_params(tiny_net, seed=3)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
