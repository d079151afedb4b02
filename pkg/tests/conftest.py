"""
Shared fixtures
"""
import numpy as np
import pytest

from app import create_app
from app.models.network_config import NetworkConfig


@pytest.fixture
def app(tmp_path):
    app = create_app('testing')
    app.config['OUTPUT_DIR'] = str(tmp_path / 'results')
    yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    """Two cores, a handful of tags; fast enough for per-frame tests"""
    return NetworkConfig(n_cores=2, n_tags=10, n_channels=4, n_training=4)


@pytest.fixture
def paper_config():
    return NetworkConfig()
