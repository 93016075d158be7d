"""
Shared fixtures for the rlcpart test suite
"""

import pytest

from rlcpart.config import ENV_MAPPING, reset_config

from .helpers import cycle_edges, path_edges, two_cliques, write_metis_file


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Point the config file into tmp_path and clear RLCPART_* overrides"""
    monkeypatch.setenv("RLCPART_CONFIG", str(tmp_path / "rlcpart-config.json"))
    for var in ENV_MAPPING:
        monkeypatch.delenv(var, raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture
def metis_file(tmp_path):
    """Factory writing a METIS file from an edge list"""

    def _write(name, n, edges):
        return write_metis_file(tmp_path / name, n, edges)

    return _write


@pytest.fixture
def path3(metis_file):
    return metis_file("path3.metis", 3, path_edges(3))


@pytest.fixture
def cycle10(metis_file):
    return metis_file("cycle10.metis", 10, cycle_edges(10))


@pytest.fixture
def cliques(metis_file):
    return metis_file("cliques.metis", 10, two_cliques())
