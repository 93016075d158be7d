import json
import logging

import pytest
from pydantic import ValidationError
from rich.logging import RichHandler

from rlcpart.config import Config, get_config, reset_config
from rlcpart.core.bitvec import DEFAULT_DELTA
from rlcpart.core.extpq import DEFAULT_BUFFER_BYTES
from rlcpart.utils.log import setup_logging


def test_defaults(tmp_path):
    config = Config()
    assert config.epsilon == 0.03
    assert config.gamma == 1.5
    assert config.kappa == 1.0
    assert config.delta == DEFAULT_DELTA
    assert config.extpq_buffer_bytes == DEFAULT_BUFFER_BYTES
    assert config.spill_dir is None
    assert config.config_file == tmp_path / "rlcpart-config.json"
    assert config.source_of("kappa") == "default"


def test_environment_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("RLCPART_KAPPA", "20")
    monkeypatch.setenv("RLCPART_SPILL_DIR", str(tmp_path))
    config = Config()
    assert config.kappa == 20.0
    assert config.spill_dir == tmp_path
    assert config.source_of("kappa") == "environment"


def test_invalid_environment_value(monkeypatch):
    monkeypatch.setenv("RLCPART_KAPPA", "0.5")
    with pytest.raises(ValidationError):
        Config()


def test_file_values_and_precedence(monkeypatch, tmp_path):
    path = tmp_path / "rlcpart-config.json"
    path.write_text(json.dumps({"kappa": 5, "delta": 64, "unknown": 1}))
    config = Config()
    assert config.kappa == 5.0
    assert config.delta == 64
    assert config.source_of("delta") == "config"

    monkeypatch.setenv("RLCPART_DELTA", "128")
    assert Config().delta == 128


def test_save_creates_parent_directories(tmp_path):
    path = tmp_path / "nested" / "dir" / "config.json"
    config = Config(config_file=path)
    config.kappa = 8.0
    config.save_to_file()
    saved = json.loads(path.read_text())
    assert saved["kappa"] == 8.0
    assert "config_file" not in saved
    assert Config(config_file=path).kappa == 8.0


def test_loading_never_creates_directories(tmp_path):
    path = tmp_path / "absent" / "config.json"
    Config(config_file=path)
    assert not path.parent.exists()


def test_broken_file_warns_and_keeps_defaults(capsys, tmp_path):
    (tmp_path / "rlcpart-config.json").write_text("{not json")
    config = Config()
    assert config.kappa == 1.0
    assert "Could not load config file" in capsys.readouterr().err


def test_assignment_is_validated():
    config = Config()
    with pytest.raises(ValidationError):
        config.correction_bits = 40


def test_backend_config_carries_settings(tmp_path):
    config = Config(delta=32, correction_bits=6, spill_dir=tmp_path)
    backend = config.backend_config(beta=5)
    assert backend.beta == 5
    assert backend.delta == 32
    assert backend.correction_bits == 6
    assert backend.extpq.spill_dir == tmp_path
    assert backend.extpq.internal_buffer_bytes == config.extpq_buffer_bytes


def test_global_config_is_cached():
    first = get_config()
    assert get_config() is first
    reset_config()
    assert get_config() is not first


def test_setup_logging():
    logger = setup_logging("info")
    assert logger.level == logging.INFO
    setup_logging("debug")
    assert sum(isinstance(h, RichHandler) for h in logger.handlers) == 1
    assert logger.level == logging.DEBUG
    with pytest.raises(ValueError):
        setup_logging("loud")
