"""
Configuration management for rlcpart
"""

import json
import os
from pathlib import Path
from typing import Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr
from rich.console import Console
from rich.table import Table

from rlcpart.core.bitvec import DEFAULT_CORRECTION_BITS, DEFAULT_DELTA, DEFAULT_MAX_SEGMENT_POINTS
from rlcpart.core.extpq import DEFAULT_BLOCK_BYTES, DEFAULT_BUFFER_BYTES, ExtPqConfig
from rlcpart.core.partitioner import BackendConfig

console = Console(stderr=True)

CONFIG_ENV = "RLCPART_CONFIG"

# Map of environment variables to config keys
ENV_MAPPING = {
    "RLCPART_EPSILON": "epsilon",
    "RLCPART_GAMMA": "gamma",
    "RLCPART_KAPPA": "kappa",
    "RLCPART_DELTA": "delta",
    "RLCPART_CORRECTION_BITS": "correction_bits",
    "RLCPART_EXTPQ_BUFFER_BYTES": "extpq_buffer_bytes",
    "RLCPART_EXTPQ_BLOCK_BYTES": "extpq_block_bytes",
    "RLCPART_SPILL_DIR": "spill_dir",
    "RLCPART_LOG_LEVEL": "log_level",
}


def default_config_file() -> Path:
    override = os.getenv(CONFIG_ENV)
    if override:
        return Path(override)
    return Path.home() / ".rlcpart" / "config.json"


class Config(BaseModel):
    """Default partitioning and backend settings"""

    model_config = ConfigDict(validate_assignment=True)

    epsilon: float = Field(0.03, ge=0.0)
    gamma: float = Field(1.5, ge=1.0)
    kappa: float = Field(1.0, ge=1.0)
    delta: int = Field(DEFAULT_DELTA, ge=1)
    correction_bits: int = Field(DEFAULT_CORRECTION_BITS, ge=1, le=32)
    max_segment_points: int = Field(DEFAULT_MAX_SEGMENT_POINTS, ge=1)
    extpq_buffer_bytes: int = Field(DEFAULT_BUFFER_BYTES, ge=1)
    extpq_block_bytes: int = Field(DEFAULT_BLOCK_BYTES, ge=1)
    spill_dir: Optional[Path] = None
    log_level: str = "warning"

    config_file: Path = Field(default_factory=default_config_file, exclude=True)

    _sources: Dict[str, str] = PrivateAttr(default_factory=dict)

    def __init__(self, **kwargs):
        load_dotenv()
        super().__init__(**kwargs)
        self.load_from_file()
        self.load_from_env()

    def load_from_file(self) -> None:
        """Load configuration from JSON file"""
        if not self.config_file.exists():
            return
        try:
            with open(self.config_file, "r") as f:
                data = json.load(f)
            for key, value in data.items():
                if key in ENV_MAPPING.values() or key == "max_segment_points":
                    setattr(self, key, value)
                    self._sources[key] = "config"
        except (json.JSONDecodeError, IOError, ValueError) as e:
            console.print(f"[yellow]Warning: Could not load config file: {e}[/yellow]")

    def load_from_env(self) -> None:
        """Load configuration from environment variables"""
        for env_var, config_key in ENV_MAPPING.items():
            value = os.getenv(env_var)
            if value is not None and value != "":
                setattr(self, config_key, value)
                self._sources[config_key] = "environment"

    def save_to_file(self) -> None:
        """Save current configuration to JSON file"""
        self.config_file.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_file, "w") as f:
            json.dump(self.model_dump(mode="json"), f, indent=2)

    def source_of(self, key: str) -> str:
        return self._sources.get(key, "default")

    def extpq_config(self) -> ExtPqConfig:
        return ExtPqConfig(
            internal_buffer_bytes=self.extpq_buffer_bytes,
            block_bytes=self.extpq_block_bytes,
            spill_dir=self.spill_dir,
        )

    def backend_config(self, beta: Optional[int] = None) -> BackendConfig:
        return BackendConfig(
            beta=beta,
            delta=self.delta,
            correction_bits=self.correction_bits,
            max_segment_points=self.max_segment_points,
            extpq=self.extpq_config(),
        )

    def show(self) -> None:
        """Display current configuration"""
        table = Table(title="rlcpart configuration")
        table.add_column("Setting", style="cyan")
        table.add_column("Value", style="green")
        table.add_column("Source", style="dim")

        for key, value in self.model_dump().items():
            shown = "[dim]system temp[/dim]" if key == "spill_dir" and value is None else str(value)
            table.add_row(key, shown, self.source_of(key))
        table.add_row("config file", str(self.config_file), "system")

        Console().print(table)


# Global config instance
_config = None


def get_config() -> Config:
    """Get the global configuration instance"""
    global _config
    if _config is None:
        _config = Config()
    return _config


def reset_config() -> None:
    global _config
    _config = None
