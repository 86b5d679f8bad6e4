from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a JSON config into the test tmp dir and return its path."""

    def _write(cfg: dict, name: str = "config.json") -> str:
        p = tmp_path / name
        p.write_text(json.dumps(cfg))
        return str(p)

    return _write
