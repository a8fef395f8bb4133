"""
Pytest configuration and fixtures for e2e tests.
"""

from pathlib import Path

import pytest

from geomobility.cli import run_command

WORLD_SEED = 42


@pytest.fixture(scope="session")
def world(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """
    Directory holding a generated world (events.csv, areas.csv, truth.json).

    This fixture has session scope so every test reads the same files.
    """
    out = tmp_path_factory.mktemp("world")
    code = run_command(
        [
            "synth",
            "--out",
            str(out),
            "--seed",
            str(WORLD_SEED),
            "--n-areas",
            "20",
            "--n-users",
            "2000",
        ]
    )
    assert code == 0
    return out


@pytest.fixture(scope="session")
def tight_world(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """A generated world whose events all lie within 1 km of an area centroid."""
    out = tmp_path_factory.mktemp("tight_world")
    code = run_command(
        [
            "synth",
            "--out",
            str(out),
            "--seed",
            str(WORLD_SEED),
            "--n-areas",
            "20",
            "--n-users",
            "2000",
            "--spread-km",
            "1",
        ]
    )
    assert code == 0
    return out
