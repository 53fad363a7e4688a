"""
Test script for graph_distil configuration loading
"""

from pathlib import Path

import pytest
import yaml

from graph_distil.config import DistilConfig, GAConfig, create_default_config, load_config
from graph_distil.exceptions import ConfigError


def test_defaults_without_file(tmp_path):
    """Test a missing or unset config file gives the defaults"""
    config = load_config(None)
    assert config.ga.population == 300
    assert config.ga.convergence_generations == 15
    assert config.enumeration.symmetry_breaking is None
    assert config.simulation.measurement_mode == "parity"
    assert load_config(str(tmp_path / "absent.yaml")).synthesis.budget == 200


def test_partial_file_overrides(tmp_path):
    """Test values from YAML override the defaults section by section"""
    path = tmp_path / "config.yaml"
    path.write_text("ga:\n  population: 12\n  seed: 5\nworkers: 3\n", encoding="utf-8")
    config = load_config(str(path))
    assert config.ga.population == 12
    assert config.ga.seed == 5
    assert config.ga.parent_pairs == 20
    assert config.workers == 3


@pytest.mark.parametrize(
    "text",
    [
        "ga: [1, 2\n",
        "- just\n- a list\n",
        "ga:\n  population: 0\n",
        "simulation:\n  measurement_mode: both\n",
    ],
)
def test_invalid_files(tmp_path, text):
    """Test malformed YAML and failed validation raise ConfigError"""
    path = tmp_path / "bad.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_default_config_round_trip(tmp_path):
    """Test create_default_config writes a file load_config reads back"""
    path = tmp_path / "default.yaml"
    create_default_config(path)
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)
    assert data["ga"]["population"] == 300
    assert load_config(str(path)) == DistilConfig(**data)


def test_cache_dir_from_environment(monkeypatch, tmp_path):
    """Test DISTIL_CACHE_DIR sets the default cache directory"""
    monkeypatch.setenv("DISTIL_CACHE_DIR", str(tmp_path / "orbits"))
    assert Path(DistilConfig().cache_dir) == tmp_path / "orbits"


def test_example_config_is_loadable():
    """Test the shipped example configuration validates"""
    example = Path(__file__).resolve().parent.parent / "config.example.yaml"
    config = load_config(str(example))
    assert config.ga == GAConfig()
