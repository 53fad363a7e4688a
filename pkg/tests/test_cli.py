"""
Test script for the graph_distil command line
"""

import json

import pytest
from typer.testing import CliRunner

from graph_distil import __version__
from graph_distil.circuit_synth import Circuit
from graph_distil.cli import app
from graph_distil.fixtures import get_graph

runner = CliRunner()


def data_lines(text: str):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def test_version():
    """Test the version command"""
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert f"graph_distil v{__version__}" in result.output


def test_stats_on_fixture():
    """Test Werner statistics of the five-qubit code"""
    result = runner.invoke(app, ["stats", "--fixture", "fivequbit", "-F", "0.9", "--syndromes", "trivial"])
    assert result.exit_code == 0, result.output
    assert "distance=3" in result.output
    assert "leading_order=10/9" in result.output
    assert "# graph_distil" in result.output
    rows = data_lines(result.output)
    assert rows[1].startswith("F_in,syndrome,p_succ,F_out")


def test_stats_from_graph_file(tmp_path):
    """Test graphs load from a JSON envelope and write CSV files"""
    graph_path = tmp_path / "graph.json"
    graph_path.write_text(json.dumps(get_graph("four-two").to_json()), encoding="utf-8")
    out = tmp_path / "out" / "stats.csv"
    table = tmp_path / "out" / "table.csv"
    result = runner.invoke(app, ["stats", str(graph_path), "-F", "0.8,0.9", "-o", str(out), "--table", str(table)])
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == f"# graph_distil {__version__}"
    assert lines[2].startswith("# input_sha256: ")
    # two fidelities times four syndromes
    assert len(data_lines("\n".join(lines))) == 1 + 2 * 4
    assert table.exists()


def test_synth_and_simulate(tmp_path):
    """Test a synthesized circuit can be simulated from its JSON file"""
    circuit_path = tmp_path / "circuit.json"
    result = runner.invoke(app, ["synth", "--fixture", "fivequbit-labeled", "--budget", "0", "-o", str(circuit_path)])
    assert result.exit_code == 0, result.output
    assert '"two_qubit_count"' in result.output
    circuit = Circuit.load(circuit_path)
    assert circuit.keep == 1

    result = runner.invoke(app, ["simulate", str(circuit_path), "-F", "0.9", "--p-g", "0.01"])
    assert result.exit_code == 0, result.output
    rows = data_lines(result.output)
    assert rows[0].startswith("syndrome,p_succ,F_out")
    assert len(rows) == 1 + 16


def test_simulate_fixture():
    """Test simulating a circuit fixture by id"""
    result = runner.invoke(app, ["simulate", "--fixture", "noisy-n4", "-F", "0.9", "--measurement-mode", "per_party"])
    assert result.exit_code == 0, result.output
    assert len(data_lines(result.output)) == 1 + 8


def test_enumerate_both_strategies(tmp_path):
    """Test both strategies report identical key sets"""
    result = runner.invoke(
        app, ["enumerate", "-n", "2", "-k", "1", "--strategy", "both", "--disconnected", "-o", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    assert "key sets identical: yes" in result.output
    assert (tmp_path / "transversal_graphs_2_1.csv").exists()
    assert (tmp_path / "transversal_normal_2_1.csv").exists()


def test_enumerate_both_includes_disconnected_by_default():
    """Test comparing strategies without flags counts disconnected graph codes too"""
    result = runner.invoke(app, ["enumerate", "-n", "3", "-k", "1", "--strategy", "both"])
    assert result.exit_code == 0, result.output
    assert "key sets identical: yes" in result.output


def test_envelope_json(tmp_path):
    """Test the envelope command writes policy and rows"""
    out = tmp_path / "envelope.json"
    result = runner.invoke(app, ["envelope", "-n", "2", "-k", "1", "-F", "0.7", "-o", str(out)])
    assert result.exit_code == 0, result.output
    with open(out, 'r', encoding='utf-8') as f:
        data = json.load(f)
    assert data["policy"] == "TrivialOnly"
    assert max(row["f_out"] for row in data["rows"]) == pytest.approx(0.5 / 0.68)


def test_apps():
    """Test the key-rate and teleportation tasks"""
    result = runner.invoke(app, ["apps", "qkd", "--fixture", "fivequbit", "-F", "0.9"])
    assert result.exit_code == 0, result.output
    assert "Werner BB84 threshold: 0.83" in result.output
    result = runner.invoke(app, ["apps", "teleport", "-F", "0.9"])
    assert result.exit_code == 0, result.output
    assert len(data_lines(result.output)) == 1 + 3


def test_ga_with_small_config(tmp_path):
    """Test a short genetic run writes its manifest"""
    config = tmp_path / "ga.yaml"
    config.write_text(
        "ga:\n  population: 8\n  parent_pairs: 2\n  children_per_pair: 2\n  max_generations: 2\n",
        encoding="utf-8",
    )
    manifest = tmp_path / "manifest.json"
    result = runner.invoke(app, ["ga", "-n", "2", "-F", "0.8", "-c", str(config), "-o", str(manifest), "--seed", "4"])
    assert result.exit_code == 0, result.output
    assert "best fitness" in result.output
    with open(manifest, 'r', encoding='utf-8') as f:
        assert json.load(f)["seed"] == 4


def test_orbits_and_init_config(tmp_path):
    """Test the orbit database and default configuration commands"""
    result = runner.invoke(app, ["orbits", "-N", "4", "--cache-dir", str(tmp_path / "db")])
    assert result.exit_code == 0, result.output
    assert "N=4: 2 classes" in result.output
    path = tmp_path / "config.yaml"
    result = runner.invoke(app, ["init-config", str(path)])
    assert result.exit_code == 0
    assert path.exists()


def test_size_limit_exit_code():
    """Test internal limits exit with code 1"""
    result = runner.invoke(app, ["enumerate", "-n", "7", "-k", "6"])
    assert result.exit_code == 1
    assert "Error:" in result.output


@pytest.mark.parametrize(
    "args",
    [
        ["stats", "--fixture", "missing"],
        ["enumerate", "-n", "2", "-k", "1", "--strategy", "sideways"],
        ["simulate", "--fixture", "four-two", "-F", "0.9", "--measurement-mode", "both"],
        ["apps", "qkd", "-F", "0.9"],
        ["stats", "--fixture", "fivequbit", "-F", "1.5"],
    ],
)
def test_user_error_exit_code(args):
    """Test user errors exit with code 2"""
    result = runner.invoke(app, args)
    assert result.exit_code == 2
    assert "Error:" in result.output


def test_invalid_config_exit_code(tmp_path):
    """Test an invalid config file is a user error"""
    path = tmp_path / "bad.yaml"
    path.write_text("ga:\n  population: -1\n", encoding="utf-8")
    result = runner.invoke(app, ["stats", "--fixture", "fivequbit", "-c", str(path)])
    assert result.exit_code == 2
