import json
import subprocess
import sys

import pytest

CONFIG = {
    "graph": {"kind": "pa", "n": 80, "m": 2},
    "horizon": 15,
    "replications": 3,
    "algorithm": "admo",
    "master_seed": 11,
}


def _run_cli(*argv):
    proc = subprocess.run(["opmax", *argv], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def sim_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "config.json"
    path.write_text(json.dumps(CONFIG))
    return path


@pytest.fixture(scope="session")
def run_dir(sim_config, tmp_path_factory):
    """A 3-replication simulator run with belief snapshots at t=5 and t=10."""
    out = tmp_path_factory.mktemp("run")
    _run_cli("run", "--config", str(sim_config), "--snapshot-at", "5,10",
             "--out", str(out))
    return out


@pytest.fixture(scope="session")
def single_rep_dir(sim_config, tmp_path_factory):
    out = tmp_path_factory.mktemp("run1rep")
    _run_cli("run", "--config", str(sim_config), "--replications", "1",
             "--out", str(out))
    return out


@pytest.fixture(scope="session")
def sweep_csvs(sim_config, tmp_path_factory):
    """Two small placement sweeps (random and damo) sharing one graph/config."""
    paths = []
    for algorithm in ("random", "damo"):
        out = tmp_path_factory.mktemp(f"sweep_{algorithm}")
        _run_cli("sweep", "--config", str(sim_config),
                 "--algorithm", algorithm, "--replications", "1",
                 "--num-placements", "6", "--out", str(out))
        paths.append(out / "sweep.csv")
    return paths


@pytest.fixture
def plots_cli():
    def invoke(*argv):
        return subprocess.run(
            [sys.executable, "-m", "opmax_plots.cli", *argv],
            capture_output=True, text=True,
        )

    return invoke
