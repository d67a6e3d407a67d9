import json
import math

import numpy as np
import pytest

from opmax_plots import (
    SchemaError,
    UnsupportedError,
    plot_belief_simplex,
    plot_centrality_box,
    plot_total_opinion,
)

SQRT3_2 = math.sqrt(3.0) / 2.0


def _sidecar(tmp_path, final_alpha, snapshots=None):
    path = tmp_path / "trace_dead_rep0000.json"
    path.write_text(json.dumps({
        "final_alpha": final_alpha,
        "snapshots": snapshots or {},
    }))
    return path


def test_total_opinion_with_band(run_dir, tmp_path):
    out = tmp_path / "totals.png"
    result = plot_total_opinion(str(run_dir), str(out))
    assert out.exists() and out.stat().st_size > 0
    assert result.info["band_drawn"] is True
    assert result.info["n_replications"] == 3


def test_total_opinion_single_replication_no_band(single_rep_dir, tmp_path):
    out = tmp_path / "totals.png"
    result = plot_total_opinion(str(single_rep_dir), str(out))
    assert out.exists()
    assert result.info["band_drawn"] is False


def test_total_opinion_smart_class_topmost(run_dir):
    # The fixture run uses the look-ahead strategy for class 0: its mean
    # final total opinion should lead the other classes.
    result = plot_total_opinion(str(run_dir), str(run_dir / "fig.png"),
                                highlight_class=0)
    final = result.info["final_mean"]
    assert final[0] == max(final)


def test_total_opinion_rerun_identical_bytes(run_dir, tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    plot_total_opinion(str(run_dir), str(a))
    plot_total_opinion(str(run_dir), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_centrality_box_two_series(sweep_csvs, tmp_path):
    out = tmp_path / "box.png"
    result = plot_centrality_box([str(p) for p in sweep_csvs], str(out))
    assert out.exists() and out.stat().st_size > 0
    assert result.info["algorithms"] == ["random", "damo"]
    assert set(result.info["pcc"]) == {"random", "damo"}
    for pcc in result.info["pcc"].values():
        assert -1.0 <= pcc <= 1.0


def test_centrality_box_single_placement(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text(
        "placement,algorithm,mean_final_total,current_flow_closeness\n"
        "4,random,12.5,0.8\n"
    )
    out = tmp_path / "box.png"
    result = plot_centrality_box([str(path)], str(out))
    assert out.exists()
    assert result.info["n_bins"] == 1
    assert math.isnan(result.info["pcc"]["random"])


def test_centrality_box_unknown_column(sweep_csvs, tmp_path):
    with pytest.raises(SchemaError, match="no centrality column"):
        plot_centrality_box([str(sweep_csvs[0])], str(tmp_path / "o.png"),
                            centrality="eigenvector")


def test_simplex_uniform_opinions_central_mass(tmp_path):
    path = _sidecar(tmp_path, [[1.0, 1.0, 1.0]] * 40)
    result = plot_belief_simplex(str(path), str(tmp_path / "s.png"))
    (cx, cy), = result.info["centroids"]
    assert abs(cx - 0.5) < 1e-12
    assert abs(cy - SQRT3_2 / 3.0) < 1e-12


def test_simplex_saturated_node_at_corner(tmp_path):
    path = _sidecar(tmp_path, [[1e6, 1e-6, 1e-6]])
    result = plot_belief_simplex(str(path), str(tmp_path / "s.png"))
    (cx, cy), = result.info["centroids"]
    assert abs(cx) < 1e-5 and abs(cy) < 1e-5


def test_simplex_wrong_class_count(tmp_path):
    path = _sidecar(tmp_path, [[1.0, 1.0]] * 5)
    with pytest.raises(UnsupportedError, match="3 classes"):
        plot_belief_simplex(str(path), str(tmp_path / "s.png"))


def test_simplex_from_run_snapshots(run_dir, tmp_path):
    sidecar = sorted(run_dir.glob("trace_*.json"))[0]
    out = tmp_path / "simplex.png"
    result = plot_belief_simplex(str(sidecar), str(out), times=[5, 10])
    assert out.exists() and out.stat().st_size > 0
    assert result.info["panels"] == ["t=5", "t=10", "final"]
    assert result.info["n_nodes"] == 80


def test_simplex_missing_snapshot_time(run_dir, tmp_path):
    sidecar = sorted(run_dir.glob("trace_*.json"))[0]
    with pytest.raises(SchemaError, match="no snapshot at t=7"):
        plot_belief_simplex(str(sidecar), str(tmp_path / "s.png"), times=[7])
