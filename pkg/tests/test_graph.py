import io

import numpy as np
import pytest

from opmax.graph import (
    CorrelationError,
    EdgeListParseError,
    Graph,
    GraphError,
    RoleAssignment,
    classic_centrality,
    current_flow_closeness,
    generate_pa,
    load_edge_list,
    pearson,
    write_edge_list,
)


def path3():
    return Graph(3, [(0, 1), (1, 2)])


def star(n_leaves):
    return Graph(n_leaves + 1, [(0, i) for i in range(1, n_leaves + 1)])


# -- Graph basics --------------------------------------------------------------


def test_graph_rejects_self_loop():
    with pytest.raises(GraphError):
        Graph(2, [(0, 0)])


def test_graph_rejects_out_of_range_edge():
    with pytest.raises(GraphError):
        Graph(2, [(0, 5)])


def test_adjacency_sorted_and_deduplicated():
    g = Graph(3, [(2, 0), (0, 1), (1, 0)])
    assert list(g.neighbors(0)) == [1, 2]
    assert g.edge_count == 2


def test_csr_and_reverse_edges_are_mutual():
    g = generate_pa(50, 2, seed=3)
    indptr, indices = g.csr()
    rev = g.reverse_edges()
    src = np.repeat(np.arange(g.n), np.diff(indptr))
    # reverse of slot (u -> v) must be the slot (v -> u)
    assert np.array_equal(src[rev], indices)
    assert np.array_equal(indices[rev], src)


def test_connectivity():
    assert path3().is_connected()
    assert not Graph(3, [(0, 1)]).is_connected()
    assert Graph(1, []).is_connected()


# -- preferential attachment ----------------------------------------------------


def test_pa_edge_count_formula():
    # m(m-1)/2 seed-clique edges plus m per attached node
    g = generate_pa(1000, 3, seed=0)
    assert g.edge_count == 3 + 3 * 997
    g = generate_pa(10, 1, seed=0)
    assert g.edge_count == 9


def test_pa_connected_and_deterministic():
    g1 = generate_pa(300, 2, seed=11)
    g2 = generate_pa(300, 2, seed=11)
    assert g1.is_connected()
    assert list(g1.edges()) == list(g2.edges())
    g3 = generate_pa(300, 2, seed=12)
    assert list(g1.edges()) != list(g3.edges())


def test_pa_degree_skew():
    # early nodes accumulate far more than the minimum degree
    g = generate_pa(2000, 2, seed=5)
    degs = g.degrees
    assert degs.min() >= 2
    assert degs.max() > 10 * degs.min()


def test_pa_rejects_bad_parameters():
    with pytest.raises(GraphError):
        generate_pa(3, 5, seed=0)
    with pytest.raises(GraphError):
        generate_pa(10, 0, seed=0)


# -- edge-list IO -----------------------------------------------------------------


def test_load_edge_list_compacts_and_counts():
    text = "# comment\n10 20\n20 30\n10 10\n20 10\n30 10\n"
    res = load_edge_list(io.StringIO(text))
    # ids compacted by first appearance: 10->0, 20->1, 30->2
    assert res.graph.n == 3
    assert sorted(res.graph.edges()) == [(0, 1), (0, 2), (1, 2)]
    assert res.self_loops_dropped == 1
    assert res.duplicate_edges_dropped == 1


def test_load_edge_list_parse_error_carries_line_number():
    with pytest.raises(EdgeListParseError) as exc:
        load_edge_list(io.StringIO("0 1\n0 x\n"))
    assert exc.value.line_number == 2


def test_edge_list_roundtrip():
    # ids are relabeled by first appearance, so compare invariants
    g = generate_pa(40, 2, seed=9)
    buf = io.StringIO()
    write_edge_list(g, buf)
    buf.seek(0)
    res = load_edge_list(buf)
    g2 = res.graph
    assert (g2.n, g2.edge_count) == (g.n, g.edge_count)
    assert sorted(g2.degrees) == sorted(g.degrees)
    assert res.self_loops_dropped == 0 and res.duplicate_edges_dropped == 0


# -- current-flow closeness --------------------------------------------------------


def test_cfc_path3_exact():
    # center: resistances 1 and 1 -> 2/2; endpoint: 1 and 2 -> 2/3
    cfc = current_flow_closeness(path3())
    assert cfc[1] == pytest.approx(1.0, abs=1e-12)
    assert cfc[0] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert cfc[2] == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_cfc_star_exact():
    # hub: three unit resistances -> 1; leaf: 1 + 2 + 2 -> 3/5
    cfc = current_flow_closeness(star(3))
    assert cfc[0] == pytest.approx(1.0, abs=1e-12)
    for leaf in (1, 2, 3):
        assert cfc[leaf] == pytest.approx(3.0 / 5.0, abs=1e-12)


def test_cfc_dense_and_cg_agree():
    g = generate_pa(120, 2, seed=21)
    dense = current_flow_closeness(g, dense_threshold=10**6)
    sparse = current_flow_closeness(g, dense_threshold=1)
    assert np.allclose(dense, sparse, rtol=1e-7, atol=1e-10)


def test_cfc_disconnected_rejected():
    with pytest.raises(GraphError):
        current_flow_closeness(Graph(3, [(0, 1)]))


# -- classic centralities -----------------------------------------------------------


def test_degree_centrality():
    c = classic_centrality(star(3), "degree")
    assert c[0] == pytest.approx(1.0)
    assert c[1] == pytest.approx(1.0 / 3.0)


def test_closeness_centrality_path3():
    c = classic_centrality(path3(), "closeness")
    assert c[1] == pytest.approx(1.0)
    assert c[0] == pytest.approx(2.0 / 3.0)


def test_betweenness_path_and_star():
    # path 0-1-2: only the middle node lies on a shortest path
    b = classic_centrality(path3(), "betweenness")
    assert b[1] == pytest.approx(1.0)
    assert b[0] == b[2] == pytest.approx(0.0)
    # star hub mediates all 3 leaf pairs out of (4-1)(4-2)/2 = 3
    b = classic_centrality(star(3), "betweenness")
    assert b[0] == pytest.approx(1.0)
    assert b[1] == pytest.approx(0.0)


def test_betweenness_cycle_uniform():
    g = Graph(5, [(i, (i + 1) % 5) for i in range(5)])
    b = classic_centrality(g, "betweenness")
    assert np.allclose(b, b[0])


def test_unknown_centrality_kind():
    with pytest.raises(GraphError):
        classic_centrality(path3(), "eigenvector")


# -- pearson ---------------------------------------------------------------------


def test_pearson_exact_linear():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    assert pearson(x, 2 * x + 1) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)


def test_pearson_rejects_constant_and_short():
    with pytest.raises(CorrelationError):
        pearson(np.ones(4), np.arange(4.0))
    with pytest.raises(CorrelationError):
        pearson(np.array([1.0]), np.array([2.0]))


# -- roles -----------------------------------------------------------------------


def test_role_assignment_validation():
    with pytest.raises(GraphError):
        RoleAssignment(1, (1, 2))
    with pytest.raises(GraphError):
        RoleAssignment(0, (1, 1))
    roles = RoleAssignment(3, (0, 1))
    roles.validate(4)
    with pytest.raises(GraphError):
        roles.validate(3)
    assert roles.sources == (0, 1, 3)
