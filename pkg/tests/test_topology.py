import json

import pytest
from hypothesis import given, settings, strategies as st

from fogcache.geo import hilbert_keys
from fogcache.topology import (CellEstimate, Level, Topology, ancestor_at_level, build_topologies, build_tree,
                               estimate_cell, estimate_cells, expected_level_counts)
from fogcache.records import Technology, TraceRecord


def grid_cells(n, operator="op"):
    return [CellEstimate(f"{i:05d}", operator, [], (34.0 + 0.01 * (i // 60), -118.5 + 0.01 * (i % 60)), 0.0, 1)
            for i in range(n)]


def counts(topo):
    c = topo.level_counts
    return (c[Level.BASE_STATION], c[Level.RING], c[Level.POD], c[Level.CORE])


@pytest.mark.parametrize("n, expected", [(3882, (3882, 389, 39, 4)), (1, (1, 1, 1, 1)), (100, (100, 10, 1, 1))])
def test_level_counts(n, expected):
    assert counts(build_tree(grid_cells(n))) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 400), st.integers(1, 12), st.sampled_from(["curve", "random"]))
def test_level_counts_follow_ceil_division(n, fanout, grouping):
    topo = build_tree(grid_cells(n), fanout=fanout, grouping=grouping)
    # independent recurrence: each level holds ceil(previous / fanout) nodes
    expected, m = [n], n
    for _ in range(3):
        m = -(-m // fanout)
        expected.append(m)
    assert list(counts(topo)) == expected
    assert expected_level_counts(n, fanout) == dict(zip(Level, expected))
    for node in topo.nodes.values():
        assert len(node.children) <= fanout
        assert (node.parent is None) == (node.level is Level.CORE)


def test_curve_grouping_chunks_in_curve_order():
    cells = grid_cells(100)
    topo = build_tree(cells)
    keys = hilbert_keys([c.barycenter for c in sorted(cells, key=lambda c: c.cell_id)])
    order = sorted(range(100), key=lambda i: (keys[i], f"bs:{i:05d}"))
    bs = f"bs:{order[37]:05d}"
    assert topo.ancestor(bs, Level.RING) == "ring:3"
    assert ancestor_at_level(topo, bs, Level.BASE_STATION) == bs
    assert ancestor_at_level(topo, bs, "Core") == "core:0"


def test_unknown_node_rejected():
    topo = build_tree(grid_cells(5))
    with pytest.raises(KeyError):
        ancestor_at_level(topo, "bs:nope", Level.RING)
    with pytest.raises(ValueError):
        ancestor_at_level(topo, "ring:0", Level.POD)
    with pytest.raises(KeyError):
        topo.cell_node("nope")


def test_parent_position_is_mean_of_children():
    topo = Topology.from_nested("op", [[[["a", "b"]]]], positions={"a": (0.0, 0.0), "b": (2.0, 4.0)})
    assert topo.position("ring:0") == pytest.approx((1.0, 2.0))
    assert topo.position("core:0") == pytest.approx((1.0, 2.0))


def test_deterministic_and_json_round_trip(tmp_path):
    cells = grid_cells(250)
    a, b = build_tree(cells), build_tree(list(reversed(cells)))
    assert a.to_dict() == b.to_dict()
    a.save(tmp_path / "t.json")
    back = Topology.load(tmp_path / "t.json")
    assert back.to_dict() == a.to_dict()
    assert json.loads((tmp_path / "t.json").read_text())["schema_version"] == 1


def test_random_grouping_depends_on_seed():
    cells = grid_cells(200)
    a = build_tree(cells, grouping="random", seed=1)
    assert a.to_dict() == build_tree(cells, grouping="random", seed=1).to_dict()
    assert a.to_dict() != build_tree(cells, grouping="random", seed=2).to_dict()
    assert counts(a) == (200, 20, 2, 1)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        build_tree([])
    with pytest.raises(ValueError):
        build_tree(grid_cells(3), fanout=0)
    with pytest.raises(ValueError):
        build_tree(grid_cells(2) + grid_cells(1))  # duplicate id
    with pytest.raises(ValueError):
        build_tree(grid_cells(2) + grid_cells(2, "other"))


def test_one_tree_per_operator():
    topos = build_topologies(grid_cells(30, "A") + grid_cells(5, "B"))
    assert sorted(topos) == ["A", "B"]
    assert counts(topos["B"]) == (5, 1, 1, 1)


def test_estimate_cell_barycenter():
    est = estimate_cell("c", "op", [(0, 0), (2, 0), (0, 2), (0.5, 0.5)])
    assert est.barycenter == pytest.approx((2 / 3, 2 / 3))
    assert est.observation_count == 4
    assert estimate_cell("c", "op", [(1, 1)]).barycenter == (1.0, 1.0)


def test_estimate_cells_skips_records_without_cell():
    import datetime as dt
    day = dt.date(2015, 10, 1)
    recs = [TraceRecord(day, 0, "u", 34, -118, "V", "7", Technology.LTE, "A", 1, 0),
            TraceRecord(day, 0, "u", 34, -118, "V", None, Technology.WIFI, "A", 1, 0)]
    (est,) = estimate_cells(recs)
    assert (est.cell_id, est.operator) == ("7", "V")
