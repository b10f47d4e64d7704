import warnings

import pytest
from hypothesis import given, settings, strategies as st

from conftest import WORKED_SETS, make_request
from fogcache.cache import (ARCHITECTURES, CacheWorthySet, NonCacheableMarkedWarning, PairPopularity,
                            achieved_hit_ratio, mark_cache_worthy, merge_tallies, place_caches, plan_summary,
                            tally_popularity, write_plan_summary)
from fogcache.records import ContentCategory as C
from fogcache.topology import Level, Topology


def worthy_from_sets(sets):
    pairs = tuple(PairPopularity(item, cell, 1, 1) for cell, items in sorted(sets.items()) for item in sorted(items))
    return CacheWorthySet(1.0, pairs, 1.0)


def totals(worthy, topo, sizes=None):
    return [place_caches(worthy, topo, a, sizes).total_size for a in ARCHITECTURES]


class TestTally:
    def test_counts(self):
        reqs = ([make_request("A", "c1", bytes_=10)] * 6 + [make_request("B", "c1", bytes_=3)] * 3
                + [make_request("A", "c2", bytes_=7)])
        assert tally_popularity(reqs) == [PairPopularity("A", "c1", 6, 60), PairPopularity("B", "c1", 3, 9),
                                          PairPopularity("A", "c2", 1, 7)]

    def test_cacheable_flag(self):
        reqs = [make_request("x", "c", C.REAL_TIME), make_request("y", "c", C.PLAYERS),
                make_request("y", "c", C.NEWS)]
        flags = {p.item: p.cacheable for p in tally_popularity(reqs)}
        assert flags == {"x": False, "y": True}

    def test_merge_equals_whole(self):
        reqs = [make_request(f"i{k % 4}", f"c{k % 3}", bytes_=k + 1) for k in range(40)]
        assert merge_tallies(tally_popularity(reqs[:13]), tally_popularity(reqs[13:])) == tally_popularity(reqs)


EXAMPLE = [PairPopularity("A", "c1", 6, 6), PairPopularity("B", "c1", 3, 3), PairPopularity("A", "c2", 1, 1)]


class TestMarking:
    def test_half_target(self):
        w = mark_cache_worthy(EXAMPLE, 0.5)
        assert w.keys == {("A", "c1")}
        assert w.achieved_hit_ratio == pytest.approx(0.6)
        assert not w.infeasible

    def test_extremes(self):
        assert mark_cache_worthy(EXAMPLE, 0.0).pairs == ()
        assert mark_cache_worthy(EXAMPLE, 1.0).keys == {p.key for p in EXAMPLE}
        assert mark_cache_worthy(EXAMPLE, 0.9).keys == {("A", "c1"), ("B", "c1")}

    def test_bytes_weighting(self):
        pairs = [PairPopularity("A", "c1", 6, 10), PairPopularity("B", "c1", 1, 90)]
        assert mark_cache_worthy(pairs, 0.5, "bytes").keys == {("B", "c1")}

    def test_invalid_target(self):
        with pytest.raises(ValueError):
            mark_cache_worthy(EXAMPLE, 1.5)

    def test_ties_break_by_cell_then_item(self):
        pairs = [PairPopularity("b", "c2", 1, 1), PairPopularity("a", "c2", 1, 1), PairPopularity("z", "c1", 1, 1)]
        assert [p.key for p in mark_cache_worthy(pairs, 0.6).pairs] == [("z", "c1"), ("a", "c2")]
        assert mark_cache_worthy(pairs, 0.6) == mark_cache_worthy(list(reversed(pairs)), 0.6)

    def test_noncacheable(self):
        pairs = [PairPopularity("rt", "c", 9, 9, cacheable=False), PairPopularity("n", "c", 1, 1)]
        with pytest.warns(NonCacheableMarkedWarning):
            w = mark_cache_worthy(pairs, 0.5)
        assert w.noncacheable_marked
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            w = mark_cache_worthy(pairs, 0.5, exclude_noncacheable=True)
        assert w.keys == {("n", "c")} and w.infeasible and w.achieved_hit_ratio == pytest.approx(0.1)

    @settings(max_examples=80)
    @given(st.lists(st.integers(1, 50), min_size=1, max_size=30), st.floats(0.01, 1.0))
    def test_minimal_and_attains(self, weights, target):
        pairs = [PairPopularity(f"i{k}", f"c{k % 4}", w, w) for k, w in enumerate(weights)]
        w = mark_cache_worthy(pairs, target)
        total = sum(weights)
        got = sum(p.request_count for p in w.pairs)
        assert got / total >= target
        assert (got - min(p.request_count for p in w.pairs)) / total < target
        # no smaller set reaches the target: the k heaviest pairs are the best k-set
        best_smaller = sum(sorted(weights, reverse=True)[:len(w.pairs) - 1])
        assert best_smaller / total < target

    @given(st.lists(st.integers(1, 50), min_size=1, max_size=30), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_target(self, weights, a, b):
        pairs = [PairPopularity(f"i{k}", "c", w, w) for k, w in enumerate(weights)]
        lo, hi = sorted((a, b))
        assert mark_cache_worthy(pairs, lo).keys <= mark_cache_worthy(pairs, hi).keys


class TestPlacement:
    def test_hand_instance(self, four_bs_topology):
        w = worthy_from_sets({"c1": {"a", "b"}, "c2": {"a"}, "c3": {"c"}, "c4": {"b"}})
        assert totals(w, four_bs_topology) == [5, 4, 3, 3]

    def test_worked_example(self, worked_topology):
        assert totals(worthy_from_sets(WORKED_SETS), worked_topology) == [6, 6, 5, 3]

    def test_byte_sizes(self, four_bs_topology):
        w = worthy_from_sets({"c1": {"a", "b"}, "c2": {"a"}, "c3": {"c"}, "c4": {"b"}})
        assert totals(w, four_bs_topology, {"a": 10, "b": 100, "c": 1}) == [221, 211, 111, 111]

    def test_identical_sets_dedupe_at_core(self, worked_topology):
        w = worthy_from_sets({c: {"x", "y"} for c in ["c1", "c2", "c3", "c4", "c5"]})
        assert totals(w, worked_topology) == [10, 8, 4, 2]

    def test_unknown_cell(self, four_bs_topology):
        with pytest.raises(KeyError):
            place_caches(worthy_from_sets({"c9": {"a"}}), four_bs_topology, Level.RING)

    def test_summary(self, worked_topology, tmp_path):
        plan = place_caches(worthy_from_sets(WORKED_SETS), worked_topology, "Ring")
        s = plan_summary(plan)
        assert (s["total_size"], s["node_count"], s["min_node_size"], s["max_node_size"]) == (6, 4, 1, 2)
        write_plan_summary([plan], tmp_path / "s.csv")
        assert (tmp_path / "s.csv").read_text().splitlines()[1].startswith("op,Ring,6,6,4,1,")


nested = st.lists(st.lists(st.lists(st.integers(0, 5), min_size=1, max_size=3), min_size=1, max_size=3),
                  min_size=1, max_size=3)


@settings(max_examples=60, deadline=None)
@given(nested, st.data())
def test_sizes_shrink_up_the_hierarchy(shape, data):
    cores, cell = [], 0
    for pod in shape:
        rings = []
        for ring in pod:
            rings.append([f"c{cell + k}" for k in range(len(ring))])
            cell += len(ring)
        cores.append(rings)
    topo = Topology.from_nested("op", [cores])
    cells = [f"c{k}" for k in range(cell)]
    sets = {c: set(data.draw(st.lists(st.sampled_from("abcdef"), max_size=4))) for c in cells}
    sizes = {i: data.draw(st.integers(1, 100)) for i in "abcdef"}
    w = worthy_from_sets(sets)
    t = totals(w, topo, sizes)
    assert t == sorted(t, reverse=True)
    u = totals(w, topo)
    assert u[-1] == len(set().union(*sets.values()))
    assert u[0] == sum(len(s) for s in sets.values())


def test_hit_ratio_matches_marking(worked_topology):
    reqs = ([make_request("x", "c1")] * 6 + [make_request("y", "c1")] * 3 + [make_request("x", "c2")])
    w = mark_cache_worthy(tally_popularity(reqs), 0.5)
    for arch in ARCHITECTURES:
        plan = place_caches(w, worked_topology, arch)
        # the c2 copy of x shares ring0 with c1 but its pair was not marked
        assert achieved_hit_ratio(plan, reqs, worked_topology) == pytest.approx(0.6)
