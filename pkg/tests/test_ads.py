import io
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from hipads.ads import (
    Ads,
    AdsEntry,
    Flavor,
    ads_insert,
    build_local_updates,
    build_pruned_dijkstra,
    read_snapshot,
    snapshot_bytes,
    stream_ads_first,
    stream_ads_recent,
)
from hipads.graph import Graph
from hipads.rank import InvalidInput, InvalidParameter, RankScheme
from oracles import all_pairs, definitional_ads, random_graph


def entries(ads_set):
    return [a.entries for a in ads_set.sketches]


@pytest.mark.parametrize("flavor", list(Flavor))
@pytest.mark.parametrize("base", [None, 2.0])
def test_builders_match_oracle(flavor, base):
    rng = random.Random(hash((flavor.value, base)) & 0xFFFF)
    for trial in range(15):
        g = random_graph(rng, rng.randint(1, 25), 0.15, rng.random() < 0.5, rng.random() < 0.5)
        k = rng.choice([1, 2, 3, 8])
        scheme = RankScheme(trial, base=base)
        for direction, fw in (("forward", True), ("backward", False)):
            ref = definitional_ads(g, k, flavor, scheme, fw)
            assert entries(build_pruned_dijkstra(g, k, flavor, direction=direction, scheme=scheme)) == ref
            assert entries(build_local_updates(g, k, flavor, direction=direction, scheme=scheme)) == ref


def test_single_node():
    s = build_pruned_dijkstra(Graph.from_arcs(1, []), 3, seed=4)
    assert s[0].entries == [AdsEntry(0.0, 0, RankScheme(4).value(0))]


def test_k_at_least_n_keeps_everything():
    g = Graph.from_arcs(5, [(i, i + 1, 1.0) for i in range(4)], undirected=True)
    s = build_pruned_dijkstra(g, 5, seed=1)
    for v in range(5):
        assert [(e.distance, e.node) for e in s[v].entries] == sorted((abs(v - u) * 1.0, u) for u in range(5))


def test_path_converges_within_diameter():
    g = Graph.from_arcs(5, [(i, i + 1, 1.0) for i in range(4)])
    s = build_local_updates(g, 2, seed=3)
    assert s.stats["rounds"] <= 5  # the last round only confirms nothing changed
    assert entries(s) == entries(build_pruned_dijkstra(g, 2, seed=3))


def test_negative_epsilon_rejected():
    with pytest.raises(InvalidParameter):
        build_local_updates(Graph.from_arcs(2, [(0, 1, 1.0)]), 2, epsilon=-0.1)


@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_approximate_law(eps):
    rng = random.Random(11)
    for trial in range(20):
        g = random_graph(rng, rng.randint(2, 30), 0.15, True, rng.random() < 0.5)
        k = rng.choice([1, 2, 4])
        scheme = RankScheme(trial)
        s = build_local_updates(g, k, epsilon=eps, scheme=scheme)
        dist = all_pairs(g)
        for v in range(g.n):
            held = {e.node: e for e in s[v].entries}
            for e in held.values():
                # stored distances are realised path lengths
                assert e.distance >= dist[v][e.node] - 1e-9
                closer = [x for x in held.values() if (x.distance, x.node) < (e.distance, e.node) and x.rank <= e.rank]
                assert len(closer) < k
            for j, dj in dist[v].items():
                if j in held:
                    continue
                rj = scheme.value(j)
                blockers = [x for x in held.values() if x.rank <= rj and x.distance <= dj * (1 + eps) + 1e-9]
                assert len(blockers) >= k, (trial, v, j)


def test_approximate_sketch_is_no_larger_on_average():
    rng = random.Random(2)
    g = random_graph(rng, 40, 0.1, True, True)
    exact = build_local_updates(g, 3, seed=1).mean_size()
    approx = build_local_updates(g, 3, seed=1, epsilon=0.5).mean_size()
    assert approx <= exact


def test_ads_insert_examples():
    scheme = RankScheme(0)
    ads = Ads(0, Flavor.BOTTOM_K, 2, scheme)
    assert ads_insert(ads, 5, 0.7, 0.0)
    assert ads_insert(ads, 6, 0.9, 1.0)  # first k always enter
    assert not ads_insert(ads, 6, 0.9, 1.5)
    assert ads_insert(ads, 7, 0.3, 2.0)
    assert not ads_insert(ads, 8, 0.8, 3.0)


@given(st.lists(st.tuples(st.integers(0, 40), st.integers(0, 20)), max_size=60), st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_ads_insert_matches_law(pairs, k):
    scheme = RankScheme(9)
    first = {}
    for node, d in sorted(pairs, key=lambda p: (p[1], p[0])):
        first.setdefault(node, float(d))
    ads = Ads(None, Flavor.BOTTOM_K, k, scheme)
    for node, d in sorted(first.items(), key=lambda it: (it[1], it[0])):
        ads_insert(ads, node, scheme.value(node), d)
    order = sorted(first.items(), key=lambda it: (it[1], it[0]))
    expected = []
    for i, (node, d) in enumerate(order):
        r = scheme.value(node)
        if sum(1 for x, _ in order[:i] if scheme.value(x) <= r) < k:
            expected.append(AdsEntry(d, node, r))
    assert ads.entries == sorted(expected)


def _offline(pairs, k, scheme):
    order = sorted(pairs, key=lambda p: (p[1], p[0]))
    out = []
    for i, (node, d) in enumerate(order):
        r = scheme.value(node)
        if sum(1 for x, _ in order[:i] if scheme.value(x) <= r) < k:
            out.append(AdsEntry(d, node, r))
    return sorted(out)


@given(st.lists(st.integers(0, 30), max_size=80), st.integers(1, 5), st.integers(0, 1000))
@settings(max_examples=80, deadline=None)
def test_stream_first_matches_offline(tokens, k, seed):
    scheme = RankScheme(seed)
    stream = [(x, float(t)) for t, x in enumerate(tokens)]
    first = {}
    for x, t in stream:
        first.setdefault(x, t)
    assert stream_ads_first(stream, k, scheme).entries == _offline(first.items(), k, scheme)


@given(st.lists(st.integers(0, 30), max_size=80), st.integers(1, 5), st.integers(0, 1000))
@settings(max_examples=80, deadline=None)
def test_stream_recent_matches_offline(tokens, k, seed):
    scheme = RankScheme(seed)
    horizon = float(len(tokens))
    stream = [(x, float(t)) for t, x in enumerate(tokens)]
    last = {x: horizon - t for x, t in stream}
    assert stream_ads_recent(stream, horizon, k, scheme).entries == _offline(last.items(), k, scheme)


def test_stream_recent_distinct_mirrors_first():
    scheme = RankScheme(3)
    stream = [(x, float(t)) for t, x in enumerate(random.Random(1).sample(range(100), 50))]
    horizon = 50.0
    rec = stream_ads_recent(stream, horizon, 4, scheme)
    rev = stream_ads_first([(x, horizon - t) for x, t in reversed(stream)], 4, scheme)
    assert rec.nodes() == rev.nodes()


def test_stream_rejects_time_going_backwards():
    with pytest.raises(InvalidInput):
        stream_ads_first([(1, 2.0), (2, 1.0)], 2, RankScheme(0))


@pytest.mark.parametrize("flavor", list(Flavor))
@pytest.mark.parametrize("base", [None, 2.0])
def test_snapshot_round_trip(flavor, base):
    g = random_graph(random.Random(4), 20, 0.2, True, False)
    s = build_pruned_dijkstra(g, 3, flavor, scheme=RankScheme(77, base=base), direction="backward")
    back = read_snapshot(io.BytesIO(snapshot_bytes(s)))
    assert back.flavor == s.flavor and back.k == s.k and back.direction == s.direction
    assert back.scheme == s.scheme
    assert entries(back) == entries(s)
    assert snapshot_bytes(back) == snapshot_bytes(s)


def test_snapshot_weights_mismatch():
    g = random_graph(random.Random(4), 10, 0.3, False, True)
    w = {i: 1.0 + i for i in range(10)}
    s = build_pruned_dijkstra(g, 2, scheme=RankScheme(1, weights=w))
    data = snapshot_bytes(s)
    assert entries(read_snapshot(io.BytesIO(data), w)) == entries(s)
    with pytest.raises(InvalidParameter):
        read_snapshot(io.BytesIO(data), {**w, 3: 9.0})


def test_snapshot_rejects_garbage():
    with pytest.raises(InvalidInput):
        read_snapshot(io.BytesIO(b"nope"))


def test_mean_size_grows_like_k_log_n():
    g = random_graph(random.Random(8), 200, 0.03, False, True)
    s = build_pruned_dijkstra(g, 4, seed=2)
    assert 4 <= s.mean_size() <= 4 * (1 + math.log(200))
