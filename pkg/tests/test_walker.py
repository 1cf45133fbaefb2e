import numpy as np
import pytest

from closedwalks.errors import ConfigError, EstimationError
from closedwalks.generators import (barabasi_albert, complete_graph, path_graph,
                                    random_connected_graph, star_graph)
from closedwalks.graphio import FullAccess, QueryLedger, RestrictedAccess
from closedwalks.walker import (DAccumulator, WalkConfig, WalkWindow, default_burn_in, estimate_D,
                                random_walk, step)


def test_default_burn_in():
    assert default_burn_in(1024) == 1000
    assert default_burn_in(1000) == 1000
    assert default_burn_in(3) == 200


def test_config_rejects_short_walk():
    with pytest.raises(ConfigError):
        WalkConfig(walk_length=10, burn_in=100).validate(50)
    with pytest.raises(ConfigError):
        WalkConfig(walk_length=105, burn_in=100).validate(50, window=5)
    assert WalkConfig(walk_length=106, burn_in=100).validate(50, window=5) == 100


def test_forced_move_on_single_edge():
    acc = RestrictedAccess(path_graph(2))
    w = WalkWindow(depth=3)
    w.push(0)
    rng = np.random.default_rng(0)
    assert step(acc, w, rng) == 1
    assert step(acc, w, rng) == 0
    assert acc.ledger.queries_used == 2
    assert list(w.degrees) == [1, 1, None]


def test_hub_step_is_uniform():
    g = star_graph(4)
    rng = np.random.default_rng(11)
    acc = RestrictedAccess(g)
    counts = np.zeros(5)
    for _ in range(100_000):
        w = WalkWindow(depth=2)
        w.push(0)
        counts[step(acc, w, rng)] += 1
    freq = counts[1:] / counts.sum()
    assert counts[0] == 0
    assert np.all(np.abs(freq - 0.25) < 0.01)


def test_window_depth():
    w = WalkWindow(depth=3, keep_neighbors=2)
    acc = RestrictedAccess(complete_graph(5))
    w.push(0)
    rng = np.random.default_rng(1)
    for _ in range(10):
        step(acc, w, rng)
    assert len(w.nodes) == 3 and len(w.neighbor_cache) == 2
    assert w.back(0) == w.current


def test_k4_visits_uniform():
    walk = random_walk(FullAccess(complete_graph(4)), WalkConfig(1_000_100, burn_in=100, seed=5))
    counted = walk.nodes[walk.burn_in + 1:]
    freq = np.bincount(counted, minlength=4) / len(counted)
    assert np.all(np.abs(freq - 0.25) < 0.005)


def test_stationary_distribution_tv():
    g = random_connected_graph(200, 0.03, rng=4)
    walk = random_walk(FullAccess(g), WalkConfig(1_000_000, seed=2))
    counted = walk.nodes[walk.burn_in + 1:]
    freq = np.bincount(counted, minlength=g.node_count) / len(counted)
    pi = g.degrees / g.degree_sum
    assert 0.5 * np.abs(freq - pi).sum() < 0.02
    # mean of 1/d along the walk approaches n/D
    inv = np.mean(1.0 / g.degrees[counted])
    assert abs(inv - g.node_count / g.degree_sum) / (g.node_count / g.degree_sum) < 0.01


def test_compiled_and_streamed_walks_agree():
    g = barabasi_albert(500, 3, seed=2)
    cfg = WalkConfig(5_000, seed=9)
    a = random_walk(FullAccess(g), cfg)
    b = random_walk(FullAccess(g), cfg, compiled=False)
    assert np.array_equal(a.nodes, b.nodes)
    assert np.array_equal(a.degs, b.degs)
    assert a.queries_used == b.queries_used == 5_000
    # the streamed walk's CSR holds exactly the fetched neighborhoods
    for j in range(0, 5_000, 97):
        assert np.array_equal(b.nbrs[b.offsets[b.rows[j]]:b.offsets[b.rows[j] + 1]],
                              g.neighbors(b.nodes[j]))


def test_determinism():
    g = barabasi_albert(300, 2, seed=1)
    cfg = WalkConfig(20_000, seed=3)
    a, b = random_walk(FullAccess(g), cfg), random_walk(FullAccess(g), cfg)
    assert np.array_equal(a.nodes, b.nodes) and a.queries_used == b.queries_used
    assert a.d_accumulator() == b.d_accumulator()


def test_budget_cuts_walk_short():
    g = complete_graph(6)
    for compiled in (True, False):
        acc = FullAccess(g, QueryLedger(budget=700))
        walk = random_walk(acc, WalkConfig(1000, burn_in=100, seed=1), compiled=compiled)
        assert not walk.complete
        assert walk.queries_used == acc.ledger.queries_used == 700
        assert walk.steps_taken == 700 and walk.steps_counted == 600


def test_restricted_needs_start_node():
    g = complete_graph(4)
    with pytest.raises(ConfigError):
        random_walk(RestrictedAccess(g), WalkConfig(500, burn_in=10))
    walk = random_walk(RestrictedAccess(g), WalkConfig(500, burn_in=10, start_node=2))
    assert walk.nodes[0] == 2
    with pytest.raises(ConfigError):
        random_walk(RestrictedAccess(g), WalkConfig(500, burn_in=10, start_node=9))


def test_D_exact_on_regular():
    walk = random_walk(FullAccess(complete_graph(4)), WalkConfig(5_000, seed=0))
    assert estimate_D(walk.d_accumulator(), 4) == 12.0


def test_D_star():
    walk = random_walk(FullAccess(star_graph(4)), WalkConfig(100_000, seed=0))
    assert abs(estimate_D(walk.d_accumulator(), 5) - 8) / 8 < 0.02


def test_D_requires_steps():
    with pytest.raises(EstimationError):
        estimate_D(DAccumulator(), 4)
    acc = DAccumulator(degree_counts={})
    for d in (1, 3, 3):
        acc.add(d)
    assert estimate_D(acc, 2) == pytest.approx(2 * 3 / (1 + 2 / 3))


def test_trace_dump(tmp_path):
    walk = random_walk(FullAccess(complete_graph(4)), WalkConfig(300, burn_in=10, seed=0))
    p = tmp_path / "trace.txt"
    walk.dump_trace(p)
    assert np.array_equal(np.loadtxt(p, dtype=int), walk.nodes)
