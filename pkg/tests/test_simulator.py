"""Simulator correctness: hand-traced schedules, the recurrence-recursion
oracle, engine equivalence, invariants, and reproducibility.

The deterministic instances use dyadic gap lengths (0.25, 0.5, 0.75, ...) so
cumulative event times are exact in binary floating point and the recorded
trajectories can be compared against the hand tables with ==.
"""

import math

import numpy as np
import pytest

from versionage import (
    Beta,
    CacheNetwork,
    ChiSquare,
    Deterministic,
    Exponential,
    Rayleigh,
    RenewalStream,
    RngStream,
    Uniform,
    monte_carlo,
    simulate_once,
)
from versionage.simulator import SOURCE_STREAM, _TreeReplicator, _link_stream


def D(c):
    return Deterministic(c=c)


def chain(source_dist, link_dists, names=None):
    names = names or ["s"] + [f"n{i}" for i in range(1, len(link_dists) + 1)]
    links = [(names[i], names[i + 1], d) for i, d in enumerate(link_dists)]
    return CacheNetwork(nodes=names, source=names[0], source_dist=source_dist, links=links)


def realized_events(network, master_seed, iteration, horizon):
    """Each stream's event times, drawn exactly as the simulator draws them."""
    out = {}
    rng = RngStream(master_seed, iteration, *SOURCE_STREAM)
    out["source"] = RenewalStream(network.source_dist, SOURCE_STREAM, rng).advance(horizon)
    for link in network.links:
        sid = _link_stream(link)
        stream = RenewalStream(link.dist, sid, RngStream(master_seed, iteration, *sid))
        out[(link.src, link.dst)] = stream.advance(horizon)
    return out


# -- hand-traced deterministic instances ------------------------------------------

def test_trace_one_hop():
    # source every 1, deliveries every 1.3, sampled at 3.5
    network = chain(D(1.0), [D(1.3)], names=["s", "u"])
    r = simulate_once(network, 3.5, master_seed=1, record=True)
    assert r.steps["s"] == [(1.0, 1), (2.0, 2), (3.0, 3)]
    assert r.steps["u"] == [(1.3, 1), (2.6, 2)]
    assert r.terminal["u"] == 1
    assert r.time_average["u"] == pytest.approx(1.1 / 1.75, rel=1e-12)


def test_trace_synchronized_ties():
    # deliveries coincide with source updates; the source event applies first,
    # so the cache always carries the fresh version and its age stays 0
    network = chain(D(1.0), [D(1.0)], names=["s", "u"])
    r = simulate_once(network, 3.0, master_seed=1, record=True)
    assert r.steps["u"] == [(1.0, 1), (2.0, 2), (3.0, 3)]
    assert r.terminal["u"] == 0
    assert r.time_average["u"] == 0.0


def test_trace_two_hop_dyadic():
    network = chain(D(0.5), [D(0.75), D(1.25)], names=["s", "a", "b"])
    r = simulate_once(network, 4.0, master_seed=1, record=True)
    assert r.steps["a"] == [(0.75, 1), (1.5, 3), (2.25, 4), (3.0, 6), (3.75, 7)]
    assert r.steps["b"] == [(1.25, 1), (2.5, 4), (3.75, 7)]
    assert r.terminal == {"s": 0, "a": 1, "b": 1}
    assert r.time_average["b"] == pytest.approx((11.0 - 7.25) / 2.0, rel=1e-12)


def test_trace_diamond():
    # two staggered feeds into c; the freshest version wins regardless of
    # which link delivered last
    network = CacheNetwork(
        nodes=["s", "a", "b", "c"],
        source="s",
        source_dist=D(0.5),
        links=[
            ("s", "a", D(1.0)),
            ("s", "b", D(1.5)),
            ("a", "c", D(2.0)),
            ("b", "c", D(2.25)),
        ],
    )
    r = simulate_once(network, 9.75, master_seed=1, record=True)
    assert r.steps["a"][:4] == [(1.0, 2), (2.0, 4), (3.0, 6), (4.0, 8)]
    assert r.steps["b"][:3] == [(1.5, 3), (3.0, 6), (4.5, 9)]
    # deliveries into c at 2, 2.25, 4, 4.5, 6, 6.75, 8, 9; stale ones change nothing
    assert r.steps["c"] == [(2.0, 4), (4.0, 8), (4.5, 9), (6.0, 12), (8.0, 16), (9.0, 18)]
    assert r.terminal["c"] == 19 - 18


def test_trace_multicast_tree():
    network = CacheNetwork(
        nodes=["s", "a", "b", "c", "d"],
        source="s",
        source_dist=D(0.25),
        links=[
            ("s", "a", D(0.5)),
            ("a", "b", D(1.0)),
            ("a", "c", D(1.5)),
            ("s", "d", D(2.0)),
        ],
    )
    r = simulate_once(network, 4.8, master_seed=1, record=True)
    assert r.steps["a"][:4] == [(0.5, 2), (1.0, 4), (1.5, 6), (2.0, 8)]
    assert r.steps["b"] == [(1.0, 4), (2.0, 8), (3.0, 12), (4.0, 16)]
    assert r.steps["c"] == [(1.5, 6), (3.0, 12), (4.5, 18)]
    assert r.steps["d"] == [(2.0, 8), (4.0, 16)]
    assert r.terminal == {"s": 0, "a": 1, "b": 3, "c": 1, "d": 3}


def test_no_events_before_horizon_means_zero_age():
    network = chain(D(5.0), [D(7.0), D(9.0)])
    r = simulate_once(network, 1.0, master_seed=1)
    assert all(v == 0 for v in r.terminal.values())
    assert all(v == 0.0 for v in r.time_average.values())


# -- recurrence-recursion oracle ---------------------------------------------------

def count_at(events, t):
    return int(np.searchsorted(events, t, side="right"))


def recursion_age(events, path_keys, horizon):
    """Version age at the end of a chain via the backward-recurrence cascade:
    walk each hop's last delivery time backwards, then count source renewals
    in the remaining window.  Independent of the simulator's state machine."""
    t = horizon
    for key in path_keys:  # deepest link first
        n = count_at(events[key], t)
        t = float(events[key][n - 1]) if n else 0.0
    src = events["source"]
    return count_at(src, horizon) - count_at(src, t)


def test_recursion_oracle_on_dyadic_chain():
    network = chain(D(0.5), [D(0.75), D(1.25)], names=["s", "a", "b"])
    horizon = 4.0
    events = realized_events(network, 1, 0, horizon + 10.0)
    want = recursion_age(events, [("a", "b"), ("s", "a")], horizon)
    got = simulate_once(network, horizon, master_seed=1).terminal["b"]
    assert got == want == 1


def test_recursion_oracle_on_random_chains():
    network = chain(
        Exponential(rate=2.0),
        [Rayleigh(sigma=1.0), Uniform(lo=0.0, hi=2.0), Exponential(rate=1.0)],
        names=["s", "a", "b", "c"],
    )
    horizon = 80.0
    for it in range(25):
        events = realized_events(network, 77, it, horizon + 50.0)
        want = recursion_age(events, [("b", "c"), ("a", "b"), ("s", "a")], horizon)
        got = simulate_once(network, horizon, master_seed=77, iteration=it).terminal["c"]
        assert got == want


def test_diamond_matches_direct_recurrence_evaluation():
    """On the diamond, evaluate the indicator/min recursion straight from the
    realized event sequences and compare with the simulator at probe times."""
    network = CacheNetwork(
        nodes=["s", "a", "b", "c"],
        source="s",
        source_dist=D(0.5),
        links=[
            ("s", "a", D(1.0)),
            ("s", "b", D(1.5)),
            ("a", "c", D(2.0)),
            ("b", "c", D(2.25)),
        ],
    )
    horizon = 9.75
    events = realized_events(network, 1, 0, horizon + 20.0)
    src = events["source"]

    def one_hop_age(feed_key, t):
        # age of a single-feed cache: source renewals since its last delivery
        last = last_delivery(feed_key, t)
        return count_at(src, t) - count_at(src, last)

    def last_delivery(key, t):
        n = count_at(events[key], t)
        return float(events[key][n - 1]) if n else 0.0

    def age_c(t):
        # the most recent feed into c wins; priorities break exact ties
        # (a->c has priority 0, b->c priority 1)
        la, lb = last_delivery(("a", "c"), t), last_delivery(("b", "c"), t)
        if la >= lb:
            winner, upstream, s = ("a", "c"), ("s", "a"), la
        else:
            winner, upstream, s = ("b", "c"), ("s", "b"), lb
        inner = min(one_hop_age(upstream, s), age_c_before(s))
        return inner + count_at(src, t) - count_at(src, s)

    def age_c_before(t):
        # age of c just before its delivery at time t: same recursion on the
        # strictly earlier deliveries
        la = last_strictly_before(("a", "c"), t)
        lb = last_strictly_before(("b", "c"), t)
        if la == 0.0 and lb == 0.0:
            return count_at(src, t)
        if la >= lb:
            upstream, s = ("s", "a"), la
        else:
            upstream, s = ("s", "b"), lb
        inner = min(one_hop_age(upstream, s), age_c_before(s))
        return inner + count_at(src, t) - count_at(src, s)

    def last_strictly_before(key, t):
        arr = events[key]
        n = int(np.searchsorted(arr, t, side="left"))
        return float(arr[n - 1]) if n else 0.0

    r = simulate_once(network, horizon, master_seed=1, record=True)

    def simulated_age_c(t):
        version = 0
        for when, value in r.steps["c"]:
            if when <= t:
                version = value
        return count_at(src, t) - version

    for probe in (1.9, 2.0, 2.25, 3.1, 4.4, 4.5, 5.9, 6.75, 8.2, 9.0, 9.6):
        assert simulated_age_c(probe) == age_c(probe), f"probe t={probe}"


# -- invariants ---------------------------------------------------------------------

def step_value(steps, t):
    v = 0
    for τ, version in steps:
        if τ <= t:
            v = version
    return v


def test_monotone_staleness_on_tree():
    network = CacheNetwork(
        nodes=["s", "a", "b", "c"],
        source="s",
        source_dist=Exponential(rate=2.0),
        links=[("s", "a", Rayleigh(sigma=1.0)), ("a", "b", Uniform(lo=0.0, hi=2.0)),
               ("a", "c", Exponential(rate=1.0))],
    )
    for it in range(10):
        r = simulate_once(network, 50.0, master_seed=5, iteration=it,
                          record=True, check_invariants=True)
        probe_times = sorted(t for steps in r.steps.values() for t, _ in steps)
        for t in probe_times:
            w0 = step_value(r.steps["s"], t)
            for child, parent in (("a", "s"), ("b", "a"), ("c", "a")):
                assert step_value(r.steps[child], t) <= step_value(r.steps[parent], t)
                assert step_value(r.steps[child], t) <= w0


def test_link_declaration_order_is_irrelevant():
    links = [
        ("s", "a", Rayleigh(sigma=1.0)),
        ("a", "b", Uniform(lo=0.0, hi=2.0)),
        ("a", "c", Exponential(rate=1.0)),
    ]
    nodes = ["s", "a", "b", "c"]
    base = CacheNetwork(nodes=nodes, source="s", source_dist=Exponential(rate=2.0), links=links)
    ref = simulate_once(base, 60.0, master_seed=9, record=True)
    for perm in ([2, 1, 0], [1, 2, 0], [2, 0, 1]):
        shuffled = CacheNetwork(
            nodes=nodes, source="s", source_dist=Exponential(rate=2.0),
            links=[links[i] for i in perm],
        )
        r = simulate_once(shuffled, 60.0, master_seed=9, record=True)
        assert r.terminal == ref.terminal
        assert r.steps == ref.steps


def test_priority_cannot_change_versions_under_ties():
    # simultaneous deliveries into one node commute under keep-the-freshest
    def build(p_ac, p_bc):
        return CacheNetwork(
            nodes=["s", "a", "b", "c"],
            source="s",
            source_dist=D(0.5),
            links=[("s", "a", D(1.0)), ("s", "b", D(1.0)),
                   ("a", "c", D(2.0), p_ac), ("b", "c", D(2.0), p_bc)],
        )
    r1 = simulate_once(build(0, 1), 12.0, master_seed=1, record=True)
    r2 = simulate_once(build(1, 0), 12.0, master_seed=1, record=True)
    assert r1.steps == r2.steps


# -- engine equivalence ---------------------------------------------------------------

MIXED_TREE = CacheNetwork(
    nodes=["s", "a", "b", "c", "d", "e"],
    source="s",
    source_dist=D(0.5),
    links=[
        ("s", "a", Uniform(lo=0.0, hi=2.0)),
        ("a", "b", D(1.0)),
        ("a", "c", Exponential(rate=1.0)),
        ("s", "d", ChiSquare(k=1)),
        ("b", "e", Beta(alpha=2.0, beta=3.0)),
    ],
)


def test_tree_fast_path_matches_event_engine():
    targets = ["b", "c", "d", "e"]
    rep = _TreeReplicator(MIXED_TREE, targets, 40.0)
    for it in range(30):
        terminal, time_avg = rep.run(123, it)
        slow = simulate_once(MIXED_TREE, 40.0, master_seed=123, iteration=it)
        for t in targets:
            assert terminal[t] == slow.terminal[t], (t, it)
            assert time_avg[t] == pytest.approx(slow.time_average[t], rel=1e-9, abs=1e-12)


def test_terminal_and_time_average_estimators_agree():
    network = chain(Exponential(rate=2.0), [Uniform(lo=0.0, hi=2.0), Uniform(lo=0.0, hi=2.0)])
    kw = dict(horizon=500.0, iterations=3000, master_seed=31)
    term = monte_carlo(network, **kw, estimator="terminal")["n2"]
    tavg = monte_carlo(network, **kw, estimator="time_average")["n2"]
    joint = math.hypot(term.stderr, tavg.stderr)
    assert abs(term.mean - tavg.mean) <= 4.0 * joint


# -- monte carlo plumbing ---------------------------------------------------------------

def test_monte_carlo_is_deterministic():
    a = monte_carlo(MIXED_TREE, targets=["b"], horizon=30.0, iterations=50, master_seed=8)
    b = monte_carlo(MIXED_TREE, targets=["b"], horizon=30.0, iterations=50, master_seed=8)
    assert np.array_equal(a["b"].samples, b["b"].samples)
    one = monte_carlo(MIXED_TREE, targets=["b"], horizon=30.0, iterations=1, master_seed=8)
    assert one["b"].samples[0] == a["b"].samples[0]
    assert one["b"].stderr == 0.0


def test_monte_carlo_threads_do_not_change_results():
    kw = dict(targets=["b", "c"], horizon=30.0, iterations=40, master_seed=4)
    serial = monte_carlo(MIXED_TREE, **kw, threads=1)
    parallel = monte_carlo(MIXED_TREE, **kw, threads=2)
    for t in ("b", "c"):
        assert np.array_equal(serial[t].samples, parallel[t].samples)


def test_monte_carlo_general_graph_uses_event_engine():
    diamond = CacheNetwork(
        nodes=["s", "a", "b", "c"],
        source="s",
        source_dist=Exponential(rate=2.0),
        links=[("s", "a", Exponential(rate=1.0)), ("s", "b", Exponential(rate=1.0)),
               ("a", "c", Uniform(lo=0.0, hi=2.0)), ("b", "c", Uniform(lo=0.0, hi=2.0))],
    )
    out = monte_carlo(diamond, targets=["c"], horizon=40.0, iterations=60, master_seed=3)
    assert out["c"].iterations == 60
    again = monte_carlo(diamond, targets=["c"], horizon=40.0, iterations=60, master_seed=3)
    assert np.array_equal(out["c"].samples, again["c"].samples)


def test_monte_carlo_default_targets_are_leaves():
    out = monte_carlo(MIXED_TREE, horizon=10.0, iterations=5, master_seed=1)
    assert set(out) == {"c", "d", "e"}


def test_poisson_two_hop_mean():
    # all-exponential 2-hop chain: limiting age is source_rate * (1/r1 + 1/r2)
    network = chain(Exponential(rate=1.0), [Exponential(rate=1.0), Exponential(rate=1.0)])
    out = monte_carlo(network, targets=["n2"], horizon=500.0, iterations=4000,
                      master_seed=17, estimator="time_average")["n2"]
    assert abs(out.mean - 2.0) <= 4.0 * out.stderr
