import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fo4lab.canon import all_graphs
from fo4lab.extcalc import (
    HypothesisError,
    PairKind,
    claim1_predicate,
    classify_masks,
    classify_pair,
    compose_rigid,
    f_alpha,
    f_value,
    format_rational,
    parse_rational,
    rho_max_bruteforce,
    rho_max_flow,
)
from fo4lab.graphs import Graph, RootedPair, bits, mask_of

from builders import random_graph
from oracles import classify_by_definition, max_density_by_subsets
from test_graphs import graphs

A35 = Fraction(3, 5)


def test_rational_io():
    assert parse_rational("3/5") == A35
    assert parse_rational("0.61") == Fraction(61, 100)
    assert format_rational(Fraction(6, 4)) == "3/2"
    with pytest.raises(ValueError):
        parse_rational("x")


def test_excess_values():
    assert f_value(3, 5, A35) == 0
    pair = RootedPair.of(Graph.complete(4), [0])
    assert f_alpha(pair, A35) == Fraction(-3, 5)


@pytest.mark.parametrize(
    "edges,h,kind",
    [
        ([(0, 1)], [0], PairKind.SAFE),  # pendant edge
        ([(2, 0), (2, 1)], [0, 1], PairKind.RIGID),  # tick
        ([(3, 0), (4, 1), (5, 2), (3, 4), (4, 5)], [0, 1, 2], PairKind.NEUTRAL),
        ([(0, 2), (2, 3), (3, 1), (4, 3), (4, 2)], [0, 1], PairKind.NEUTRAL),
    ],
)
def test_named_pairs(edges, h, kind):
    g = Graph.from_edges(max(max(e) for e in edges) + 1, edges)
    assert classify_pair(RootedPair.of(g, h), A35).kind is kind


def test_none_carries_witness():
    # a pendant edge plus a triangle hanging off the root: neither safe nor rigid nor neutral
    g = Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (2, 3), (3, 4)])
    c = classify_masks(g, 1, A35)
    assert classify_by_definition(g, [0], A35) == c.kind.value
    if c.kind is PairKind.NONE:
        assert c.witness & 1 and c.witness != g.full_mask


def test_classifier_rejects_bad_input():
    with pytest.raises(ValueError):
        classify_masks(Graph.complete(3), 0b111, A35)
    with pytest.raises(ValueError):
        classify_masks(Graph.complete(3), 0b1000, A35)


@pytest.mark.parametrize("alpha", [Fraction(3, 5), Fraction(1, 2), Fraction(2, 3)])
def test_classifier_matches_definition_small(alpha):
    for n in range(1, 6):
        for g in all_graphs(n):
            for h in range(g.full_mask):
                assert classify_masks(g, h, alpha).kind.value == classify_by_definition(g, bits(h), alpha)


@pytest.mark.parametrize(
    "g,value",
    [
        (Graph.complete(4), Fraction(3, 2)),
        (Graph.complete(5), Fraction(2)),
        (Graph.cycle(5), Fraction(1)),
        (Graph.path(3), Fraction(2, 3)),
        (Graph.empty(3), Fraction(0)),
    ],
)
def test_rho_max_known(g, value):
    assert rho_max_flow(g) == value == rho_max_bruteforce(g)


@settings(max_examples=120, deadline=None)
@given(graphs(max_n=9))
def test_rho_max_three_routes(g):
    if g.n == 0:
        return
    ref = max_density_by_subsets(g)
    assert rho_max_bruteforce(g) == ref
    assert rho_max_flow(g) == ref


def test_rho_max_random_medium():
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randint(10, 20)
        g = random_graph(rng, n, rng.randint(0, 3 * n))
        assert rho_max_flow(g) == rho_max_bruteforce(g)


def test_rho_max_empty_graph_rejected():
    with pytest.raises(ValueError):
        rho_max_flow(Graph.empty(0))


def test_compose_rigid_transitive():
    # two ticks stacked: (G', G) and (G, H) rigid, so (G', H) rigid
    gp = Graph.from_edges(4, [(2, 0), (2, 1), (3, 0), (3, 2)])
    assert classify_masks(gp, 0b0111, A35).kind is PairKind.RIGID
    assert classify_masks(Graph.from_edges(3, [(2, 0), (2, 1)]), 0b011, A35).kind is PairKind.RIGID
    assert compose_rigid(gp, 0b0111, 0b0011, A35).kind is PairKind.RIGID
    with pytest.raises(ValueError):
        compose_rigid(gp, 0b0011, 0b0111, A35)


@settings(max_examples=300, deadline=None)
@given(graphs(max_n=6), st.data())
def test_rigid_composition_property(gp, data):
    if gp.n < 3:
        return
    g_mask = data.draw(st.integers(1, gp.full_mask - 1))
    h_mask = data.draw(st.integers(0, gp.full_mask)) & g_mask
    if h_mask == g_mask:
        return
    from fo4lab.graphs import induced_subgraph

    sub, old = induced_subgraph(gp, g_mask)
    inner = mask_of(old.index(v) for v in bits(h_mask))
    if (
        classify_masks(gp, g_mask, A35).kind is PairKind.RIGID
        and classify_masks(sub, inner, A35).kind is PairKind.RIGID
    ):
        assert compose_rigid(gp, g_mask, h_mask, A35).kind is PairKind.RIGID


def _claim1_instances(rng, count):
    found = 0
    tries = 0
    while found < count and tries < 200000:
        tries += 1
        n = rng.randint(3, 8)
        g = random_graph(rng, n, rng.randint(2, 2 * n))
        u = rng.randint(1, g.full_mask - 1)
        w = rng.randint(0, g.full_mask) & u
        alpha = rng.choice([Fraction(3, 5), Fraction(1, 2), Fraction(2, 3)])
        try:
            verdict = claim1_predicate(g, u, w, alpha)
        except HypothesisError:
            continue
        found += 1
        yield g, u, w, alpha, verdict


def test_claim1_on_random_instances():
    rng = random.Random(2)
    instances = list(_claim1_instances(rng, 150))
    assert len(instances) == 150
    for g, u, w, alpha, verdict in instances:
        assert verdict, (g, bits(u), bits(w), alpha)


def test_claim1_hypotheses_are_checked():
    g = Graph.complete(3)
    with pytest.raises(HypothesisError):
        claim1_predicate(g, 0b011, 0b011, A35)
    with pytest.raises(HypothesisError):
        claim1_predicate(g, 0b111, 0b001, A35)
