import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fo4lab.canon import rooted_canonical_form
from fo4lab.extcalc import HypothesisError, PairKind, classify_masks, rho_max_flow
from fo4lab.graphs import Graph, bits, disjoint_union, mask_of, popcount
from fo4lab.gset import GSetOracle, GSetParams
from fo4lab.profiles import (
    K1,
    K2,
    TEMPLATES,
    TICK,
    build_witness,
    connected_subsets,
    delta,
    extensions,
    find_u_bad,
    format_profile,
    kt_maximal,
    kt_star_neighbourhood,
    neighbourhood_set,
    profile,
    specification,
    theta_domain,
    zero_neighbourhood,
    zeta,
)

from builders import plant, random_graph, sparse_random_graph
from oracles import brute_extensions, brute_u_bad
from test_graphs import graphs


def _member(reg, layer, index=0):
    return reg.layers[layer][index].graph


# templates ----------------------------------------------------------------------


def test_template_classes():
    for t in (TEMPLATES.k1_t1, TEMPLATES.k2_t2):
        assert classify_masks(t.graph, t.root_mask, Fraction(3, 5)).kind is PairKind.NEUTRAL
        assert t.added == 3 and 2 <= t.nu <= 3
    star = TEMPLATES.kstar_tstar
    assert classify_masks(star.graph, star.root_mask, Fraction(3, 5)).kind is PairKind.RIGID
    assert star.nu == 2 and star.added == 1
    assert TEMPLATES.by_index(1) is K1 and TEMPLATES.by_index(2) is K2
    with pytest.raises(ValueError):
        TEMPLATES.by_index(3)


# neighbourhood sets -------------------------------------------------------------


def test_neighbourhood_set_examples():
    assert bits(neighbourhood_set(Graph.complete(3), [(0, True), (1, True)])) == [2]
    assert bits(neighbourhood_set(Graph.path(3), [(0, True), (2, True)])) == [1]
    # vertex 2 is adjacent to 1, so nothing is adjacent to 0 but not to 1
    assert delta(Graph.complete(3), [(0, True), (1, False)]) == 0
    assert bits(neighbourhood_set(Graph.star(3), [(1, False), (2, False)])) == [3]


def test_neighbourhood_set_rejects_repeats():
    with pytest.raises(ValueError):
        neighbourhood_set(Graph.path(3), [(0, True), (0, False)])


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=9), st.data())
def test_neighbourhood_set_by_definition(g, data):
    if g.n == 0:
        return
    vs = data.draw(st.lists(st.integers(0, g.n - 1), unique=True, min_size=1, max_size=3))
    pol = data.draw(st.lists(st.booleans(), min_size=len(vs), max_size=len(vs)))
    cons = list(zip(vs, pol))
    expect = {w for w in range(g.n) if w not in vs and all(g.has_edge(w, v) == p for v, p in cons)}
    assert set(bits(neighbourhood_set(g, cons))) == expect
    assert delta(g, cons) == (1 if expect else 0)


# template extensions ------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([K1, K2, TICK]), st.booleans())
def test_extensions_match_brute_force(seed, template, strict):
    rng = random.Random(seed)
    n = rng.randint(4, 8)
    g = random_graph(rng, n, rng.randint(n, 2 * n))
    roots = tuple(rng.randrange(n) for _ in range(template.nu))
    allowed = {v for v in range(n) if rng.random() < 0.85}
    got = set(extensions(g, roots, template, mask_of(allowed), strict=strict))
    assert got == brute_extensions(g, roots, template, allowed, strict=strict)


def test_extensions_arity_checked():
    with pytest.raises(ValueError):
        next(extensions(Graph.empty(4), (0, 1), K1, 0b1111))


def test_zeta_planted_copy():
    g, new = plant(Graph.empty(3), (0, 1, 2), K1)
    assert zeta(g, 0b111, (0, 1, 2)) == 1
    # reversed roots see the mirrored path
    assert zeta(g, 0b111, (2, 1, 0)) == 1
    assert zeta(g, 0b111, (1, 0, 2)) == 0


def test_zeta_missing_edge():
    g, new = plant(Graph.empty(3), (0, 1, 2), K1)
    broken = g.remove_edges([(new[0], new[1])])
    assert zeta(broken, 0b111, (0, 1, 2)) == 0
    assert not brute_extensions(broken, (0, 1, 2), K1, set(range(broken.n)))


def test_zeta_ignores_vertices_inside_u():
    g, new = plant(Graph.empty(3), (0, 1, 2), K1)
    assert zeta(g, g.full_mask, (0, 1, 2)) == 0


def test_zeta_with_repeated_roots():
    # K2 on (a, a): a path a-c-d-a with a pendant e joined to c and d
    g, new = plant(Graph.empty(1), (0, 0), K2)
    assert zeta(g, 1, (0, 0), K2) == 1
    assert zeta(g, 1, (0,) * 3, K1) == 0


def test_zeta_roots_must_be_in_u():
    with pytest.raises(ValueError):
        zeta(Graph.empty(4), 0b0001, (0, 1, 2))


def test_theta_domain():
    dom = theta_domain(3)
    assert len(dom) == 6**3 - 3**3
    assert (1, 2, 3) not in dom and (1, 2, 4) in dom
    assert dom == sorted(dom)
    assert len(theta_domain(2)) == 5**3 - 2**3


def test_specification_of_isolated_copy_is_zero():
    g, new = plant(Graph.empty(3), (0, 1, 2), K1)
    assert specification(g, 0b111, (0, 1, 2) + tuple(new)) == 0


def test_specification_sees_second_level_copy():
    g, new = plant(Graph.empty(2), (0, 1), K2)
    g, second = plant(g, tuple(new), K1)
    order = (0, 1) + tuple(new)
    th = specification(g, 0b11, order)
    dom = theta_domain(2)
    expect = set()
    for i, s in enumerate(dom):
        trip = tuple(order[c - 1] for c in s)
        outside = set(range(g.n)) - {0, 1} - set(new)
        if brute_extensions(g, trip, K1, outside):
            expect.add(s)
    assert {dom[i] for i in range(len(dom)) if (th >> i) & 1} == expect
    assert expect == {(3, 4, 5), (5, 4, 3)}


def test_specification_checks_order():
    with pytest.raises(ValueError):
        specification(Graph.empty(5), 0b11, (0, 1, 2, 2, 3))


# connected subsets ----------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=8), st.integers(1, 5))
def test_connected_subsets_complete_and_unique(g, size):
    got = list(connected_subsets(g, g.full_mask, size))
    assert len(got) == len(set(got))
    expect = {
        mask_of(c)
        for r in range(1, size + 1)
        for c in combinations(range(g.n), r)
        if g.is_connected_on(mask_of(c))
    }
    assert set(got) == expect


# bad subgraphs --------------------------------------------------------------------


def test_member_copy_is_bad(reduced_registry):
    m = _member(reduced_registry, 1, 7)
    g, _ = disjoint_union(m, Graph.path(3))
    bad = find_u_bad(g, 0, reduced_registry)
    assert [b.vertices for b in bad] == [m.full_mask]
    assert 1 in bad[0].layers


def test_only_the_larger_member_is_bad(reduced_registry):
    m = next(x for x in reduced_registry.layers[1] if x.chain[0] < x.graph.n)
    inner = (1 << m.chain[0]) - 1
    assert reduced_registry.contains(*_induced(m.graph, inner))
    bad = find_u_bad(m.graph, 0, reduced_registry)
    assert [b.vertices for b in bad] == [m.graph.full_mask]


def _induced(g, mask):
    from fo4lab.graphs import induced_subgraph

    sub, old = induced_subgraph(g, mask)
    return sub, old.index(0)


def test_no_member_gives_empty_family(reduced_registry):
    g = Graph.path(6)
    bad = find_u_bad(g, 0, reduced_registry)
    assert bad == []
    assert zero_neighbourhood(g, 0, bad) == g.full_mask


def test_u_bad_matches_brute_force(reduced_registry):
    rng = random.Random(11)
    checked = 0
    for _ in range(10):
        g = sparse_random_graph(rng, 5, 7)
        for u in range(g.n):
            got = {frozenset(bits(b.vertices)) for b in find_u_bad(g, u, reduced_registry)}
            assert got == brute_u_bad(g, u, reduced_registry)
            checked += bool(got)
    assert checked > 0


def test_bad_subgraphs_meet_only_at_u_lazy_family():
    family = GSetOracle(GSetParams.reduced())
    rng = random.Random(5)
    for _ in range(8):
        g = sparse_random_graph(rng, 6, 10)
        for u in range(g.n):
            bad = find_u_bad(g, u, family)
            for b1, b2 in combinations(bad, 2):
                assert b1.vertices & b2.vertices == 1 << u


# profiles -------------------------------------------------------------------------


def test_profile_without_bad_subgraphs_is_empty(reduced_registry):
    table = profile(Graph.path(5), 2, reduced_registry)
    assert table.bad == () and table.profiles == {}
    assert table.u0 == Graph.path(5).full_mask


def test_profile_of_bare_member(reduced_registry):
    m = _member(reduced_registry, 0, 3)
    table = profile(m, 0, reduced_registry)
    assert len(table.bad) == 1
    assert list(table.profiles.values()) == [frozenset({((), ())})]
    assert table.u0 == 0


def test_profile_records_k2_extension(reduced_registry):
    m = _member(reduced_registry, 0, 3)
    g, new = plant(m, (0, 1), K2)
    table = profile(g, 0, reduced_registry)
    assert len(table.bad) == 1 and table.bad[0].vertices == m.full_mask
    (vec,) = table.vectors
    t1, t2 = vec
    assert t1 == ()
    # the template is symmetric in its roots, so both root orders appear
    assert sorted(idx for idx, _ in t2) == [(1, 2), (2, 1)]
    assert all(thetas == (0,) for _, thetas in t2)
    assert table.u0 == mask_of(new)


def test_profiles_transported_by_isomorphism(reduced_registry):
    m = _member(reduced_registry, 1, 3)
    g, new = plant(m, (0, 1, 2), K1)
    g, _ = plant(g, tuple(new), K1)
    rng = random.Random(2)
    for _ in range(3):
        perm = list(range(g.n))
        rng.shuffle(perm)
        h = g.relabel(perm)
        assert profile(h, perm[0], reduced_registry).profiles == profile(g, 0, reduced_registry).profiles


def test_profiles_equal_under_automorphism(reduced_registry):
    m = _member(reduced_registry, 0, 5)
    g, _ = plant(m, (0, 2), K2)
    g, _ = plant(g, (0, 2), K2)
    double, offsets = disjoint_union(g, g)
    a = profile(double, offsets[0], reduced_registry)
    b = profile(double, offsets[1], reduced_registry)
    assert a.profiles == b.profiles and a.profiles


def test_format_profile_lines(reduced_registry):
    m = _member(reduced_registry, 0, 3)
    g, _ = plant(m, (0, 1), K2)
    text = format_profile(profile(g, 0, reduced_registry))
    lines = text.splitlines()
    assert lines[0] == "vertex u=0"
    assert lines[1].startswith("zero u0=")
    assert any(ln.startswith("bad member=") for ln in lines)
    assert any(ln.startswith("entry member=") for ln in lines)
    assert any(ln.startswith("  spec j=2 tuple=") and ln.endswith("thetas=0") for ln in lines)


# tick neighbourhoods ----------------------------------------------------------------


def test_kt_star_examples():
    g = Graph.path(3)
    assert kt_star_neighbourhood(g, 0b101, order=1) == 0b111
    chain = Graph.from_edges(5, [(0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)])
    assert kt_star_neighbourhood(chain, 0b11, order=1) == 0b111
    assert kt_star_neighbourhood(chain, 0b11) == 0b11111
    assert kt_star_neighbourhood(Graph.path(4), 0b0011) == 0b0011
    with pytest.raises(ValueError):
        kt_star_neighbourhood(g, 0)


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=10), st.data())
def test_kt_star_monotone_with_fixpoint(g, data):
    if g.n == 0:
        return
    seed = mask_of(data.draw(st.lists(st.integers(0, g.n - 1), min_size=1, max_size=3)))
    prev = seed
    for k in range(g.n + 1):
        w = kt_star_neighbourhood(g, seed, order=k)
        assert w & prev == prev
        prev = w
    assert kt_star_neighbourhood(g, seed, order=g.n) == kt_star_neighbourhood(g, seed)


# template maximality ----------------------------------------------------------------


def test_kt_maximal_without_copies():
    g = Graph.path(4)
    ok, witness = kt_maximal(g, 0b0111, 0b0001, TICK)
    assert ok and witness is None


def test_kt_maximal_detects_planted_tick():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (1, 3), (2, 3)])
    ok, witness = kt_maximal(g, 0b0111, 0b0001, TICK)
    assert not ok
    assert set(witness.t_tilde) == {1, 2} and witness.k_tilde == (3,)


def test_kt_maximal_ignores_extensions_touching_the_rest():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (1, 3), (2, 3), (0, 3)])
    ok, _ = kt_maximal(g, 0b0111, 0b0001, TICK)
    assert ok


def test_kt_maximal_needs_a_root_outside_h():
    # the tick over {0, 1} lies entirely inside H~ and does not count
    g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 3), (1, 3)])
    assert kt_maximal(g, 0b0111, 0b0011, TICK)[0]
    assert not kt_maximal(g, 0b0111, 0b0001, TICK)[0]


# witness graphs ---------------------------------------------------------------------


def test_witness_for_empty_profile(reduced_registry):
    res = build_witness(Graph.path(4), 0, reduced_registry)
    assert res.z.n == 1 and res.copies == ()
    assert res.same_profiles and res.sparse


def test_witness_for_bare_member(reduced_registry):
    m = _member(reduced_registry, 1, 11)
    g, _ = disjoint_union(m, Graph.path(2))
    res = build_witness(g, 0, reduced_registry)
    assert rooted_canonical_form(res.z, 0) == rooted_canonical_form(m, 0)
    assert res.same_profiles and res.copies_are_bad


def test_witness_for_k2_with_zero_specification(reduced_registry):
    m = _member(reduced_registry, 0, 3)
    g, _ = plant(m, (0, 1), K2)
    res = build_witness(g, 0, reduced_registry)
    assert res.z.n == m.n + 3
    assert res.same_profiles and res.copies_are_bad and res.sparse


def test_witness_rejects_dense_source(reduced_registry):
    with pytest.raises(HypothesisError):
        build_witness(Graph.complete(5), 0, reduced_registry)


def test_witness_realises_layered_fixtures(reduced_registry):
    rng = random.Random(3)
    built = 0
    for layer in (0, 1, 2):
        for idx in rng.sample(range(len(reduced_registry.layers[layer])), 3):
            m = reduced_registry.layers[layer][idx].graph
            g, new = plant(m, (0, 1, 2), K1)
            g, _ = plant(g, tuple(new), K1)
            if rho_max_flow(g) >= Fraction(5, 3):
                continue
            res = build_witness(g, 0, reduced_registry)
            assert res.sparse and res.same_profiles and res.copies_are_bad
            built += 1
    assert built >= 5


def test_witness_with_two_members_at_root(reduced_registry):
    from fo4lab.gset import merge_at_root

    a = _member(reduced_registry, 0, 0)
    b = _member(reduced_registry, 1, 20)

    g, _, mb = merge_at_root(a, 0, b, 0)
    g, _ = plant(g, (0, mb[1]), K2)
    assert rho_max_flow(g) < Fraction(5, 3)
    res = build_witness(g, 0, reduced_registry)
    assert len(res.copies) == len(res.source.bad) == 2
    assert res.sparse and res.same_profiles and res.copies_are_bad
    assert popcount(res.copies[0] & res.copies[1]) == 1
