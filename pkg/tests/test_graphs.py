import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fo4lab.graphs import (
    Graph,
    RootedPair,
    VertexMap,
    attach,
    bits,
    disjoint_union,
    from_graph6,
    induced_subgraph,
    is_extension,
    mask_of,
    read_rooted,
    to_dot,
    to_graph6,
    write_rooted,
)


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for v in range(n) for u in range(v)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph.from_edges(n, chosen)


def test_constructors():
    assert Graph.complete(4).num_edges == 6
    assert Graph.path(4).edges() == [(0, 1), (1, 2), (2, 3)]
    assert Graph.cycle(5).num_edges == 5
    assert Graph.star(3).degree(0) == 3
    assert Graph.empty(3).num_edges == 0


def test_validation():
    with pytest.raises(ValueError):
        Graph(2, (2, 0))
    with pytest.raises(ValueError):
        Graph(1, (1,))
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 2)])
    with pytest.raises(ValueError):
        Graph.cycle(2)


def test_bit_helpers():
    assert bits(0b10110) == [1, 2, 4]
    assert mask_of([1, 2, 4]) == 0b10110


def test_induced_subgraph_keeps_order():
    g = Graph.cycle(5)
    sub, old = induced_subgraph(g, [4, 0, 1])
    assert old == [0, 1, 4]
    assert sub.edges() == [(0, 1), (0, 2)]


def test_connectivity_and_components():
    g = Graph.from_edges(5, [(0, 1), (2, 3)])
    assert not g.is_connected_on(g.full_mask)
    assert g.is_connected_on(0b0011)
    assert g.component_of(2, g.full_mask) == 0b1100


def test_rooted_pair_counts():
    pair = RootedPair.of(Graph.complete(4), [0, 1])
    assert (pair.v_ext, pair.e_ext) == (2, 5)
    assert pair.h_graph().num_edges == 1


def test_vertex_map():
    p3 = Graph.path(3)
    k3 = Graph.complete(3)
    assert VertexMap(p3, k3, (0, 1, 2)).preserves_edges()
    assert not VertexMap(p3, k3, (0, 1, 2)).is_induced_isomorphism()
    with pytest.raises(ValueError):
        VertexMap(p3, k3, (0, 0, 1))


def test_is_extension_strict_and_generalised():
    # pattern: root 0 with a pendant vertex 1
    pat = Graph.from_edges(2, [(0, 1)])
    host = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert is_extension(pat, 1, host, [0, 1], strict=True)
    # two roots merged into one host vertex
    pat2 = Graph.from_edges(3, [(2, 0), (2, 1)])
    assert is_extension(pat2, 2, host, [1, 1, 0], generalised=True, strict=True)
    assert not is_extension(pat2, 2, host, [1, 1, 0])
    # an extra host edge breaks strictness only
    tri = Graph.complete(3)
    assert is_extension(pat, 1, tri, [0, 1])
    assert is_extension(pat2, 2, tri, [0, 1, 2], strict=True)


def test_disjoint_union_and_attach():
    g, offs = disjoint_union(Graph.complete(3), Graph.path(2))
    assert offs == [0, 3] and g.num_edges == 4
    h, new = attach(Graph.path(2), 1, [(2, 0), (2, 1)])
    assert new == [2] and h.num_edges == 3


def test_graph6_known_strings():
    assert to_graph6(Graph.complete(4)) == "C~"
    assert to_graph6(Graph.empty(0)) == "?"
    assert from_graph6(">>graph6<<Bw") == Graph.complete(3)
    with pytest.raises(ValueError):
        from_graph6("C~~")


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=70))
def test_graph6_matches_networkx(g):
    ng = nx.Graph()
    ng.add_nodes_from(range(g.n))
    ng.add_edges_from(g.edges())
    ours = to_graph6(g)
    theirs = nx.to_graph6_bytes(ng, header=False).decode().strip()
    assert ours == theirs
    assert from_graph6(ours) == g


@settings(max_examples=100, deadline=None)
@given(graphs(), st.randoms())
def test_relabel_preserves_structure(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    assert h.num_edges == g.num_edges
    assert all(h.has_edge(perm[u], perm[v]) for u, v in g.edges())


def test_rooted_io_roundtrip():
    text = write_rooted(Graph.cycle(4), 2)
    assert read_rooted(text) == (Graph.cycle(4), 2)
    with pytest.raises(ValueError):
        read_rooted("C~\n9\n")


def test_dot_marks_root():
    out = to_dot(Graph.path(2), root=1)
    assert "1 [shape=doublecircle];" in out and "0 -- 1;" in out
