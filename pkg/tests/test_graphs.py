import pytest

from tropocone.graphs import (
    BadInvolution,
    LoopContraction,
    MarkingNotBijective,
    UnstableParameters,
    canonical_form,
    circuits,
    contract,
    contract_set,
    enumerate_category,
    graph_new,
    is_forest,
    st_join,
    star_tree,
    trivalent_trees,
)
from tropocone.moduli import (
    TooFewMarks,
    build_moduli,
    cone_of_metrics,
    distance_structure,
    leg_side_of_edge,
    tree_distance_matrix,
)
from tropocone.complexes import validate_linear
from tropocone.intlinalg import IntMatrix, is_zero_vec, vadd, vscale


def theta_graph():
    # flags AB1..3 = 0..2, BA1..3 = 3..5, A = 6, B = 7
    root = [6, 6, 6, 7, 7, 7, 6, 7]
    inv = [3, 4, 5, 0, 1, 2, 6, 7]
    return graph_new(8, root, inv, {})


def two_cycle_graph():
    root = [4, 5, 4, 5, 4, 5]
    inv = [1, 0, 3, 2, 4, 5]
    return graph_new(6, root, inv, {})


def test_theta_graph_shape():
    g = theta_graph()
    assert len(g.vertices()) == 2
    assert len(g.edges()) == 3
    assert g.genus() == 2
    assert g.legs() == []
    assert g.connected()


def test_bad_involution():
    with pytest.raises(BadInvolution):
        graph_new(3, [2, 2, 2], [1, 2, 0], {})


def test_marking_must_cover_legs():
    # single vertex with one leg: valid only when the leg is marked
    g = graph_new(2, [1, 1], [0, 1], {"a": 0})
    assert g.legs() == [0]
    with pytest.raises(MarkingNotBijective):
        graph_new(2, [1, 1], [0, 1], {})


def test_contract_theta_edge_gives_figure_eight():
    g = theta_graph()
    e = g.edges()[0]
    h, _ = contract(g, e)
    assert len(h.vertices()) == 1
    assert len(h.edges()) == 2
    assert h.genus() == 2
    assert all(h.is_loop(e) for e in h.edges())


def test_contract_loop_raises():
    g = theta_graph()
    h, _ = contract(g, g.edges()[0])
    with pytest.raises(LoopContraction):
        contract(h, h.edges()[0])


def test_contract_order_independence():
    g = theta_graph()
    e1, e2 = g.edges()[0], g.edges()[1]
    a, m1 = contract(g, e1)
    b, m2 = contract(g, e2)
    # contracting the second edge of each (it became a loop in both, so use
    # the surviving non-loop edges on a 4-leg tree instead)
    t = trivalent_trees(["1", "2", "3", "4", "5"])[0]
    es = [e for e in t.edges()]
    a, _ = contract_set(t, [es[0], es[1]])
    b, _ = contract_set(t, [es[1], es[0]])
    assert canonical_form(a)[0].encoding() == canonical_form(b)[0].encoding()


def test_aut_theta():
    _, _, autos = canonical_form(theta_graph())
    assert len(autos) == 12


def test_aut_two_cycle():
    _, _, autos = canonical_form(two_cycle_graph())
    assert len(autos) == 4


def test_aut_marked_tree_trivial():
    for t in trivalent_trees(["1", "2", "3", "4"]):
        _, _, autos = canonical_form(t)
        assert len(autos) == 1


def test_canonical_invariance_under_relabeling():
    import random
    rng = random.Random(5)
    g = theta_graph()
    base = canonical_form(g)[0].encoding()
    for _ in range(10):
        perm = list(range(g.nflags))
        rng.shuffle(perm)
        root = [0] * g.nflags
        inv = [0] * g.nflags
        for x in range(g.nflags):
            root[perm[x]] = perm[g.root[x]]
            inv[perm[x]] = perm[g.inv[x]]
        h = graph_new(g.nflags, root, inv, {})
        assert canonical_form(h)[0].encoding() == base


def test_trivalent_tree_counts():
    # (2n-5)!! oracle
    assert len(trivalent_trees(["1", "2", "3"])) == 1
    assert len(trivalent_trees(["1", "2", "3", "4"])) == 3
    assert len(trivalent_trees(["1", "2", "3", "4", "5"])) == 15
    assert len(trivalent_trees(list("123456"))) == 105


def test_enumerate_category_04():
    cat = enumerate_category(0, ["1", "2", "3", "4"])
    assert len(cat.classes) == 4
    assert len(cat.maximal) == 3


def test_enumerate_category_12():
    cat = enumerate_category(1, ["1", "2"])
    assert len(cat.classes) == 3


def test_enumerate_category_21():
    cat = enumerate_category(2, ["1"])
    assert len(cat.classes) == 7
    assert len(cat.maximal) == 3


def test_enumerate_category_2_empty():
    cat = enumerate_category(2, [])
    assert len(cat.classes) == 3
    # theta and dumbbell are the trivalent (3-edge) objects; the figure
    # eight (one vertex, two loops) is their common contraction
    assert len(cat.maximal) == 2
    sizes = sorted(len(rep.edges()) for rep in cat.classes.values())
    assert sizes == [2, 3, 3]


def test_enumerate_category_unstable():
    with pytest.raises(UnstableParameters):
        enumerate_category(0, ["1", "2"])
    with pytest.raises(UnstableParameters):
        enumerate_category(1, [])


def test_st_join_genus():
    for t in trivalent_trees(["g1", "g1*", "g2", "g2*"]):
        g = st_join(t, 2)
        assert g.genus() == 2
        assert g.connected()
        assert g.legs() == []


def test_circuits_and_forests():
    g = theta_graph()
    cs = circuits(g)
    # three 2-edge circuits in the theta graph
    assert len(cs) == 3
    assert all(len(c) == 2 for c in cs)
    es = g.edges()
    assert is_forest(g, [es[0]])
    assert not is_forest(g, [es[0], es[1]])


def test_cone_of_metrics_two_cycle():
    c = cone_of_metrics(two_cycle_graph())
    assert c.rank == 2
    assert not c.contains((0, 0))
    assert c.contains((1, 0)) and c.contains((0, 1))


def test_cone_of_metrics_loop_graph():
    # one vertex with a loop, one edge to a leg-carrying vertex
    # flags: loop 0,1; edge 2,3; legs 4,5; vertices 6,7
    root = [6, 6, 6, 7, 7, 7, 6, 7]
    inv = [1, 0, 3, 2, 4, 5, 6, 7]
    g = graph_new(8, root, inv, {"1": 4, "2": 5})
    c = cone_of_metrics(g)
    assert c.rank == 2
    # the loop coordinate is strict, the edge coordinate is closed
    strict_count = sum(1 for _, s in c.facets if s)
    assert strict_count == 1
    assert len(c.facets) == 2


def test_cone_of_metrics_tree_closed():
    t = trivalent_trees(["1", "2", "3", "4"])[0]
    c = cone_of_metrics(t)
    assert c.is_closed()
    assert c.rank == 1


def test_distance_structure_m03_point():
    data = distance_structure(["1", "2", "3"])
    assert data.rank == 0
    with pytest.raises(TooFewMarks):
        distance_structure(["1", "2"])


def test_distance_structure_m04():
    data = distance_structure(["1", "2", "3", "4"])
    assert data.rank == 2
    v12 = data.split_in_basis(("1", "2"))
    v13 = data.split_in_basis(("1", "3"))
    v14 = data.split_in_basis(("1", "4"))
    assert is_zero_vec(vadd(vadd(v12, v13), v14))
    # raw 6-coordinate check: v12 separates 13,14,23,24
    raw = data.split_vector(("1", "2"))
    expect = {("1", "3"): 1, ("1", "4"): 1, ("2", "3"): 1, ("2", "4"): 1,
              ("1", "2"): 0, ("3", "4"): 0}
    assert raw == tuple(expect[p] for p in data.pairs)


def test_distance_structure_m05():
    data = distance_structure(["1", "2", "3", "4", "5"])
    # (2^5 - 2 - 10)/2 = 10 splits; lattice rank C(5,2) - 5 = 5
    count = 0
    from itertools import combinations
    for r in (2, 3):
        for side in combinations(data.labels, r):
            if data.labels[0] in side:
                continue
            count += 1
    assert count == 10
    assert data.rank == 5


def test_build_moduli_04():
    m = build_moduli(0, ["1", "2", "3", "4"])
    phi = m.complex
    assert sorted(phi.dim(p) for p in phi.ids()) == [0, 1, 1, 1]
    assert validate_linear(phi, m.linear)
    origin = phi.classes(0)[0]
    assert len(phi.above(origin)) == 3


def test_build_moduli_05_shape():
    m = build_moduli(0, ["1", "2", "3", "4", "5"])
    phi = m.complex
    dims = [phi.dim(p) for p in phi.ids()]
    assert dims.count(2) == 15
    assert dims.count(1) == 10
    assert dims.count(0) == 1
    assert phi.is_pure(2)


def test_build_moduli_12_space():
    m = build_moduli(1, ["1", "2"])
    assert len(m.space.objects) == 3


def test_leg_side():
    t = trivalent_trees(["1", "2", "3", "4"])[0]
    e = t.edges()[0]
    side = leg_side_of_edge(t, e)
    assert 0 < len(side) < 4


def test_moduli_04_skeleton_origin():
    from tropocone.complexes import skeleton
    m = build_moduli(0, ["1", "2", "3", "4"])
    sk = skeleton(m.complex, 0)
    assert len(sk.ids()) == 1
    assert sk.dim(sk.ids()[0]) == 0
