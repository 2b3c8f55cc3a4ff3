import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbresonance import (
    BoundaryCylinder,
    ResonantState,
    deck_transform,
    edge_poisson_transform,
    eigensolve,
    generate_named,
    hashimoto,
    horocycle_bracket,
    lift_state,
    measure_from_state,
    poisson_kernel,
    poisson_transform,
    root_automorphism,
    unfold,
    unique_path,
    vertex_pushforward,
)
from nbresonance.errors import (
    CoverError,
    DepthTooSmall,
    EigenResidualTooLarge,
    GeodesicLeavesTruncation,
    InsideSn,
    InvalidTarget,
    OrientationMismatch,
)
from nbresonance.tree_cover import (
    additivity_residual,
    child_cylinders,
    distance_to_geodesic,
    frontier_cylinder,
    s_n_contains,
    tree_eigen_residual,
)

from conftest import ones_state

K4 = generate_named("complete", 4)
PETERSEN = generate_named("petersen")
K5 = generate_named("complete", 5)


def as_nx(cov):
    return nx.Graph([(int(cov.parent[c]), c) for c in range(1, cov.n_nodes)])


def leaves_in(cov, T, omega):
    """Frontier leaves reached by leaving tail(omega) through head(omega)."""
    t, h = cov.tail(omega.edge), cov.head(omega.edge)
    out = []
    for l in cov.leaves:
        path = nx.shortest_path(T, t, int(l))
        if len(path) > 1 and path[1] == h:
            out.append(int(l))
    return out


def brute_bracket(cov, T, x, leaf):
    p_root = nx.shortest_path(T, 0, leaf)
    p_x = nx.shortest_path(T, x, leaf)
    on_root = set(p_root)
    y = next(v for v in p_x if v in on_root)
    return nx.shortest_path_length(T, 0, y) - nx.shortest_path_length(T, x, y)


def state(g, k=0, orientation="+", seed=0):
    entries = [e for e in eigensolve(hashimoto(g)) if not e.defect_flag]
    e = entries[k % len(entries)]
    basis = e.right_basis if orientation == "+" else e.left_basis
    coeff = np.random.default_rng(seed).standard_normal(basis.shape[1])
    return ResonantState(g, orientation, e.z, basis @ coeff)


@pytest.mark.parametrize(
    "g, D, expected",
    [(K4, 3, 22), (generate_named("cycle", 3), 4, 9), (K4, 5, 94), (K5, 3, 53), (PETERSEN, 2, 10)],
)
def test_node_counts(g, D, expected):
    cov = unfold(g, 0, D)
    assert cov.n_nodes == expected
    cov.validate()
    T = as_nx(cov)
    assert nx.is_tree(T)
    assert len(cov.leaves) == sum(1 for x in range(cov.n_nodes) if nx.shortest_path_length(T, 0, x) == D)


@pytest.mark.parametrize("g", [K4, PETERSEN, K5], ids=lambda g: g.source)
@pytest.mark.parametrize("base", [0, 1])
def test_depth2_projections(g, base):
    cov = unfold(g, base, 2)
    cov.validate()
    assert cov.vertex[0] == base
    T = as_nx(cov)
    for a, b in T.edges:
        # adjacent tree nodes project to adjacent base vertices
        assert g.adjacency()[cov.vertex[a], cov.vertex[b]] == 1


def test_unfold_errors():
    with pytest.raises(DepthTooSmall):
        unfold(K4, 0, 1)
    with pytest.raises(CoverError):
        unfold(K4, 9, 3)


def test_subtrees_contiguous():
    cov = unfold(PETERSEN, 3, 4)
    T = as_nx(cov)
    for c in range(1, cov.n_nodes):
        desc = nx.descendants(nx.bfs_tree(T, 0), c) | {c}
        assert desc == set(range(c, cov.subtree_end[c]))


def test_bracket_examples():
    cov = unfold(K4, 0, 5)
    leaf = int(cov.leaves[7])
    omega = frontier_cylinder(cov, leaf)
    path = [0]
    while path[-1] != leaf:
        path.append(next(c for c in cov.children[path[-1]] if c <= leaf < cov.subtree_end[c]))
    assert horocycle_bracket(cov, 0, omega) == 0
    for k, x in enumerate(path):
        assert horocycle_bracket(cov, x, omega) == k
    off = [c for c in cov.children[0] if c != path[1]]
    for x in off:
        assert horocycle_bracket(cov, x, omega) == -1
        assert poisson_kernel(2, cov, x, omega) == pytest.approx(0.5)
    assert poisson_kernel(2, cov, 0, omega) == 1
    assert poisson_kernel(2, cov, path[3], omega) == pytest.approx(8)


@pytest.mark.parametrize("g, D", [(K4, 4), (K5, 3)], ids=["K4", "K5"])
def test_bracket_matches_definition(g, D):
    cov = unfold(g, 0, D)
    T = as_nx(cov)
    for l in cov.leaves:
        omega = frontier_cylinder(cov, int(l))
        for x in range(cov.n_nodes):
            assert horocycle_bracket(cov, x, omega) == brute_bracket(cov, T, x, int(l))


def test_bracket_on_coarse_cylinders():
    cov = unfold(K4, 0, 4)
    T = as_nx(cov)
    for c in range(1, cov.n_nodes):
        omega = BoundaryCylinder(cov.away_edge(c))
        inside = leaves_in(cov, T, omega)
        for x in range(cov.n_nodes):
            vals = {brute_bracket(cov, T, x, l) for l in inside}
            if len(vals) == 1:
                assert horocycle_bracket(cov, x, omega) == vals.pop()
            else:
                # x sits strictly inside the subtree the cylinder hangs from
                with pytest.raises(CoverError):
                    horocycle_bracket(cov, x, omega)


def test_child_cylinders_partition():
    cov = unfold(PETERSEN, 0, 4)
    T = as_nx(cov)
    for c in range(1, cov.n_nodes):
        if not cov.is_interior(c):
            continue
        omega = BoundaryCylinder(cov.away_edge(c))
        kids = child_cylinders(cov, omega)
        assert len(kids) == PETERSEN.q
        parts = [leaves_in(cov, T, k) for k in kids]
        assert sorted(itertools.chain(*parts)) == sorted(leaves_in(cov, T, omega))


def test_measure_examples():
    cov = unfold(K4, 0, 3)
    u = ones_state(K4, "+")
    mu = measure_from_state(cov, u)
    assert np.allclose(mu.values, 0.25)
    depth1 = cov.children[0][0]
    # tail at depth 1: q frontier cylinders of mass 1/4
    depth2 = cov.children[depth1][0]
    assert mu.mass(BoundaryCylinder(cov.away_edge(depth2))) == pytest.approx(0.5)
    assert mu.mass(BoundaryCylinder(cov.away_edge(depth1))) == pytest.approx(1.0)
    mu3 = measure_from_state(cov, u.scaled(3))
    assert np.allclose(mu3.values, 3 * mu.values)


def test_measure_errors():
    cov = unfold(K4, 0, 4)
    with pytest.raises(OrientationMismatch):
        measure_from_state(cov, ones_state(K4, "-"))
    bad = ResonantState(K4, "+", 2, np.r_[np.ones(11), 1.5])
    with pytest.raises(EigenResidualTooLarge):
        measure_from_state(cov, bad)
    mu = measure_from_state(cov, bad, check=False)
    assert additivity_residual(cov, mu, bad) > 0.1
    with pytest.raises(CoverError):
        measure_from_state(cov, ones_state(PETERSEN, "+"))


@pytest.mark.parametrize("g", [K4, PETERSEN], ids=lambda g: g.source)
@pytest.mark.parametrize("k", [0, 3, 7, 12])
def test_poisson_identities(g, k):
    cov = unfold(g, 0, 5)
    u = state(g, k)
    z = u.z
    mu = measure_from_state(cov, u)
    P = poisson_transform(z, cov, mu)
    Pe = edge_poisson_transform(z, cov, mu)
    lifted = lift_state(cov, u)
    scale = 10 * max(1, np.max(np.abs(u.edge_values)))
    # round trip on every tree edge
    assert np.max(np.abs(Pe - lifted)) <= 1e-10 * scale
    for x in cov.interior_nodes():
        assert abs(P[x] - sum(Pe[t] for t in cov.out_tree_edges(x))) <= 1e-10 * scale
        nb = sum(P[y] for y in cov.neighbors(x))
        assert abs(nb - (z + g.q / z) * P[x]) <= 1e-9 * scale
    vp = vertex_pushforward(u)
    assert np.max(np.abs(P - vp[cov.vertex])) <= 1e-10 * scale


def test_poisson_brute_force():
    cov = unfold(K4, 1, 4)
    T = as_nx(cov)
    u = state(K4, 5)
    mu = measure_from_state(cov, u)
    P = poisson_transform(u.z, cov, mu)
    for x in range(0, cov.n_nodes, 3):
        expect = sum(u.z ** brute_bracket(cov, T, x, int(l)) * m for l, m in zip(cov.leaves, mu.values))
        assert abs(P[x] - expect) <= 1e-12 * max(1, abs(expect))


def test_poisson_k4_root_value():
    cov = unfold(K4, 0, 4)
    mu = measure_from_state(cov, ones_state(K4, "+"))
    assert poisson_transform(2, cov, mu)[0] == pytest.approx(3)


@pytest.mark.parametrize("g", [K4, PETERSEN], ids=lambda g: g.source)
def test_stable_under_deeper_truncation(g):
    u = state(g, 4)
    a, b = unfold(g, 0, 4), unfold(g, 0, 5)
    Pa = poisson_transform(u.z, a, measure_from_state(a, u))
    Pb = poisson_transform(u.z, b, measure_from_state(b, u))
    Ea = edge_poisson_transform(u.z, a, measure_from_state(a, u))
    Eb = edge_poisson_transform(u.z, b, measure_from_state(b, u))
    for x, path in enumerate(a.paths):
        y = b.node(path)
        assert abs(Pa[x] - Pb[y]) <= 1e-12 * 10
        if x:
            assert abs(Ea[a.away_edge(x)] - Eb[b.away_edge(y)]) <= 1e-12 * 10
            assert abs(Ea[a.toward_edge(x)] - Eb[b.toward_edge(y)]) <= 1e-12 * 10
        for l in a.leaves:
            om_a = frontier_cylinder(a, int(l))
            om_b = BoundaryCylinder(b.away_edge(b.node(a.paths[int(l)])))
            assert horocycle_bracket(a, x, om_a) == horocycle_bracket(b, y, om_b)


def test_lift_state():
    cov = unfold(PETERSEN, 2, 5)
    assert np.all(lift_state(cov, ones_state(PETERSEN, "+")) == 1)
    for k in range(0, 30, 4):
        u = state(PETERSEN, k)
        assert tree_eigen_residual(cov, lift_state(cov, u), u.z) <= 1e-12 * 10


def test_deck_transform_identity():
    cov = unfold(K4, 0, 4)
    ident = deck_transform(cov, 0, {int(e): int(e) for e in K4.out_edges[0]})
    assert ident.domain == list(range(cov.n_nodes))
    assert all(ident(x) == x for x in ident.domain)


@pytest.mark.parametrize("g", [K4, PETERSEN], ids=lambda g: g.source)
def test_deck_transforms_commute_with_projection(g):
    cov = unfold(g, 0, 5)
    T = as_nx(cov)
    targets = [x for x in range(1, cov.n_nodes) if cov.vertex[x] == 0]
    assert targets
    u = state(g, 6)
    lifted = lift_state(cov, u)
    for t in targets:
        gamma = deck_transform(cov, t)
        assert gamma(0) == t
        dom = gamma.domain
        for x in dom:
            assert cov.vertex[gamma(x)] == cov.vertex[x]
        for a, b in T.edges:
            if a in gamma.mapping and b in gamma.mapping:
                assert T.has_edge(gamma(a), gamma(b))
                te = cov.edge_between(a, b)
                assert cov.edge_label[gamma.map_edge(te)] == cov.edge_label[te]
                assert lifted[gamma.map_edge(te)] == lifted[te]


def test_deck_transform_errors():
    cov = unfold(K4, 0, 4)
    wrong = next(x for x in range(cov.n_nodes) if cov.vertex[x] != 0)
    with pytest.raises(InvalidTarget):
        deck_transform(cov, wrong)
    e = [int(x) for x in K4.out_edges[0]]
    with pytest.raises(InvalidTarget):
        deck_transform(cov, 0, {e[0]: e[1], e[1]: e[0], e[2]: e[2]})


def test_root_automorphism_is_automorphism():
    cov = unfold(PETERSEN, 0, 5)
    T = as_nx(cov)
    assert all(root_automorphism(cov, identity=True)(x) == x for x in range(cov.n_nodes))
    for s in range(5):
        k = root_automorphism(cov, seed=s)
        perm = [k(x) for x in range(cov.n_nodes)]
        assert sorted(perm) == list(range(cov.n_nodes)) and perm[0] == 0
        assert all(T.has_edge(k(a), k(b)) for a, b in T.edges)


@pytest.mark.parametrize("seed", range(0, 100, 9))
def test_horocycle_invariance_direct(seed):
    cov = unfold(K4, 0, 4)
    k = root_automorphism(cov, seed=seed)
    for c in range(1, cov.n_nodes):
        omega = BoundaryCylinder(cov.away_edge(c))
        assert horocycle_bracket(cov, k(0), k.map_cylinder(omega)) == 0
        for x in range(0, cov.n_nodes, 5):
            try:
                before = horocycle_bracket(cov, x, omega)
            except CoverError:
                continue
            assert horocycle_bracket(cov, k(x), k.map_cylinder(omega)) == before


# -- cutoff geometry -------------------------------------------------------

COV = unfold(K4, 0, 6)
COV_T = as_nx(COV)


_GEO_CACHE = {}


def _dist_matrix(cov, T):
    key = ("dist", id(cov))
    if key not in _GEO_CACHE:
        n = cov.n_nodes
        Dm = np.zeros((n, n), dtype=int)
        for a, row in nx.all_pairs_shortest_path_length(T):
            for b, d in row.items():
                Dm[a, b] = d
        _GEO_CACHE[key] = Dm
    return _GEO_CACHE[key]


def brute_geodesic_distances(cov, T, om1, om2):
    """Distance of every node to each leaf-to-leaf geodesic through the two cylinders,
    as an array of shape (pairs, nodes)."""
    key = (id(cov), om1.edge, om2.edge)
    if key not in _GEO_CACHE:
        Dm = _dist_matrix(cov, T)
        rows = []
        for l1 in leaves_in(cov, T, om1):
            for l2 in leaves_in(cov, T, om2):
                rows.append(Dm[:, nx.shortest_path(T, l1, l2)].min(axis=1))
        _GEO_CACHE[key] = np.array(rows)
    return _GEO_CACHE[key]


def brute_geodesic_distance(cov, T, x, om1, om2):
    col = brute_geodesic_distances(cov, T, om1, om2)[:, x]
    assert np.all(col == col[0])
    return int(col[0])


def cylinder_pairs(cov):
    cyl = [BoundaryCylinder(cov.away_edge(c)) for c in range(1, cov.n_nodes) if cov.node_depth[c] == 2]
    return [(a, b) for a, b in itertools.combinations(cyl, 2)][::5]


def outside(cov, x, om):
    return x == cov.head(om.edge) or not cov.in_half_tree(x, om.edge)


@pytest.mark.parametrize("pair", range(len(cylinder_pairs(COV))))
def test_distance_to_geodesic_brute(pair):
    om1, om2 = cylinder_pairs(COV)[pair]
    for x in range(0, COV.n_nodes, 7):
        if not (outside(COV, x, om1) and outside(COV, x, om2)):
            with pytest.raises(GeodesicLeavesTruncation):
                distance_to_geodesic(COV, x, om1, om2)
            continue
        d = brute_geodesic_distance(COV, COV_T, x, om1, om2)
        assert distance_to_geodesic(COV, x, om1, om2) == d
        for n in range(0, 4):
            assert s_n_contains(COV, x, om1, om2, n) == (d <= n)


def test_on_geodesic():
    om1, om2 = cylinder_pairs(COV)[0]
    for x in COV.path_nodes(COV.head(om1.edge), COV.head(om2.edge)):
        assert distance_to_geodesic(COV, x, om1, om2) == 0
        assert all(s_n_contains(COV, x, om1, om2, n) for n in range(5))
        with pytest.raises(InsideSn):
            unique_path(COV, x, om1, om2, 0)


def brute_unique_paths(cov, T, x, om1, om2, n):
    """All non-backtracking (n+1)-edge walks from x whose every step moves closer to the geodesic."""
    dist = {v: brute_geodesic_distance(cov, T, v, om1, om2) for v in T.nodes if outside(cov, v, om1) and outside(cov, v, om2)}
    found = []
    for walk in _walks(T, x, n + 1):
        if all(w in dist for w in walk) and all(dist[b] == dist[a] - 1 for a, b in zip(walk, walk[1:])):
            found.append(tuple(cov.edge_between(a, b) for a, b in zip(walk, walk[1:])))
    return found


def _walks(T, x, length):
    out = [[x]]
    for _ in range(length):
        out = [w + [y] for w in out for y in T.neighbors(w[-1]) if len(w) < 2 or y != w[-2]]
    return out


def test_unique_path_brute_force():
    cov = unfold(K4, 0, 5)
    T = as_nx(cov)
    checked = 0
    for om1, om2 in cylinder_pairs(cov)[:4]:
        for x in range(cov.n_nodes):
            if not (outside(cov, x, om1) and outside(cov, x, om2)):
                continue
            d = distance_to_geodesic(cov, x, om1, om2)
            for n in range(0, 4):
                if d <= n:
                    with pytest.raises(InsideSn):
                        unique_path(cov, x, om1, om2, n)
                    continue
                found = brute_unique_paths(cov, T, x, om1, om2, n)
                assert found == [unique_path(cov, x, om1, om2, n)]
                checked += 1
    assert checked > 20


def test_overlapping_cylinders_rejected():
    a = BoundaryCylinder(COV.away_edge(1))
    b = BoundaryCylinder(COV.away_edge(COV.children[1][0]))
    with pytest.raises(CoverError):
        distance_to_geodesic(COV, 0, a, b)


@settings(max_examples=20, deadline=None)
@given(base=st.integers(0, 9), depth=st.integers(2, 4), seed=st.integers(0, 10**6))
def test_cover_property(base, depth, seed):
    cov = unfold(PETERSEN, base, depth)
    cov.validate()
    k = root_automorphism(cov, seed=seed)
    B = cov.leaf_brackets
    col = {int(l): i for i, l in enumerate(cov.leaves)}
    for x in range(cov.n_nodes):
        for l in cov.leaves:
            assert B[k(x), col[k(int(l))]] == B[x, col[int(l)]]
