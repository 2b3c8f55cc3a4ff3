"""Depth-truncated universal cover of a regular graph.

Nodes are the non-backtracking edge paths of length <= D starting at the base
vertex, stored in depth-first preorder so every subtree is a contiguous range
of node ids. Node 0 is the root. Tree edges reuse the graph convention: the
undirected tree edge ``c - 1`` (between ``parent[c]`` and ``c``) gives the
directed edges ``2(c-1)`` (away from the root) and ``2(c-1)+1`` (toward it).

Boundary points are resolved down to frontier cylinders, one per node at depth
D. The horocycle bracket of any truncation node is constant on each frontier
cylinder, which makes Poisson transforms of boundary measures exact at every
node of the truncation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import (
    CoverError,
    DepthTooSmall,
    EigenResidualTooLarge,
    GeodesicLeavesTruncation,
    InsideSn,
    InvalidTarget,
    OrientationMismatch,
    ZeroEigenvalue,
)
from .graph_core import RegularGraph
from .shift_space import ResonantState


class TruncatedCover:
    def __init__(self, graph: RegularGraph, base_vertex: int, depth: int):
        if depth < 2:
            raise DepthTooSmall(f"truncation depth must be >= 2, got {depth}")
        if not 0 <= base_vertex < graph.n_vertices:
            raise CoverError(f"base vertex {base_vertex} out of range")
        self.graph = graph
        self.base_vertex = base_vertex
        self.depth = depth

        paths: list[tuple[int, ...]] = []
        stack = [()]
        while stack:
            p = stack.pop()
            paths.append(p)
            if len(p) < depth:
                nxt = graph.out_edges[base_vertex] if not p else graph.succ[p[-1]]
                stack.extend(p + (int(e),) for e in reversed(nxt))
        n = len(paths)
        self.paths = paths
        self.index = {p: i for i, p in enumerate(paths)}
        self.node_depth = np.array([len(p) for p in paths], dtype=np.int64)
        self.in_edge = np.array([p[-1] if p else -1 for p in paths], dtype=np.int64)
        self.parent = np.array([self.index[p[:-1]] if p else -1 for p in paths], dtype=np.int64)
        self.vertex = np.array(
            [graph.tau(p[-1]) if p else base_vertex for p in paths], dtype=np.int64
        )
        self.children = [[] for _ in range(n)]
        for c in range(1, n):
            self.children[self.parent[c]].append(c)
        end = np.arange(1, n + 1)
        for c in range(n - 1, 0, -1):
            end[self.parent[c]] = max(end[self.parent[c]], end[c])
        self.subtree_end = end
        self.leaves = np.where(self.node_depth == depth)[0]
        self.leaf_lo = np.searchsorted(self.leaves, np.arange(n))
        self.leaf_hi = np.searchsorted(self.leaves, end)

    # -- nodes and edges -------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.paths)

    @property
    def n_tree_edges(self) -> int:
        return 2 * (self.n_nodes - 1)

    def node(self, path) -> int:
        return self.index[tuple(path)]

    def is_interior(self, x: int) -> bool:
        return self.node_depth[x] < self.depth

    def interior_nodes(self) -> np.ndarray:
        return np.where(self.node_depth < self.depth)[0]

    @staticmethod
    def away_edge(c: int) -> int:
        return 2 * (c - 1)

    @staticmethod
    def toward_edge(c: int) -> int:
        return 2 * (c - 1) + 1

    def edge_child(self, te: int) -> int:
        return te // 2 + 1

    def is_away(self, te: int) -> bool:
        return te % 2 == 0

    def tail(self, te: int) -> int:
        c = self.edge_child(te)
        return int(self.parent[c]) if self.is_away(te) else c

    def head(self, te: int) -> int:
        c = self.edge_child(te)
        return c if self.is_away(te) else int(self.parent[c])

    def edge_between(self, a: int, b: int) -> int:
        if self.parent[b] == a:
            return self.away_edge(b)
        if self.parent[a] == b:
            return self.toward_edge(a)
        raise CoverError(f"nodes {a} and {b} are not adjacent")

    @cached_property
    def edge_label(self) -> np.ndarray:
        """Covering projection of tree directed edges to base directed edges."""
        lab = np.empty(self.n_tree_edges, dtype=np.int64)
        lab[0::2] = self.in_edge[1:]
        lab[1::2] = self.in_edge[1:] ^ 1
        return lab

    def out_tree_edges(self, x: int) -> list[int]:
        out = [self.away_edge(c) for c in self.children[x]]
        if x != 0:
            out.append(self.toward_edge(x))
        return out

    def neighbors(self, x: int) -> list[int]:
        nb = list(self.children[x])
        if x != 0:
            nb.append(int(self.parent[x]))
        return nb

    def tree_successors(self, te: int) -> list[int]:
        return [e for e in self.out_tree_edges(self.head(te)) if e != te ^ 1]

    def validate(self) -> None:
        """Assert the covering-map identities and the tree shape."""
        g, q, D = self.graph, self.graph.q, self.depth
        expected = 1 + 2 * D if q == 1 else 1 + (q + 1) * (q**D - 1) // (q - 1)
        assert self.n_nodes == expected, (self.n_nodes, expected)
        for x in range(self.n_nodes):
            deg = len(self.neighbors(x))
            assert deg == (q + 1 if self.node_depth[x] < D else 1)
        lab = self.edge_label
        for te in range(self.n_tree_edges):
            e = int(lab[te])
            assert g.iota(e) == self.vertex[self.tail(te)]
            assert g.tau(e) == self.vertex[self.head(te)]
            assert lab[te ^ 1] == g.op(e)

    # -- geometry ----------------------------------------------------------

    @cached_property
    def ancestors(self) -> np.ndarray:
        """``ancestors[x, d]`` = ancestor of x at depth d (-1 beyond depth(x))."""
        anc = -np.ones((self.n_nodes, self.depth + 1), dtype=np.int64)
        for x in range(self.n_nodes):
            y = x
            while y >= 0:
                anc[x, self.node_depth[y]] = y
                y = self.parent[y]
        return anc

    def lca_depth(self, x: int, y: int) -> int:
        a, b = self.ancestors[x], self.ancestors[y]
        return int(np.sum((a == b) & (a >= 0))) - 1

    def distance(self, x: int, y: int) -> int:
        return int(self.node_depth[x] + self.node_depth[y] - 2 * self.lca_depth(x, y))

    def path_nodes(self, x: int, y: int) -> list[int]:
        d = self.lca_depth(x, y)
        up, down = [], []
        while self.node_depth[x] > d:
            up.append(x)
            x = int(self.parent[x])
        while self.node_depth[y] > d:
            down.append(y)
            y = int(self.parent[y])
        return up + [x] + down[::-1]

    @cached_property
    def leaf_brackets(self) -> np.ndarray:
        """Horocycle bracket of every node against every frontier cylinder."""
        anc = self.ancestors
        eq = anc[:, None, :] == anc[None, self.leaves, :]
        lca = eq.sum(axis=2) - 1
        return 2 * lca - self.node_depth[:, None]

    def in_half_tree(self, v: int, te: int) -> bool:
        """Whether node ``v`` lies on the head side of tree edge ``te``."""
        c = self.edge_child(te)
        inside = c <= v < self.subtree_end[c]
        return inside if self.is_away(te) else not inside


@dataclass(frozen=True)
class BoundaryCylinder:
    """Boundary points reached through the tree directed edge ``edge``."""

    edge: int


def unfold(g: RegularGraph, base_vertex: int, D: int) -> TruncatedCover:
    return TruncatedCover(g, base_vertex, D)


def frontier_cylinder(cover: TruncatedCover, leaf_node: int) -> BoundaryCylinder:
    if cover.node_depth[leaf_node] != cover.depth:
        raise CoverError(f"node {leaf_node} is not on the frontier")
    return BoundaryCylinder(cover.away_edge(leaf_node))


def cylinder_mask(cover: TruncatedCover, omega: BoundaryCylinder) -> np.ndarray:
    """Boolean mask over frontier cylinders contained in ``omega``."""
    c = cover.edge_child(omega.edge)
    mask = np.zeros(len(cover.leaves), dtype=bool)
    mask[cover.leaf_lo[c]:cover.leaf_hi[c]] = True
    return mask if cover.is_away(omega.edge) else ~mask


def child_cylinders(cover: TruncatedCover, omega: BoundaryCylinder) -> list[BoundaryCylinder]:
    """The q cylinders refining ``omega`` one step further out."""
    return [BoundaryCylinder(e) for e in cover.tree_successors(omega.edge)]


def horocycle_bracket(cover: TruncatedCover, x: int, omega: BoundaryCylinder) -> int:
    """``d(o, y) - d(x, y)`` with ``y`` where the rays from o and x toward omega merge."""
    vals = cover.leaf_brackets[x, cylinder_mask(cover, omega)]
    if vals.min() != vals.max():
        raise CoverError(f"bracket of node {x} is not constant on cylinder {omega.edge}")
    return int(vals[0])


def poisson_kernel(z: complex, cover: TruncatedCover, x: int, omega: BoundaryCylinder) -> complex:
    if z == 0:
        raise ZeroEigenvalue("Poisson kernel needs z != 0")
    return complex(z) ** horocycle_bracket(cover, x, omega)


@dataclass(eq=False)
class FiniteBoundaryMeasure:
    """Finitely additive measure given by its values on frontier cylinders."""

    cover: TruncatedCover
    values: np.ndarray

    def mass(self, omega: BoundaryCylinder) -> complex:
        return complex(self.values[cylinder_mask(self.cover, omega)].sum())


def measure_from_state(
    cover: TruncatedCover, u: ResonantState, check: bool = True, tol: float = 1e-9
) -> FiniteBoundaryMeasure:
    """Boundary measure whose edge Poisson transform is the lifted state.

    Frontier cylinder through the away edge ``e~`` gets
    ``z^-(depth(iota e~)) f(pi(e~))``. With ``check`` the values implied on
    every coarser away-from-root cylinder are compared with the same formula,
    which holds exactly when ``f`` solves the eigen-recursion.
    """
    if u.orientation != "+":
        raise OrientationMismatch("boundary measures are built from resonant (+) states")
    if u.graph is not cover.graph:
        raise CoverError("state lives on another graph")
    z, f = u.z, u.edge_values
    vals = z ** (-(cover.depth - 1)) * f[cover.in_edge[cover.leaves]]
    mu = FiniteBoundaryMeasure(cover, vals)
    if check:
        res = additivity_residual(cover, mu, u)
        if res > tol:
            raise EigenResidualTooLarge(f"boundary measure is not additive (residual {res:.3e})")
    return mu


def additivity_residual(cover: TruncatedCover, mu: FiniteBoundaryMeasure, u: ResonantState) -> float:
    """Max relative mismatch between cylinder masses and ``z^-(depth-1) f``."""
    z, f = u.z, u.edge_values
    cs = np.concatenate([[0], np.cumsum(mu.values)])
    worst = 0.0
    scale = max(float(np.max(np.abs(f))), np.finfo(float).tiny)
    for c in range(1, cover.n_nodes):
        mass = cs[cover.leaf_hi[c]] - cs[cover.leaf_lo[c]]
        target = z ** (-(cover.node_depth[c] - 1)) * f[cover.in_edge[c]]
        worst = max(worst, abs(mass - target) / (abs(z) ** (-(cover.node_depth[c] - 1)) * scale))
    return worst


def _kernel(z: complex, cover: TruncatedCover) -> np.ndarray:
    if z == 0:
        raise ZeroEigenvalue("Poisson transforms need z != 0")
    return np.power(complex(z), cover.leaf_brackets.astype(float))


def poisson_transform(z: complex, cover: TruncatedCover, mu: FiniteBoundaryMeasure) -> np.ndarray:
    """Vertex Poisson transform at every node (exact on the whole truncation)."""
    return _kernel(z, cover) @ mu.values


def edge_poisson_transform(z: complex, cover: TruncatedCover, mu: FiniteBoundaryMeasure) -> np.ndarray:
    """Edge Poisson transform at every tree directed edge: the kernel at the
    edge's tail integrated over the cylinder the edge points into."""
    K = _kernel(z, cover) * mu.values[None, :]
    cs = np.concatenate([np.zeros((cover.n_nodes, 1), dtype=complex), np.cumsum(K, axis=1)], axis=1)
    out = np.empty(cover.n_tree_edges, dtype=complex)
    for c in range(1, cover.n_nodes):
        lo, hi = cover.leaf_lo[c], cover.leaf_hi[c]
        p = cover.parent[c]
        out[cover.away_edge(c)] = cs[p, hi] - cs[p, lo]
        out[cover.toward_edge(c)] = cs[c, -1] - (cs[c, hi] - cs[c, lo])
    return out


def lift_state(cover: TruncatedCover, u: ResonantState) -> np.ndarray:
    """Pull back the edge values along the covering projection."""
    if u.graph is not cover.graph:
        raise CoverError("state lives on another graph")
    return u.edge_values[cover.edge_label]


def tree_eigen_residual(cover: TruncatedCover, lifted: np.ndarray, z: complex) -> float:
    """Max of ``|z f(e) - sum over tree successors|`` over edges whose head is interior."""
    worst = 0.0
    for te in range(cover.n_tree_edges):
        if not cover.is_interior(cover.head(te)):
            continue
        s = sum(lifted[e] for e in cover.tree_successors(te))
        worst = max(worst, abs(z * lifted[te] - s))
    return worst


# -- partial automorphisms ----------------------------------------------------

@dataclass(eq=False)
class PartialTreeMap:
    """Tree map defined on ``mapping``'s keys."""

    cover: TruncatedCover
    mapping: dict

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    @property
    def domain(self) -> list[int]:
        return sorted(self.mapping)

    def map_edge(self, te: int) -> int:
        cov = self.cover
        return cov.edge_between(self(cov.tail(te)), self(cov.head(te)))

    def map_cylinder(self, omega: BoundaryCylinder) -> BoundaryCylinder:
        return BoundaryCylinder(self.map_edge(omega.edge))


def deck_transform(
    cover: TruncatedCover, target: int, edge_matching: Mapping[int, int] | None = None
) -> PartialTreeMap:
    """Deck transformation sending the root to ``target``, restricted to the
    nodes whose image stays inside the truncation.

    ``edge_matching`` maps base edges leaving the base vertex to the labels of
    their images at ``target``; deck transformations commute with the
    covering projection, so only the identity matching is admissible.
    """
    g = cover.graph
    if not 0 <= target < cover.n_nodes or cover.vertex[target] != cover.base_vertex:
        raise InvalidTarget(f"node {target} does not project to the base vertex")
    if edge_matching is not None:
        for e in g.out_edges[cover.base_vertex]:
            if edge_matching.get(int(e), None) != int(e):
                raise InvalidTarget("deck transformations must preserve edge labels")
    prefix = cover.paths[target]
    mapping = {}
    for x, path in enumerate(cover.paths):
        stack = list(prefix)
        for e in path:
            if stack and stack[-1] == e ^ 1:
                stack.pop()
            else:
                stack.append(e)
        if len(stack) <= cover.depth:
            mapping[x] = cover.index[tuple(stack)]
    return PartialTreeMap(cover, mapping)


def root_automorphism(cover: TruncatedCover, seed=None, identity: bool = False) -> PartialTreeMap:
    """Root-fixing automorphism of the truncation: an independent random
    bijection between the children of ``x`` and of its image, at every node."""
    rng = np.random.default_rng(seed)
    mapping = {0: 0}
    queue = [0]
    while queue:
        x = queue.pop()
        src, dst = cover.children[x], cover.children[mapping[x]]
        order = np.arange(len(dst)) if identity else rng.permutation(len(dst))
        for c, j in zip(src, order):
            mapping[c] = dst[j]
            queue.append(c)
    return PartialTreeMap(cover, mapping)


# -- cutoff geometry ------------------------------------------------------------

def _geodesic_core(cover, x, omega1, omega2):
    m1, m2 = cylinder_mask(cover, omega1), cylinder_mask(cover, omega2)
    if np.any(m1 & m2):
        raise CoverError("boundary cylinders must be disjoint")
    b1, b2 = cover.head(omega1.edge), cover.head(omega2.edge)
    for om, b in ((omega1, b1), (omega2, b2)):
        if x != b and cover.in_half_tree(x, om.edge):
            raise GeodesicLeavesTruncation(
                f"node {x} lies inside cylinder {om.edge}; the geodesic is not "
                "resolved there at this depth"
            )
    return cover.path_nodes(b1, b2)


def distance_to_geodesic(cover: TruncatedCover, x: int, omega1: BoundaryCylinder, omega2: BoundaryCylinder) -> int:
    core = _geodesic_core(cover, x, omega1, omega2)
    return min(cover.distance(x, y) for y in core)


def s_n_contains(cover: TruncatedCover, x: int, omega1, omega2, n: int) -> bool:
    return distance_to_geodesic(cover, x, omega1, omega2) <= n


def unique_path(cover: TruncatedCover, x: int, omega1, omega2, n: int) -> tuple[int, ...]:
    """The first ``n+1`` tree edges from ``x`` toward the geodesic between the
    cylinders; requires ``x`` at distance > n from it."""
    core = _geodesic_core(cover, x, omega1, omega2)
    y = min(core, key=lambda v: cover.distance(x, v))
    if cover.distance(x, y) <= n:
        raise InsideSn(f"node {x} is within distance {n} of the geodesic")
    nodes = cover.path_nodes(x, y)[: n + 2]
    return tuple(cover.edge_between(a, b) for a, b in zip(nodes, nodes[1:]))
