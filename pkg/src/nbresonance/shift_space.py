"""Cylinder combinatorics on the one-sided shift spaces of chains.

Chains are always stored in forward traversal order
(``tau(chain[j]) == iota(chain[j+1])``). For orientation ``+`` the chain is
the first ``k`` edges of a forward-infinite chain, so its deepest edge is
``chain[-1]``; for orientation ``-`` it is the last ``k`` edges of a
backward-infinite chain and the deepest edge is ``chain[0]``.

A (co)resonant state at ``z != 0`` is represented by its edge vector: pairing
the eigen-equation against cylinder indicators forces
``u(C(e_1..e_k)) = z^(1-k) u(C(deepest))``, and the depth-1 values must form
an eigenvector of the successor matrix (``+``) or its transpose (``-``).
"""

from __future__ import annotations

import weakref
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import GraphMismatch, OrientationMismatch, ZeroEigenvalue
from .graph_core import RegularGraph

ORIENTATIONS = ("+", "-")


def _check_orientation(o):
    if o not in ORIENTATIONS:
        raise ValueError(f"orientation must be '+' or '-', got {o!r}")


@dataclass(frozen=True)
class Cylinder:
    orientation: str
    chain: tuple[int, ...]

    def __post_init__(self):
        _check_orientation(self.orientation)
        if not self.chain:
            raise ValueError("cylinder chain must be nonempty")
        object.__setattr__(self, "chain", tuple(int(e) for e in self.chain))

    @property
    def depth(self) -> int:
        return len(self.chain)

    @property
    def deepest(self) -> int:
        return self.chain[-1] if self.orientation == "+" else self.chain[0]

    def validate(self, g: RegularGraph) -> None:
        for a, b in zip(self.chain, self.chain[1:]):
            if b not in g.successors(a):
                raise ValueError(f"edges {a}, {b} do not form a non-backtracking step")

    def refine(self, g: RegularGraph) -> list["Cylinder"]:
        """The q one-step refinements (toward the infinite end)."""
        if self.orientation == "+":
            return [Cylinder("+", self.chain + (int(e),)) for e in g.succ[self.chain[-1]]]
        return [Cylinder("-", (int(e),) + self.chain) for e in g.pred[self.chain[0]]]


def cylinders(g: RegularGraph, orientation: str, depth: int) -> list[Cylinder]:
    """All cylinders of a given depth (there are ``2m q^(depth-1)``)."""
    arr = cylinder_array(g, orientation, depth)
    return [Cylinder(orientation, tuple(row)) for row in arr.tolist()]


def cylinder_array(g: RegularGraph, orientation: str, depth: int) -> np.ndarray:
    """Chains of the given depth as an int array of shape (2m q^(depth-1), depth)."""
    _check_orientation(orientation)
    chains = np.arange(g.n_directed)[:, None]
    for _ in range(depth - 1):
        if orientation == "+":
            ext = g.succ[chains[:, -1]]
            chains = np.concatenate(
                [np.repeat(chains, g.q, axis=0), ext.reshape(-1, 1)], axis=1
            )
        else:
            ext = g.pred[chains[:, 0]]
            chains = np.concatenate(
                [ext.reshape(-1, 1), np.repeat(chains, g.q, axis=0)], axis=1
            )
    return chains


class CylinderFunction:
    """Finite linear combination of cylinder indicators, all at one depth.

    Terms given at mixed depths are refined to the deepest one; refinement is
    exact because an indicator equals the sum of its refinements.
    """

    def __init__(self, g: RegularGraph, orientation: str, terms: Iterable = ()):
        _check_orientation(orientation)
        self.graph = g
        self.orientation = orientation
        items = list(terms.items()) if isinstance(terms, Mapping) else list(terms)
        norm = []
        for cyl, coeff in items:
            if not isinstance(cyl, Cylinder):
                cyl = Cylinder(orientation, tuple(cyl))
            if cyl.orientation != orientation:
                raise OrientationMismatch("all cylinders must share the orientation")
            cyl.validate(g)
            norm.append((cyl, complex(coeff)))
        self.depth = max((c.depth for c, _ in norm), default=1)
        acc: dict[tuple[int, ...], complex] = defaultdict(complex)
        for cyl, coeff in norm:
            for fine in _refine_to(g, cyl, self.depth):
                acc[fine.chain] += coeff
        self.terms = {k: v for k, v in acc.items() if v != 0}

    @classmethod
    def indicator(cls, g, cyl: Cylinder) -> "CylinderFunction":
        return cls(g, cyl.orientation, [(cyl, 1.0)])

    def is_zero(self) -> bool:
        return not self.terms

    def refined(self, depth: int) -> "CylinderFunction":
        if depth < self.depth:
            raise ValueError("cannot coarsen a cylinder function")
        out = CylinderFunction(self.graph, self.orientation)
        acc: dict[tuple[int, ...], complex] = defaultdict(complex)
        for chain, coeff in self.terms.items():
            for fine in _refine_to(self.graph, Cylinder(self.orientation, chain), depth):
                acc[fine.chain] += coeff
        out.depth = depth
        out.terms = {k: v for k, v in acc.items() if v != 0}
        return out

    def __repr__(self):
        return f"CylinderFunction({self.orientation}, depth={self.depth}, terms={len(self.terms)})"


def _refine_to(g, cyl, depth):
    level = [cyl]
    for _ in range(depth - cyl.depth):
        level = [c for parent in level for c in parent.refine(g)]
    return level


def _transfer_indicator(g: RegularGraph, orientation: str, chain: tuple[int, ...]):
    """Image of a single indicator under the transfer operator, as a list of chains."""
    if len(chain) >= 2:
        return [chain[1:]] if orientation == "+" else [chain[:-1]]
    (e,) = chain
    nxt = g.succ[e] if orientation == "+" else g.pred[e]
    return [(int(x),) for x in nxt]


def apply_transfer(g: RegularGraph, F: CylinderFunction) -> CylinderFunction:
    """Transfer operator on a locally constant function.

    ``+`` strips the initial edge (or sums over successors at depth 1);
    ``-`` strips the terminal edge (or sums over predecessors).
    """
    if F.graph is not g:
        raise GraphMismatch("cylinder function lives on another graph")
    terms = [
        (Cylinder(F.orientation, image), coeff)
        for chain, coeff in F.terms.items()
        for image in _transfer_indicator(g, F.orientation, chain)
    ]
    return CylinderFunction(g, F.orientation, terms)


@dataclass(frozen=True, eq=False)
class ResonantState:
    """Edge-level representation of a (co)resonant distribution.

    ``edge_values`` is ``f`` (orientation ``+``, ``S f = z f``) or ``g``
    (orientation ``-``, ``S^T g = z g``).
    """

    graph: RegularGraph
    orientation: str
    z: complex
    edge_values: np.ndarray

    def __post_init__(self):
        _check_orientation(self.orientation)
        if self.z == 0:
            raise ZeroEigenvalue("resonant states need z != 0")
        vals = np.asarray(self.edge_values, dtype=complex)
        if vals.shape != (self.graph.n_directed,):
            raise ValueError(f"expected {self.graph.n_directed} edge values, got {vals.shape}")
        object.__setattr__(self, "edge_values", vals)
        object.__setattr__(self, "z", complex(self.z))

    def scaled(self, c: complex) -> "ResonantState":
        return ResonantState(self.graph, self.orientation, self.z, c * self.edge_values)

    def eigen_residual(self) -> float:
        """``max |z u(e) - sum over successors/predecessors|``."""
        neigh = self.graph.succ if self.orientation == "+" else self.graph.pred
        lhs = self.z * self.edge_values
        rhs = self.edge_values[neigh].sum(axis=1)
        return float(np.max(np.abs(lhs - rhs)))

    def cylinder_value(self, cyl: Cylinder) -> complex:
        if cyl.orientation != self.orientation:
            raise OrientationMismatch("state and cylinder orientations differ")
        return self.z ** (1 - cyl.depth) * self.edge_values[cyl.deepest]


def evaluate(u: ResonantState, F: CylinderFunction) -> complex:
    """Pair a resonant state with a locally constant function."""
    if F.orientation != u.orientation:
        raise OrientationMismatch("state and function orientations differ")
    if F.graph is not u.graph:
        raise GraphMismatch("state and function live on different graphs")
    total = 0j
    for chain, coeff in F.terms.items():
        total += coeff * u.cylinder_value(Cylinder(u.orientation, chain))
    return total


@dataclass
class ResonanceCheck:
    passed: bool
    max_residual: float
    normalized_residual: float
    worst_cylinder: Cylinder | None
    n_cylinders: int


# per-graph cache: orientation, depth -> (chains per depth, transfer images)
_TABLES: "weakref.WeakKeyDictionary[RegularGraph, dict]" = weakref.WeakKeyDictionary()


def _transfer_table(g: RegularGraph, orientation: str, depth: int):
    """For every cylinder up to ``depth``: its (depth, deepest edge) and the
    (depth, deepest edge) pairs of its transfer image."""
    cache = _TABLES.setdefault(g, {})
    key = (orientation, depth)
    if key not in cache:
        rows = []
        for k in range(1, depth + 1):
            arr = cylinder_array(g, orientation, k)
            deep_col = -1 if orientation == "+" else 0
            # images computed through the same rule apply_transfer uses
            images = [_transfer_indicator(g, orientation, tuple(c)) for c in arr.tolist()]
            width = len(images[0])
            img_deep = np.array(
                [[im[deep_col] for im in ims] for ims in images], dtype=np.int64
            ).reshape(len(arr), width)
            img_depth = len(images[0][0])
            rows.append((k, arr, arr[:, deep_col], img_depth, img_deep))
        cache[key] = rows
    return cache[key]


def check_resonant(g: RegularGraph, u: ResonantState, depth: int, tol: float = 1e-9) -> ResonanceCheck:
    """Check ``<u, L 1_C> = z <u, 1_C>`` on every cylinder up to ``depth``.

    Passes when the worst residual is at most ``tol (1 + |z|) ||u||_inf``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if u.graph is not g:
        raise GraphMismatch("state lives on another graph")
    z, f = u.z, u.edge_values
    worst, worst_cyl, count = -1.0, None, 0
    for k, arr, deep, img_depth, img_deep in _transfer_table(g, u.orientation, depth):
        lhs = (z ** (1 - img_depth)) * f[img_deep].sum(axis=1)
        rhs = z * (z ** (1 - k)) * f[deep]
        res = np.abs(lhs - rhs)
        count += len(arr)
        i = int(np.argmax(res))
        if res[i] > worst:
            worst, worst_cyl = float(res[i]), Cylinder(u.orientation, tuple(arr[i].tolist()))
    scale = (1 + abs(z)) * max(float(np.max(np.abs(f))), np.finfo(float).tiny)
    return ResonanceCheck(worst <= tol * scale, worst, worst / scale, worst_cyl, count)
