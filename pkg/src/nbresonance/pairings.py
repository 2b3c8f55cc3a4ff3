"""Push-forwards of (co)resonant states and their pairings.

All pairings are bilinear (no complex conjugation). ``u_plus`` must have
orientation ``+`` and ``u_minus`` orientation ``-``; they may sit at
different resonances.
"""

from __future__ import annotations

import weakref

import numpy as np

from .errors import GraphMismatch, OrientationMismatch
from .graph_core import RegularGraph
from .shift_space import ResonantState

VertexFunction = np.ndarray
EdgeFunction = np.ndarray


def vertex_pushforward(u: ResonantState) -> VertexFunction:
    """Sum of edge values over edges starting (``+``) or ending (``-``) at each vertex."""
    g = u.graph
    table = g.out_edges if u.orientation == "+" else g.in_edges
    return u.edge_values[table].sum(axis=1)


def edge_pushforward(u: ResonantState) -> EdgeFunction:
    # depth-1 cylinder values are the edge values themselves
    return u.edge_values.copy()


def _check_pair(u_plus: ResonantState, u_minus: ResonantState) -> None:
    if u_plus.orientation != "+" or u_minus.orientation != "-":
        raise OrientationMismatch("expected (resonant '+', coresonant '-') states")
    if u_plus.graph is not u_minus.graph:
        raise GraphMismatch("states live on different graphs")


def vertex_pairing(u_plus: ResonantState, u_minus: ResonantState) -> complex:
    _check_pair(u_plus, u_minus)
    return complex(np.sum(vertex_pushforward(u_plus) * vertex_pushforward(u_minus)))


def edge_pairing(u_plus: ResonantState, u_minus: ResonantState) -> complex:
    _check_pair(u_plus, u_minus)
    return complex(np.sum(edge_pushforward(u_plus) * edge_pushforward(u_minus)))


def modified_edge_pairing(u_plus: ResonantState, u_minus: ResonantState) -> complex:
    """``sum_e f(op e) g(e)``."""
    _check_pair(u_plus, u_minus)
    f = edge_pushforward(u_plus)
    return complex(np.sum(f[u_plus.graph.op_array] * edge_pushforward(u_minus)))


def geodesic_pairing_formula(u_plus: ResonantState, u_minus: ResonantState) -> complex:
    """Vertex pairing minus modified edge pairing."""
    return vertex_pairing(u_plus, u_minus) - modified_edge_pairing(u_plus, u_minus)


_PAIRS: "weakref.WeakKeyDictionary[RegularGraph, dict]" = weakref.WeakKeyDictionary()


def joinable_pairs(g: RegularGraph, exclude_backtrack: bool) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays ``(e_minus, e_plus)`` over pairs with ``tau(e_minus) = iota(e_plus)``.

    With ``exclude_backtrack`` the pairs with ``e_plus = op(e_minus)`` are
    dropped, leaving the depth-1 shadow of the set of bi-infinite chains.
    """
    cache = _PAIRS.setdefault(g, {})
    if exclude_backtrack not in cache:
        em, ep = [], []
        for x in range(g.n_vertices):
            for a in g.in_edges[x]:
                for b in g.out_edges[x]:
                    if exclude_backtrack and b == (a ^ 1):
                        continue
                    em.append(a)
                    ep.append(b)
        cache[exclude_backtrack] = (np.array(em, dtype=np.int64), np.array(ep, dtype=np.int64))
    return cache[exclude_backtrack]


def geodesic_pairing_direct(u_plus: ResonantState, u_minus: ResonantState) -> complex:
    """Tensor product of the states integrated over joinable, non-backtracking pairs."""
    _check_pair(u_plus, u_minus)
    em, ep = joinable_pairs(u_plus.graph, exclude_backtrack=True)
    return complex(np.sum(u_minus.edge_values[em] * u_plus.edge_values[ep]))


def p2_pairing(u_plus: ResonantState, u_minus: ResonantState) -> complex:
    """Same integral without the non-backtracking restriction."""
    _check_pair(u_plus, u_minus)
    em, ep = joinable_pairs(u_plus.graph, exclude_backtrack=False)
    return complex(np.sum(u_minus.edge_values[em] * u_plus.edge_values[ep]))


geodesic_pairing = geodesic_pairing_direct
