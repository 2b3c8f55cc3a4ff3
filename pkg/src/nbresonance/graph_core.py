"""Finite (q+1)-regular graphs with directed-edge bookkeeping.

Undirected edge ``i`` = ``{u, v}`` yields the directed edges ``2i = (u, v)``
and ``2i + 1 = (v, u)``, so the opposite-edge involution is ``e ^ 1``.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    Disconnected,
    FormatError,
    GenerationTimeout,
    HasLoop,
    HasMultiEdge,
    NotRegular,
    ParamOutOfRange,
    ParityViolation,
    UnknownName,
)

DEFAULT_REJECTION_BUDGET = 10_000


@dataclass(frozen=True, eq=False)
class RegularGraph:
    """Immutable connected simple (q+1)-regular graph.

    ``directed_edges[e] = (iota(e), tau(e))``. Successor/predecessor tables
    are precomputed: ``succ[e]`` lists the q edges ``e'`` with
    ``tau(e) = iota(e')`` and ``e' != op(e)``.
    """

    n_vertices: int
    q: int
    directed_edges: np.ndarray
    out_edges: np.ndarray = field(repr=False)
    in_edges: np.ndarray = field(repr=False)
    succ: np.ndarray = field(repr=False)
    pred: np.ndarray = field(repr=False)
    source: str = "edges"

    @property
    def n_directed(self) -> int:
        return len(self.directed_edges)

    @property
    def m(self) -> int:
        return len(self.directed_edges) // 2

    def iota(self, e: int) -> int:
        return int(self.directed_edges[e, 0])

    def tau(self, e: int) -> int:
        return int(self.directed_edges[e, 1])

    @staticmethod
    def op(e: int) -> int:
        return e ^ 1

    @property
    def op_array(self) -> np.ndarray:
        return np.arange(self.n_directed) ^ 1

    def undirected_pairs(self) -> list[tuple[int, int]]:
        return [tuple(int(v) for v in self.directed_edges[2 * i]) for i in range(self.m)]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices))
        a[self.directed_edges[:, 0], self.directed_edges[:, 1]] = 1.0
        return a

    def edge_index(self, u: int, v: int) -> int:
        for e in self.out_edges[u]:
            if self.directed_edges[e, 1] == v:
                return int(e)
        raise KeyError((u, v))

    def successors(self, e: int) -> set[int]:
        return {int(x) for x in self.succ[e]}

    def predecessors(self, e: int) -> set[int]:
        return {int(x) for x in self.pred[e]}

    def summary(self) -> dict:
        return {"n": self.n_vertices, "m": self.m, "q": self.q, "source": self.source}


def build_from_undirected_edges(
    n: int, pairs: Iterable[Sequence[int]], source: str = "edges"
) -> RegularGraph:
    """Validate an undirected edge list and build the directed-edge structure."""
    pairs = [(int(u), int(v)) for u, v in pairs]
    if n < 1:
        raise ParamOutOfRange(f"need at least one vertex, got n={n}")
    seen = set()
    for u, v in pairs:
        if not (0 <= u < n and 0 <= v < n):
            raise ParamOutOfRange(f"vertex index out of range in edge ({u}, {v})")
        if u == v:
            raise HasLoop(f"loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise HasMultiEdge(f"edge {key} listed more than once")
        seen.add(key)

    degree = np.zeros(n, dtype=int)
    for u, v in pairs:
        degree[u] += 1
        degree[v] += 1
    if len(set(degree.tolist())) != 1:
        raise NotRegular(f"mixed degrees {sorted(set(degree.tolist()))}")
    d = int(degree[0])
    if d < 2:
        raise ParamOutOfRange(f"degree must be at least 2, got {d}")

    directed = np.empty((2 * len(pairs), 2), dtype=np.int64)
    for i, (u, v) in enumerate(pairs):
        directed[2 * i] = (u, v)
        directed[2 * i + 1] = (v, u)

    out_edges = [[] for _ in range(n)]
    in_edges = [[] for _ in range(n)]
    for e, (u, v) in enumerate(directed):
        out_edges[u].append(e)
        in_edges[v].append(e)
    out_edges = np.array(out_edges, dtype=np.int64)
    in_edges = np.array(in_edges, dtype=np.int64)

    _check_connected(n, out_edges, directed)

    ops = np.arange(len(directed)) ^ 1
    succ = np.array(
        [[e2 for e2 in out_edges[directed[e, 1]] if e2 != ops[e]] for e in range(len(directed))],
        dtype=np.int64,
    )
    pred = np.array(
        [[e0 for e0 in in_edges[directed[e, 0]] if e0 != ops[e]] for e in range(len(directed))],
        dtype=np.int64,
    )
    return RegularGraph(n, d - 1, directed, out_edges, in_edges, succ, pred, source)


def _check_connected(n, out_edges, directed):
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for e in out_edges[x]:
            y = directed[e, 1]
            if not seen[y]:
                seen[y] = True
                queue.append(y)
    if not seen.all():
        raise Disconnected(f"{int((~seen).sum())} vertices unreachable from vertex 0")


# --- named families -------------------------------------------------------

def _complete(n):
    if n < 3:
        raise ParamOutOfRange("complete(n) needs n >= 3")
    return n, list(itertools.combinations(range(n), 2))


def _cycle(n):
    if n < 3:
        raise ParamOutOfRange("cycle(n) needs n >= 3")
    return n, [(i, (i + 1) % n) for i in range(n)]


def _complete_bipartite(n):
    if n < 2:
        raise ParamOutOfRange("complete_bipartite(n) needs n >= 2")
    return 2 * n, [(i, n + j) for i in range(n) for j in range(n)]


def _petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return 10, outer + spokes + inner


def _hypercube3():
    pairs = [(x, x ^ (1 << b)) for x in range(8) for b in range(3) if x < x ^ (1 << b)]
    return 8, pairs


_NAMED = {
    "complete": (_complete, 1),
    "cycle": (_cycle, 1),
    "complete_bipartite": (_complete_bipartite, 1),
    "petersen": (_petersen, 0),
    "hypercube3": (_hypercube3, 0),
}


def generate_named(name: str, *params: int) -> RegularGraph:
    """Standard graphs: ``complete(n)``, ``cycle(n)``, ``complete_bipartite(n)``
    (= K_{n,n}), ``petersen``, ``hypercube3``."""
    if name not in _NAMED:
        raise UnknownName(f"unknown graph family {name!r}; known: {sorted(_NAMED)}")
    builder, arity = _NAMED[name]
    if len(params) != arity:
        raise ParamOutOfRange(f"{name} takes {arity} parameter(s), got {len(params)}")
    n, pairs = builder(*params)
    label = name if not params else f"{name}:{','.join(str(p) for p in params)}"
    pairs = sorted((min(u, v), max(u, v)) for u, v in pairs)
    return build_from_undirected_edges(n, pairs, source=label)


def parse_named_spec(spec: str) -> RegularGraph:
    """Parse ``"complete:4"`` / ``"petersen"`` style specs."""
    name, _, rest = spec.partition(":")
    try:
        params = [int(p) for p in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ParamOutOfRange(f"bad parameters in {spec!r}") from exc
    return generate_named(name.strip(), *params)


def generate_random_regular(
    n: int, degree: int, seed: int, max_attempts: int = DEFAULT_REJECTION_BUDGET
) -> RegularGraph:
    """Configuration model with rejection of loops, multi-edges and
    disconnected outcomes. Deterministic for a fixed seed."""
    if (n * degree) % 2:
        raise ParityViolation(f"n*degree = {n * degree} is odd")
    if not 2 <= degree < n:
        raise ParamOutOfRange(f"need 2 <= degree < n, got degree={degree}, n={n}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(max_attempts):
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        canon = np.sort(pairs, axis=1)
        if len(np.unique(canon, axis=0)) != len(canon):
            continue
        canon = canon[np.lexsort((canon[:, 1], canon[:, 0]))]
        try:
            return build_from_undirected_edges(
                n, canon.tolist(), source=f"random:{n},{degree},{seed}"
            )
        except Disconnected:
            continue
    raise GenerationTimeout(f"no simple connected graph after {max_attempts} attempts")


# --- edge-list files --------------------------------------------------------

def parse_edge_list(text: str, source: str = "edges") -> RegularGraph:
    """Parse the ``n m`` header + ``u v`` lines format (``#`` comments)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2 or not all(re.fullmatch(r"[+-]?\d+", t) for t in tokens):
            raise FormatError(f"line {lineno}: expected two integers, got {raw!r}")
        rows.append((int(tokens[0]), int(tokens[1])))
    if not rows:
        raise FormatError("empty edge list")
    (n, m), body = rows[0], rows[1:]
    if n < 1 or m < 0:
        raise FormatError(f"bad header n={n} m={m}")
    if len(body) != m:
        raise FormatError(f"header announces {m} edges, found {len(body)}")
    return build_from_undirected_edges(n, body, source=source)


def read_edge_list(path) -> RegularGraph:
    path = Path(path)
    return parse_edge_list(path.read_text(), source=str(path))


def format_edge_list(g: RegularGraph) -> str:
    pairs = sorted((min(u, v), max(u, v)) for u, v in g.undirected_pairs())
    lines = [f"{g.n_vertices} {len(pairs)}"] + [f"{u} {v}" for u, v in pairs]
    return "\n".join(lines) + "\n"


def write_edge_list(g: RegularGraph, path) -> None:
    Path(path).write_text(format_edge_list(g))
