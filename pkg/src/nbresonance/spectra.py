"""Non-backtracking (Hashimoto) matrix, its eigendata, and the Ihara-Bass check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NotAResonance
from .graph_core import RegularGraph
from .shift_space import ResonantState

DEFAULT_TOL_CLUSTER = 1e-8
# relative singular-value threshold for null spaces and left/right Gram matrices
DEFAULT_TOL_RANK = 1e-9


@dataclass(frozen=True, eq=False)
class NonBacktrackingMatrix:
    graph: RegularGraph
    S: np.ndarray

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    def norm(self) -> float:
        # every row and column sums to q, so this is the 1-, 2- and inf-norm
        return float(np.linalg.norm(self.S, 2))


@dataclass(eq=False)
class SpectrumEntry:
    """One eigenvalue cluster.

    ``right_basis`` / ``left_basis`` hold eigenvectors as columns; they are
    bi-orthogonal (``left.T @ right`` diagonal) unless ``defect_flag`` is set.
    """

    z: complex
    multiplicity: int
    right_basis: np.ndarray
    left_basis: np.ndarray
    residual: float
    defect_flag: bool

    @property
    def dim(self) -> int:
        return self.right_basis.shape[1]

    def right_states(self, g):
        return [ResonantState(g, "+", self.z, v) for v in self.right_basis.T]

    def left_states(self, g):
        return [ResonantState(g, "-", self.z, w) for w in self.left_basis.T]


def hashimoto(g: RegularGraph) -> NonBacktrackingMatrix:
    """Dense 0/1 matrix with ``S[e, e'] = 1`` iff ``e'`` is a successor of ``e``."""
    S = np.zeros((g.n_directed, g.n_directed))
    rows = np.repeat(np.arange(g.n_directed), g.q)
    S[rows, g.succ.ravel()] = 1.0
    return NonBacktrackingMatrix(g, S)


def _cluster(values: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage clusters of eigenvalues (index arrays)."""
    n = len(values)
    labels = -np.ones(n, dtype=int)
    current = 0
    for i in range(n):
        if labels[i] >= 0:
            continue
        labels[i] = current
        stack = [i]
        while stack:
            j = stack.pop()
            near = np.where((np.abs(values - values[j]) <= radius) & (labels < 0))[0]
            labels[near] = current
            stack.extend(near.tolist())
        current += 1
    return [np.where(labels == c)[0] for c in range(current)]


def _null_space(A: np.ndarray, k: int, rel_tol: float):
    """Return the k trailing right singular vectors and the geometric dimension
    estimate (number of singular values below ``rel_tol * ||A||``)."""
    _, s, vh = np.linalg.svd(A)
    scale = max(s[0], 1.0)
    dim = int(np.sum(s <= rel_tol * scale))
    return vh[-k:].conj().T, dim


def normalize_vector(v: np.ndarray) -> np.ndarray:
    """Scale so the largest-magnitude entry is 1 (ties: lowest index)."""
    mags = np.abs(v)
    i = int(np.argmax(mags >= mags.max() * (1 - 1e-12)))
    return v / v[i]


def _snap(z: complex, tol: float) -> complex:
    re = 0.0 if abs(z.real) <= tol else z.real
    im = 0.0 if abs(z.imag) <= tol else z.imag
    return complex(re, im)


def eigensolve(
    M: NonBacktrackingMatrix,
    tol_cluster: float = DEFAULT_TOL_CLUSTER,
    tol_rank: float = DEFAULT_TOL_RANK,
) -> list[SpectrumEntry]:
    """Full spectrum, clustered, with right/left eigenbases per cluster.

    Eigenvalues come from LAPACK (Hessenberg reduction + shifted QR). Each
    cluster's right and left eigenspaces are then taken independently as null
    spaces of ``S - zI`` and ``S^T - zI``.
    """
    S = M.S
    if M.dim == 0:
        return []
    try:
        w = np.linalg.eigvals(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    norm = M.norm()
    radius = tol_cluster * max(norm, 1.0)
    eye = np.eye(M.dim)
    entries = [_cluster_entry(S, eye, w, idx, radius, tol_rank) for idx in _cluster(w, radius)]
    # a Jordan block of size k spreads its eigenvalue by about eps^(1/k), so
    # nearby defective clusters are re-merged at the square-root radius
    bad = [(e, idx) for e, idx in entries if e.defect_flag]
    if len(bad) > 1:
        centers = np.array([e.z for e, _ in bad])
        merged = []
        for group in _cluster(centers, np.sqrt(tol_cluster) * max(norm, 1.0)):
            idx = np.concatenate([bad[j][1] for j in group])
            merged.append(_cluster_entry(S, eye, w, idx, radius, tol_rank) if len(group) > 1 else bad[group[0]])
        entries = [(e, idx) for e, idx in entries if not e.defect_flag] + merged
    entries = [e for e, _ in entries]
    entries.sort(key=lambda e: (e.z.real, e.z.imag))
    return entries


def _cluster_entry(S, eye, w, idx, radius, tol_rank):
    k = len(idx)
    z = _snap(complex(np.mean(w[idx])), radius)
    try:
        R, dim_r = _null_space(S - z * eye, k, tol_rank)
        L, dim_l = _null_space(S.T - z * eye, k, tol_rank)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    defect = dim_r != k or dim_l != k
    if not defect:
        R = np.column_stack([normalize_vector(v) for v in R.T])
        G = L.T @ R
        sv = np.linalg.svd(G, compute_uv=False)
        if sv[-1] <= tol_rank * max(sv[0], 1.0) * k:
            defect = True
        else:
            L = L @ np.linalg.inv(G).T
    L = np.column_stack([normalize_vector(v) for v in L.T])
    if defect:
        R = np.column_stack([normalize_vector(v) for v in R.T])
    res = max(_rel_residual(S, z, R), _rel_residual(S.T, z, L))
    return SpectrumEntry(z, k, R, L, res, defect), idx


def _rel_residual(A, z, V):
    r = A @ V - z * V
    return float(np.max(np.abs(r).max(axis=0) / np.abs(V).max(axis=0)))


def resonances(g: RegularGraph, tol_cluster: float = DEFAULT_TOL_CLUSTER) -> np.ndarray:
    """Eigenvalue multiset of the Hashimoto matrix, sorted by (Re, Im)."""
    out = []
    for entry in eigensolve(hashimoto(g), tol_cluster):
        out.extend([entry.z] * entry.multiplicity)
    return np.array(out, dtype=complex)


def eigenspace(g: RegularGraph, z: complex, tol: float = 1e-6, entries=None):
    """Right and left eigenbases for the cluster within ``tol`` of ``z``."""
    if entries is None:
        entries = eigensolve(hashimoto(g))
    best = min(entries, key=lambda e: abs(e.z - z))
    if abs(best.z - z) > tol:
        raise NotAResonance(f"{z} is not within {tol} of any resonance")
    return best.right_basis, best.left_basis


def bass_sides(g: RegularGraph, u: complex) -> tuple[complex, complex]:
    """Both sides of the Ihara-Bass determinant identity at ``u``."""
    n = g.n_vertices
    S = hashimoto(g).S
    lhs = np.linalg.det(np.eye(g.n_directed) - u * S)
    A = g.adjacency()
    rhs = (1 - u * u) ** (g.m - n) * np.linalg.det(np.eye(n) - u * A + g.q * u * u * np.eye(n))
    return complex(lhs), complex(rhs)


def bass_check(g: RegularGraph, u: complex) -> float:
    """``|det(I - uS) - (1-u^2)^(m-n) det(I - uA + q u^2 I)|``."""
    lhs, rhs = bass_sides(g, u)
    return abs(lhs - rhs)


def bass_relative_residual(g: RegularGraph, u: complex) -> float:
    lhs, rhs = bass_sides(g, u)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def bass_spectrum(g: RegularGraph) -> np.ndarray:
    """Hashimoto spectrum predicted from the adjacency spectrum: the roots of
    ``z^2 - lam z + q`` for each adjacency eigenvalue ``lam``, plus ``+1`` and
    ``-1`` each with multiplicity ``m - n``."""
    lam = np.linalg.eigvalsh(g.adjacency())
    out = []
    for l in lam:
        disc = np.sqrt(complex(l * l - 4 * g.q))
        out += [(l + disc) / 2, (l - disc) / 2]
    out += [1.0] * (g.m - g.n_vertices) + [-1.0] * (g.m - g.n_vertices)
    out = np.array(out, dtype=complex)
    return out[np.lexsort((out.imag, out.real))]


def match_multisets(a, b) -> float:
    """Largest distance in a greedy nearest-neighbour matching of two equal-size
    multisets (inf if sizes differ)."""
    a = list(np.asarray(a, dtype=complex))
    b = list(np.asarray(b, dtype=complex))
    if len(a) != len(b):
        return float("inf")
    worst = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b[j]))
        b.pop(j)
    return worst
