"""Checks of the vertex/geodesic pairing formula and its finite-n decomposition.

For a resonance ``z != 0`` with resonant state ``u+`` and coresonant state
``u-``::

    (z^2 - q) <u+, u->_X = (z^2 - 1) <u+, u->_geod

and, for every cutoff ``n >= 0``, ``<u+, u->_X = I_c(n) + I_r(n)`` with
``I_c(n) = geod * B(z, q, n)`` and ``I_r(n) = (q/z^2)^n * opE``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EigenResidualTooLarge, PoleAtZSquaredOne, ZeroEigenvalue
from .graph_core import RegularGraph
from .pairings import geodesic_pairing_direct, modified_edge_pairing, vertex_pairing
from .shift_space import ResonantState
from .spectra import SpectrumEntry, normalize_vector

DEFAULT_NMAX = 12
DEFAULT_TOL = 1e-8
DEFAULT_COMBOS = 5


def _ratio(z, q):
    if z == 0:
        raise ZeroEigenvalue("z must be nonzero")
    return q / (z * z)


def b_integral_closed_form(z: complex, q: int, n: int) -> complex:
    """``(1 - z^-2) sum_{j<n} (q/z^2)^j + (q/z^2)^n``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    r = _ratio(z, q)
    if abs(1 - r) <= 1e-6:
        # the geometric formula cancels near r = 1; the finite sum does not
        partial = sum(r**j for j in range(n))
    else:
        partial = (1 - r**n) / (1 - r)
    return (1 - 1 / (z * z)) * partial + r**n


def b_integral_limit(z: complex, q: int) -> complex:
    """Limit of :func:`b_integral_closed_form` as ``n -> oo``; needs ``|z| > sqrt(q)``."""
    if abs(z) ** 2 <= q:
        raise ValueError(f"geometric series diverges for |z|^2 = {abs(z) ** 2} <= q = {q}")
    return (z * z - 1) / (z * z - q)


def ic_gamma(geod: complex, z: complex, q: int, n: int) -> complex:
    return geod * b_integral_closed_form(z, q, n)


def ir_gamma(opE: complex, z: complex, q: int, n: int) -> complex:
    if n < 0:
        raise ValueError("n must be >= 0")
    return _ratio(z, q) ** n * opE


def c_function(z: complex, q: int) -> complex:
    """``(q+1)^-1 (z^-2 - q) / (z^-2 - 1)``."""
    if z == 0:
        raise ZeroEigenvalue("c-function undefined at z = 0")
    if abs(z * z - 1) <= 1e-12:
        raise PoleAtZSquaredOne(f"c-function has a pole at z^2 = 1 (z = {z})")
    w = 1 / (z * z)
    return (w - q) / ((w - 1) * (q + 1))


@dataclass
class TheoremReport:
    z: complex
    vertex_pairing: complex
    geodesic_pairing: complex
    modified_edge_pairing: complex
    theorem_residual: float
    branch: str
    scale: float
    decomposition_rows: list = field(default_factory=list)
    c_function_residual: float | None = None
    passed: bool = True

    @property
    def decomposition_max(self) -> float:
        return max((row[3] for row in self.decomposition_rows), default=0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["decomposition_max"] = self.decomposition_max
        return d


def pairing_scale(z: complex, q: int, X: complex, geod: complex) -> float:
    return (1 + abs(z) ** 2) * (q + 1) * max(abs(X), abs(geod), 1.0)


def verify_theorem(
    g: RegularGraph,
    z: complex,
    u_plus: ResonantState,
    u_minus: ResonantState,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_TOL,
    eigen_tol: float | None = None,
) -> TheoremReport:
    """Evaluate the pairing formula and the decomposition rows ``n = 0..n_max``.

    Raises :class:`EigenResidualTooLarge` unless both states solve their
    eigen-equation at ``z`` to ``eigen_tol`` (default ``tol``), relative to
    ``(1+|z|) ||u||_inf``. Pass ``eigen_tol=float('inf')`` to skip the guard.
    """
    z = complex(z)
    if z == 0:
        raise ZeroEigenvalue("the pairing formula is stated for z != 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    eigen_tol = tol if eigen_tol is None else eigen_tol
    for u in (u_plus, u_minus):
        rescaled = ResonantState(u.graph, u.orientation, z, u.edge_values)
        norm = max(float(np.max(np.abs(u.edge_values))), np.finfo(float).tiny)
        rel = rescaled.eigen_residual() / ((1 + abs(z)) * norm)
        if rel > eigen_tol:
            raise EigenResidualTooLarge(
                f"{u.orientation} state misses z={z} by relative residual {rel:.3e}"
            )

    q = g.q
    X = vertex_pairing(u_plus, u_minus)
    geod = geodesic_pairing_direct(u_plus, u_minus)
    opE = modified_edge_pairing(u_plus, u_minus)
    scale = pairing_scale(z, q, X, geod)

    z2 = z * z
    if abs(z2 - q) <= tol * q:
        branch = "z_squared_equals_q"
        if q > 1:
            # (z^2 - q) X = (z^2 - 1) geod with z^2 = q != 1 forces geod = 0
            residual = abs(geod) / scale
        else:
            # q = 1: z^2 = 1 as well, so only (1 - z^-2) geod = 0 is implied
            residual = abs((1 - 1 / z2) * geod) / scale
    else:
        branch = "generic"
        residual = abs((z2 - q) * X - (z2 - 1) * geod) / scale

    rows = []
    for n in range(n_max + 1):
        ic = ic_gamma(geod, z, q, n)
        ir = ir_gamma(opE, z, q, n)
        rows.append((n, ic, ir, abs(X - (ic + ir)) / scale))

    c_res = None
    if abs(z2 - 1) > 1e-12:
        c_res = abs((q + 1) * c_function(1 / z, q) * X - geod) / scale

    report = TheoremReport(z, X, geod, opE, residual, branch, scale, rows, c_res)
    report.passed = residual <= tol and report.decomposition_max <= tol
    return report


def random_combination(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random complex combination of basis columns, scaled to unit max-entry."""
    k = basis.shape[1]
    coeffs = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return normalize_vector(basis @ coeffs)


def sample_state_pairs(g, entry: SpectrumEntry, n_combos: int, rng):
    """``n_combos`` (resonant, coresonant) pairs of random eigenspace combinations."""
    pairs = []
    for _ in range(n_combos):
        f = random_combination(entry.right_basis, rng)
        h = random_combination(entry.left_basis, rng)
        pairs.append((ResonantState(g, "+", entry.z, f), ResonantState(g, "-", entry.z, h)))
    return pairs


def verify_resonance(
    g: RegularGraph,
    entry: SpectrumEntry,
    n_combos: int = DEFAULT_COMBOS,
    seed: int = 0,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_TOL,
) -> list[TheoremReport]:
    """Theorem reports for ``n_combos`` seeded random pairs from one eigenspace."""
    rng = np.random.default_rng(seed)
    return [
        verify_theorem(g, entry.z, up, um, n_max=n_max, tol=tol)
        for up, um in sample_state_pairs(g, entry, n_combos, rng)
    ]
