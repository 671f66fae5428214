"""Binary-collision energy-redistribution kernels and their grid tables.

A collision between particles of energies (e1, e2) redistributes one of
them to energy e with weight

    f(e1, e2; e) = alpha / sqrt(e1 e2 e) * min(sqrt(e), sqrt(min(e1, e2)),
                                               sqrt(e1 + e2 - e))

on 0 < e < e1 + e2 and zero outside.  The flux-weighted kernel
sqrt(e) * f is a symmetric trapezoid about the pair midpoint, which is
what makes particle and energy flux simultaneously conservable.

The elastic counterpart g is *constructed from the discrete particle-flux
sum rule* rather than from its continuum closed form, so the assembled
collision operator conserves particle flux to machine precision on the
grid regardless of the energy cutoff.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import EnergyGrid

__all__ = [
    "kernel_f",
    "continuum_g",
    "CollisionTables",
    "build_f_tables",
    "build_g_from_sum_rule",
    "build_collision_tables",
]


def kernel_f(e1: float, e2: float, e, alpha: float):
    """Inelastic redistribution kernel; vectorized over the outgoing energy.

    The incoming pair is symmetrized internally, so the argument order of
    (e1, e2) never matters.  Returns zero outside the open support
    (0, e1 + e2); the kinks sit exactly at min(e1, e2) and max(e1, e2).
    """
    if e1 <= 0 or e2 <= 0:
        raise ValueError(f"pair energies must be positive, got ({e1}, {e2})")
    if alpha < 0:
        raise ValueError(f"interaction ratio must be >= 0, got {alpha}")
    e = np.asarray(e, dtype=np.float64)
    scalar = e.ndim == 0
    e = np.atleast_1d(e)
    lo = min(e1, e2)
    total = e1 + e2
    inside = (e > 0.0) & (e < total)
    shape = np.minimum(
        np.minimum(np.sqrt(np.maximum(e, 0.0)), np.sqrt(lo)),
        np.sqrt(np.maximum(total - e, 0.0)),
    )
    out = np.where(inside, alpha / np.sqrt(e1 * e2 * np.where(inside, e, 1.0)) * shape, 0.0)
    return float(out[0]) if scalar else out


def continuum_g(e1: float, e2: float, alpha: float) -> float:
    """Closed-form continuum elastic kernel from the particle-flux sum rule.

    Integrating sqrt(e) * f(e1, e2; e) over the full support gives
    sqrt(a) * (b + a/3) with a = min(e1, e2), b = max(e1, e2), hence

        g(e1; e2) = -alpha * sqrt(a) * (b + a/3) / (sqrt(e1 e2) * sqrt(e2)).

    This is the infinite-resolution limit the discrete tables approach;
    the discrete construction itself never uses it.
    """
    if e1 <= 0 or e2 <= 0:
        raise ValueError(f"pair energies must be positive, got ({e1}, {e2})")
    a, b = min(e1, e2), max(e1, e2)
    return -alpha * np.sqrt(a) * (b + a / 3.0) / (np.sqrt(e1 * e2) * np.sqrt(e2))


def _flux_shape_rows(nodes: np.ndarray, e_a: float) -> np.ndarray:
    """Flux-weighted trapezoid sqrt(E_m) f(E_a, E_b; E_m) * sqrt(e_a E_b)/alpha.

    Returns the (n_e, n_e) block for one fixed pair member ``e_a`` against
    every grid energy E_b (rows) and every outgoing node E_m (columns).
    """
    shape = np.minimum(
        np.minimum(np.sqrt(nodes)[None, :], np.sqrt(np.minimum(e_a, nodes))[:, None]),
        np.sqrt(np.maximum(e_a + nodes[:, None] - nodes[None, :], 0.0)),
    )
    support = nodes[None, :] < e_a + nodes[:, None]
    return np.where(support, shape, 0.0)


@dataclass
class CollisionTables:
    """Precomputed kernel tables over the energy grid.

    ``sigma[a, b]`` is the quadrature mass of the flux-weighted trapezoid
    for the pair (E_a, E_b); it is the single ingredient both loss tables
    and the conservation identity are built from.  ``g_cc[a, b]`` is the
    elastic kernel with the *partner* energy first and the tracked energy
    second.  ``f_ei_pair`` and ``f_ei_rows`` are the kernel slices
    involving the elastic line.  The full 3-index table is only needed by
    the reference (direct-sum) collision operator and by table-level
    tests, so it is materialized lazily through :meth:`f_cc`.
    """

    alpha: float
    idx_ei: int
    nodes: np.ndarray
    weights: np.ndarray
    f_ei_pair: np.ndarray          # f(E_i, E_i; E_m), shape (n_e,)
    f_ei_rows: np.ndarray          # f(E_n, E_i; E_m), shape (n_e, n_e)
    sigma: np.ndarray | None = None    # shape (n_e, n_e)
    g_cc: np.ndarray | None = None     # g(E_a; E_b), shape (n_e, n_e)
    _f_cc: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def complete(self) -> bool:
        return self.g_cc is not None

    @property
    def g_ii(self) -> float:
        """Elastic kernel at the incident line, g(E_i; E_i)."""
        return float(self.g_cc[self.idx_ei, self.idx_ei])

    @property
    def g_ei_row(self) -> np.ndarray:
        """g(E_n; E_i): continuum partner depleting the elastic line."""
        return self.g_cc[:, self.idx_ei]

    @property
    def g_ei_col(self) -> np.ndarray:
        """g(E_i; E_m): elastic partner depleting continuum node m."""
        return self.g_cc[self.idx_ei, :]

    @property
    def f_cc(self) -> np.ndarray:
        """Full 3-index kernel table f(E_n, E_p; E_m), built on first use.

        At the default grid this is ~110 MB; the production collision
        operator never touches it (it contracts the same kernel through
        cumulative sums), so the memory is only paid when the reference
        operator or table-level checks ask for it.
        """
        if self._f_cc is None:
            n = self.n
            nodes = self.nodes
            tab = np.empty((n, n, n), dtype=np.float64)
            inv_kappa = 1.0 / np.sqrt(nodes)
            for i in range(n):
                tab[i] = (
                    self.alpha
                    * inv_kappa[None, :]
                    / np.sqrt(nodes[i] * nodes[:, None])
                    * _flux_shape_rows(nodes, nodes[i])
                )
            self._f_cc = tab
        return self._f_cc


def build_f_tables(egrid: EnergyGrid, e_i: float, alpha: float) -> CollisionTables:
    """Evaluate the inelastic kernel on the grid (elastic-line slices eager)."""
    nodes = egrid.nodes
    if abs(nodes[egrid.idx_ei] - e_i) != 0.0:
        raise ValueError("incident energy must sit exactly on an energy node")
    f_ei_pair = kernel_f(e_i, e_i, nodes, alpha)
    n = egrid.n
    f_ei_rows = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        f_ei_rows[i] = kernel_f(nodes[i], e_i, nodes, alpha)
    return CollisionTables(
        alpha=alpha,
        idx_ei=egrid.idx_ei,
        nodes=nodes,
        weights=egrid.weights,
        f_ei_pair=f_ei_pair,
        f_ei_rows=f_ei_rows,
    )


def build_g_from_sum_rule(tables: CollisionTables, egrid: EnergyGrid) -> CollisionTables:
    """Complete the tables with the elastic kernel from the number sum rule.

    g(E_a; E_b) = -(1/sqrt(E_b)) sum_m w_m sqrt(E_m) f(E_a, E_b; E_m),
    evaluated with the same truncated quadrature the solver uses, which is
    what makes discrete particle-flux conservation exact even for pairs
    whose support extends beyond the cutoff.
    """
    nodes = egrid.nodes
    weights = egrid.weights
    n = egrid.n
    sigma = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        sigma[i] = _flux_shape_rows(nodes, nodes[i]) @ weights
    kappa = np.sqrt(nodes)
    g_cc = -tables.alpha * sigma / (kappa[:, None] * nodes[None, :])
    tables.sigma = sigma
    tables.g_cc = g_cc
    return tables


def build_collision_tables(egrid: EnergyGrid, e_i: float, alpha: float) -> CollisionTables:
    """Convenience wrapper: f tables followed by the sum-rule g."""
    return build_g_from_sum_rule(build_f_tables(egrid, e_i, alpha), egrid)
