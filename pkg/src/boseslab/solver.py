"""Stationary transport solve by damped fixed-point (source) iteration.

The spectral density splits exactly into the coherent elastic line at the
incident energy and the inelastic continuum; each sweep propagates both
through the depth-coupling matrix, adds the ballistic source to the
elastic line, and applies the bilinear collision increment.  Every sweep
adds one more scattering order, so the iteration is the numerical
counterpart of summing the multiple-scattering series; it contracts
because row sums of the propagator are below one and the collision terms
are weak.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .kernels import CollisionTables
from .propagator import PropagatorMatrix
from .scenario import DepthGrid, EnergyGrid, Scenario

__all__ = [
    "SpectralField",
    "SolveResult",
    "collision_operator",
    "reference_collision_operator",
    "transport_rhs",
    "solve_stationary",
    "solve_linear",
]


@dataclass
class SpectralField:
    """State of the solve: elastic line over depth, continuum over depth x energy."""

    elastic: np.ndarray      # (n_z,), units of the incident-mode density
    continuum: np.ndarray    # (n_z, n_e), density per unit energy

    @classmethod
    def zeros(cls, n_z: int, n_e: int) -> "SpectralField":
        return cls(elastic=np.zeros(n_z), continuum=np.zeros((n_z, n_e)))

    def copy(self) -> "SpectralField":
        return SpectralField(self.elastic.copy(), self.continuum.copy())


@dataclass
class SolveResult:
    field: SpectralField
    iterations: int
    residual_history: np.ndarray
    converged: bool
    diverged: bool = False
    clamp_events: int = 0
    clamp_max: float = 0.0
    conservation_report: object = field(default=None, repr=False)


def _combined_y(fld: SpectralField, tables: CollisionTables) -> np.ndarray:
    """Fold elastic line and continuum into one pair-weight matrix.

    The collision terms are bilinear in the total spectral content, so
    adding the (weightless) elastic line onto its grid node reproduces
    all four elastic/continuum pairings of the gain at once.
    """
    kappa = np.sqrt(tables.nodes)
    y = fld.continuum * (tables.weights / kappa)[None, :]
    y[:, tables.idx_ei] += fld.elastic / kappa[tables.idx_ei]
    return y


def collision_operator(fld: SpectralField, tables: CollisionTables,
                       egrid: EnergyGrid) -> SpectralField:
    """Collision increment (gains minus losses) at every depth node.

    The loss side contracts the combined pair weights against the
    sum-rule tables; the gain side goes through the backend kernel.  By
    construction of the elastic kernel, the flux-weighted sum of the
    returned components vanishes to rounding at every depth.
    """
    if tables.nodes.size != egrid.n:
        raise ValueError("collision tables were built for a different energy grid")
    if fld.continuum.shape[1] != egrid.n:
        raise ValueError("field and energy grid sizes disagree")
    n_z, n_e = fld.continuum.shape
    out = SpectralField.zeros(n_z, n_e)
    if tables.alpha == 0.0:
        return out
    y = _combined_y(fld, tables)
    kappa = np.sqrt(tables.nodes)
    # losses: L[j, m] = -(alpha / E_m) sum_n y[j, n] sigma[n, m]
    loss_rate = -(tables.alpha / tables.nodes[None, :]) * (y @ tables.sigma)
    backend.collision_gain(y, kappa, tables.alpha, out.continuum)
    out.continuum += fld.continuum * loss_rate
    out.elastic[:] = fld.elastic * loss_rate[:, tables.idx_ei]
    return out


def reference_collision_operator(fld: SpectralField, tables: CollisionTables,
                                 egrid: EnergyGrid) -> SpectralField:
    """Direct contraction against the full 3-index kernel table.

    Independent evaluation path used to validate the production operator;
    cost grows with the cube of the energy-grid size.
    """
    w = egrid.weights
    f_cc = tables.f_cc
    n_z, n_e = fld.continuum.shape
    out = SpectralField.zeros(n_z, n_e)
    if tables.alpha == 0.0:
        return out
    for j in range(n_z):
        e_el = fld.elastic[j]
        c = fld.continuum[j]
        wc = w * c
        loss = tables.g_ei_col * e_el + wc @ tables.g_cc
        gain = (
            tables.f_ei_pair * e_el * e_el
            + 2.0 * e_el * (wc @ tables.f_ei_rows)
            + np.einsum("n,p,npm->m", wc, wc, f_cc, optimize=True)
        )
        out.continuum[j] = c * loss + gain
        out.elastic[j] = e_el * (tables.g_ii * e_el + wc @ tables.g_ei_row)
    return out


def transport_rhs(fld: SpectralField, pmat: PropagatorMatrix, source: np.ndarray,
                  tables: CollisionTables | None, egrid: EnergyGrid):
    """One application of the fixed-point map: source + propagation + collisions.

    Negative entries produced by the collision loss are clamped at zero;
    the count and largest magnitude are returned so transient
    over-relaxation is visible rather than silently absorbed.
    """
    out = SpectralField(
        elastic=source + pmat.apply(fld.elastic),
        continuum=pmat.apply(fld.continuum),
    )
    if tables is not None and tables.alpha != 0.0:
        inc = collision_operator(fld, tables, egrid)
        out.elastic += inc.elastic
        out.continuum += inc.continuum
    neg_el = out.elastic < 0.0
    neg_cc = out.continuum < 0.0
    clamp_events = int(np.count_nonzero(neg_el)) + int(np.count_nonzero(neg_cc))
    clamp_max = 0.0
    if clamp_events:
        worst = 0.0
        if neg_el.any():
            worst = float(-out.elastic[neg_el].min())
        if neg_cc.any():
            worst = max(worst, float(-out.continuum[neg_cc].min()))
        clamp_max = worst
        np.maximum(out.elastic, 0.0, out=out.elastic)
        np.maximum(out.continuum, 0.0, out=out.continuum)
    return out, clamp_events, clamp_max


def _sup(fld: SpectralField) -> float:
    m_el = float(np.max(np.abs(fld.elastic))) if fld.elastic.size else 0.0
    m_cc = float(np.max(np.abs(fld.continuum))) if fld.continuum.size else 0.0
    return max(m_el, m_cc)


def solve_stationary(scenario: Scenario, pmat: PropagatorMatrix,
                     tables: CollisionTables | None, dgrid: DepthGrid,
                     egrid: EnergyGrid) -> SolveResult:
    """Damped source iteration to the stationary spectral field.

    Runs the interaction-free problem to convergence first (continuum
    identically zero there, so those sweeps are cheap) and uses it as the
    initial guess for the full iteration; the collision correction then
    starts close to the fixed point.  Non-convergence inside the
    iteration budget is reported through the ``converged`` flag rather
    than raised, and a numerical blow-up (possible for strong coupling
    without damping) stops early with ``diverged`` set.
    """
    from .diagnostics import conservation_audit  # deferred: diagnostics imports solver types

    n_z, n_e = dgrid.n, egrid.n
    source = np.exp(-dgrid.nodes)
    theta = scenario.damping
    history: list[float] = []
    fld = SpectralField.zeros(n_z, n_e)
    converged = False
    diverged = False
    clamp_events = 0
    clamp_max = 0.0
    budget = scenario.max_iter

    # interaction-free stage: only the elastic line evolves
    used = 0
    elastic = fld.elastic
    for _ in range(budget):
        new = source + pmat.apply(elastic)
        if theta != 1.0:
            new = (1.0 - theta) * elastic + theta * new
        used += 1
        change = float(np.max(np.abs(new - elastic))) / float(np.max(np.abs(new)))
        history.append(change)
        elastic = new
        if change <= scenario.tol:
            converged = True
            break
    fld.elastic = elastic

    interacting = tables is not None and tables.alpha != 0.0
    if interacting:
        converged = False
        for _ in range(budget - used):
            new, n_neg, worst = transport_rhs(fld, pmat, source, tables, egrid)
            if theta != 1.0:
                new.elastic = (1.0 - theta) * fld.elastic + theta * new.elastic
                new.continuum = (1.0 - theta) * fld.continuum + theta * new.continuum
            used += 1
            clamp_events += n_neg
            clamp_max = max(clamp_max, worst)
            if not (np.isfinite(new.elastic).all() and np.isfinite(new.continuum).all()):
                diverged = True
                history.append(float("nan"))
                fld = new
                break
            denom = _sup(new)
            change = _sup(SpectralField(new.elastic - fld.elastic,
                                        new.continuum - fld.continuum)) / denom
            history.append(change)
            fld = new
            if change <= scenario.tol:
                converged = True
                break

    result = SolveResult(
        field=fld,
        iterations=used,
        residual_history=np.asarray(history),
        converged=converged,
        diverged=diverged,
        clamp_events=clamp_events,
        clamp_max=clamp_max,
    )
    if interacting and not diverged:
        result.conservation_report = conservation_audit(
            fld, tables, egrid, clamp_max=clamp_max
        )
    return result


def solve_linear(scenario: Scenario, pmat: PropagatorMatrix, dgrid: DepthGrid,
                 egrid: EnergyGrid) -> SpectralField:
    """Interaction-free stationary field (collision tables switched off).

    Identical code path to :func:`solve_stationary` with no tables, so a
    zero-interaction scenario reproduces it bitwise; the continuum comes
    back exactly zero.
    """
    return solve_stationary(scenario, pmat, None, dgrid, egrid).field
