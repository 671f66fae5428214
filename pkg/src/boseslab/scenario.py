"""Problem definition and discretization grids.

Everything downstream works in reduced units: lengths in disorder mean
free paths, energies in units of the incident energy, densities in units
of the incident-mode density.  A problem is then fully specified by the
optical thickness ``b`` (slab thickness in mean free paths), the
interaction ratio ``alpha`` (disorder mean free path over collision mean
free path), and the numerical controls.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "ConfigurationError",
    "RegimeWarning",
    "Scenario",
    "EnergyGrid",
    "DepthGrid",
    "build_scenario",
    "build_energy_grid",
    "build_depth_grid",
    "SCENARIO_DEFAULTS",
]


class ConfigurationError(ValueError):
    """Invalid problem configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"configuration error for key '{key}': {message}")


class RegimeWarning(UserWarning):
    """The requested parameters strain the weak-interaction transport regime."""


# Numerical controls applied when a configuration omits them.  The energy
# cutoff of 6 incident energies leaves a Maxwell-Boltzmann tail mass of
# order exp(-12); the iteration cap accommodates thick slabs, where the
# diffusive mode contracts only by ~1 - 1/b^2 per sweep.
SCENARIO_DEFAULTS: dict[str, float] = {
    "e_i": 1.0,
    "e_max": 6.0,
    "n_e": 240,
    "n_z": 250,
    "damping": 1.0,
    "tol": 1e-10,
    "max_iter": 50_000,
}


@dataclass(frozen=True)
class Scenario:
    """Dimensionless problem definition plus numerical controls."""

    b: float                 # optical thickness, slab depth in mean free paths
    alpha: float             # ratio of disorder to collision mean free path
    e_i: float = 1.0         # incident energy in units of itself
    e_max: float = 6.0       # energy-grid cutoff, units of e_i
    n_e: int = 240
    n_z: int = 250
    damping: float = 1.0     # fixed-point relaxation factor, (0, 1]
    tol: float = 1e-10       # relative sup-norm change at convergence
    max_iter: int = 50_000


@dataclass(frozen=True)
class EnergyGrid:
    """Uniform energy nodes on (0, e_max] with trapezoidal weights.

    The incident energy sits exactly on a node (``nodes[idx_ei]``, 0-based
    index); the grid is built from integer multiples of the spacing so no
    floating-point drift is possible.  Weights follow the trapezoidal rule
    on [0, e_max] with the integrand taken to vanish at zero energy.
    """

    nodes: np.ndarray
    weights: np.ndarray
    idx_ei: int

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def delta(self) -> float:
        return float(self.nodes[0])


@dataclass(frozen=True)
class DepthGrid:
    """Uniform cell-centered depth grid tiling [0, b] exactly."""

    nodes: np.ndarray        # cell centers, strictly inside (0, b)
    cell_edges: np.ndarray   # n_z + 1 edges, first 0 and last b

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.cell_edges.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def h(self) -> float:
        return float(self.cell_edges[1] - self.cell_edges[0])

    @property
    def b(self) -> float:
        return float(self.cell_edges[-1])


def _require_number(config: Mapping[str, float], key: str) -> float:
    if key not in config:
        raise ConfigurationError(key, "required key is missing")
    try:
        value = float(config[key])
    except (TypeError, ValueError):
        raise ConfigurationError(key, f"value {config[key]!r} is not numeric") from None
    if not np.isfinite(value):
        raise ConfigurationError(key, f"value {value!r} is not finite")
    return value


def build_scenario(config: Mapping[str, float]) -> Scenario:
    """Validate a parsed key-value map and produce a :class:`Scenario`.

    Raises :class:`ConfigurationError` naming the offending key on any
    domain violation.  Emits a non-fatal :class:`RegimeWarning` when the
    interaction is strong enough to strain the underlying weak-coupling
    assumptions (``alpha >= 0.1``) or too weak for collisional
    redistribution to be observable over the traversal (``b**2 * alpha < 1``).
    """
    merged: dict[str, float] = dict(SCENARIO_DEFAULTS)
    merged.update(config)

    b = _require_number(merged, "b")
    if b <= 0:
        raise ConfigurationError("b", f"optical thickness must be > 0, got {b}")
    alpha = _require_number(merged, "alpha")
    if alpha < 0:
        raise ConfigurationError("alpha", f"interaction ratio must be >= 0, got {alpha}")
    e_i = _require_number(merged, "e_i")
    if e_i != 1.0:
        raise ConfigurationError("e_i", "incident energy is the energy unit and must be 1")
    e_max = _require_number(merged, "e_max")
    if e_max < 2.0 * e_i:
        raise ConfigurationError(
            "e_max",
            f"cutoff must be >= 2*e_i = {2.0 * e_i} to contain first-collision support, got {e_max}",
        )
    n_e = _require_number(merged, "n_e")
    if n_e != int(n_e) or int(n_e) < 2:
        raise ConfigurationError("n_e", f"need an integer >= 2, got {merged['n_e']!r}")
    n_z = _require_number(merged, "n_z")
    if n_z != int(n_z) or int(n_z) < 2:
        raise ConfigurationError("n_z", f"need an integer >= 2, got {merged['n_z']!r}")
    damping = _require_number(merged, "damping")
    if not (0.0 < damping <= 1.0):
        raise ConfigurationError("damping", f"relaxation factor must lie in (0, 1], got {damping}")
    tol = _require_number(merged, "tol")
    if tol <= 0:
        raise ConfigurationError("tol", f"tolerance must be > 0, got {tol}")
    max_iter = _require_number(merged, "max_iter")
    if max_iter != int(max_iter) or int(max_iter) < 1:
        raise ConfigurationError("max_iter", f"need an integer >= 1, got {merged['max_iter']!r}")

    scenario = Scenario(
        b=b,
        alpha=alpha,
        e_i=e_i,
        e_max=e_max,
        n_e=int(n_e),
        n_z=int(n_z),
        damping=damping,
        tol=tol,
        max_iter=int(max_iter),
    )

    if alpha >= 0.1:
        warnings.warn(
            f"alpha = {alpha} is large: collisions are no longer rare compared with "
            "disorder scattering, so the transport closure is strained",
            RegimeWarning,
            stacklevel=2,
        )
    elif b * b * alpha < 1.0:
        warnings.warn(
            f"b^2 * alpha = {b * b * alpha:.3g} < 1: fewer than one collision expected "
            "per traversal, thermalization will not be observable",
            RegimeWarning,
            stacklevel=2,
        )

    # validate grid divisibility early so failures point at the config
    build_energy_grid(scenario.e_max, scenario.n_e, scenario.e_i)
    return scenario


def build_energy_grid(e_max: float, n_e: int, e_i: float = 1.0) -> EnergyGrid:
    """Build the uniform energy grid with the incident energy on a node.

    The spacing must divide ``e_i`` exactly; nodes are constructed as
    integer multiples of ``e_i / m`` so that ``nodes[idx_ei] == e_i``
    bitwise.  This keeps every kink of the collision kernel (which occur
    at pair energies) on grid nodes, preserving the accuracy of the
    trapezoidal quadrature.
    """
    if n_e < 2:
        raise ConfigurationError("n_e", f"need at least 2 energy nodes, got {n_e}")
    if e_max <= 0 or e_i <= 0:
        raise ConfigurationError("e_max", "energies must be positive")
    delta = e_max / n_e
    m_float = e_i / delta
    m = int(round(m_float))
    if m < 1 or abs(m_float - m) > 1e-9 * max(m, 1):
        raise ConfigurationError(
            "n_e",
            f"incident energy {e_i} is not representable on the grid: "
            f"e_i / (e_max/n_e) = {m_float} is not an integer",
        )
    # (k * e_i) / m is exact for k = m, so the incident node carries no drift
    nodes = np.arange(1, n_e + 1, dtype=np.float64) * e_i / m
    weights = np.full(n_e, e_i / m, dtype=np.float64)
    weights[-1] *= 0.5
    return EnergyGrid(nodes=nodes, weights=weights, idx_ei=m - 1)


def build_depth_grid(b: float, n_z: int) -> DepthGrid:
    """Build the uniform cell-centered depth grid over [0, b]."""
    if n_z < 2:
        raise ConfigurationError("n_z", f"need at least 2 depth cells, got {n_z}")
    if b <= 0:
        raise ConfigurationError("b", f"slab thickness must be > 0, got {b}")
    edges = np.linspace(0.0, b, n_z + 1)
    nodes = 0.5 * (edges[:-1] + edges[1:])
    return DepthGrid(nodes=nodes, cell_edges=edges)
