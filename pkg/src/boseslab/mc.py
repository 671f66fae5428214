"""Independent Monte Carlo validators.

Two samplers cross-check the deterministic solver from the outside: a
random-walk transport sampler for the slab propagation (free paths and
isotropic re-emission drawn directly, no depth discretization), and a
pair-collision kinematics sampler for the energy-redistribution kernel
(isotropic incoming momenta, isotropic redraw of the relative momentum).
Random streams are keyed per walker/sample id, so results depend only on
(seed, sample count), never on chunking or worker count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .scenario import DepthGrid

__all__ = [
    "McHistogram",
    "WalkResult",
    "KernelComparison",
    "mc_slab_walk",
    "mc_pair_collision",
    "reference_bin_masses",
    "compare_histogram_to_kernel",
    "walk_density_grid",
]


@dataclass
class McHistogram:
    """Tally histogram with its provenance and binomial errors."""

    bin_edges: np.ndarray
    counts: np.ndarray
    n_samples: int
    seed: int

    @property
    def bin_widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def density(self) -> np.ndarray:
        """Counts normalized to a probability density over the binned range."""
        return self.counts / (self.n_samples * self.bin_widths)

    @property
    def density_se(self) -> np.ndarray:
        p = self.counts / self.n_samples
        return np.sqrt(p * (1.0 - p) / self.n_samples) / self.bin_widths


@dataclass
class WalkResult:
    """Slab-walk tallies: per-cell scattering events plus absorbing outcomes."""

    events: McHistogram
    transmitted: int
    reflected: int

    @property
    def n_walkers(self) -> int:
        return self.events.n_samples

    @property
    def transmitted_fraction(self) -> float:
        return self.transmitted / self.n_walkers

    @property
    def transmitted_se(self) -> float:
        p = self.transmitted_fraction
        return float(np.sqrt(p * (1.0 - p) / self.n_walkers))

    @property
    def reflected_fraction(self) -> float:
        return self.reflected / self.n_walkers

    @property
    def event_density(self) -> np.ndarray:
        """Scattering events per unit depth per incident walker."""
        return self.events.counts / (self.n_walkers * self.events.bin_widths)


@dataclass
class KernelComparison:
    """Per-bin z-scores of a histogram against a reference shape."""

    z_scores: np.ndarray
    max_abs_z: float
    frac_beyond_3sigma: float

    @property
    def n_bins(self) -> int:
        return self.z_scores.size


def mc_slab_walk(b: float, n_walkers: int, seed: int, n_cells: int = 250) -> WalkResult:
    """Sample the linear slab-transport problem by direct random walk.

    Walkers enter at z = 0 moving along +z; free paths are exponential
    with unit mean along the current 3D direction, re-emission is
    isotropic.  Absorbing exits are tallied separately from the per-cell
    scattering-event histogram, so transmitted + reflected equals the
    walker count exactly.
    """
    if n_walkers < 1:
        raise ValueError("need at least one walker")
    if b <= 0:
        raise ValueError("slab thickness must be positive")
    h = b / n_cells
    counts, trans, refl = backend.slab_walk_tally(
        float(b), float(h), int(n_cells), int(n_walkers), int(seed)
    )
    edges = np.linspace(0.0, b, n_cells + 1)
    hist = McHistogram(bin_edges=edges, counts=counts, n_samples=n_walkers, seed=seed)
    return WalkResult(events=hist, transmitted=int(trans), reflected=int(refl))


def mc_pair_collision(e1: float, e2: float, n_samples: int, seed: int,
                      n_bins: int = 100) -> McHistogram:
    """Sample outgoing energies of isotropic binary collisions.

    Momenta of magnitudes sqrt(e1), sqrt(e2) are drawn with independent
    isotropic directions; the relative momentum direction is redrawn
    isotropically at conserved magnitude and one outgoing energy
    |K/2 + q n|^2 is tallied.  Energy conservation confines outcomes to
    (0, e1 + e2), which the bins tile exactly.
    """
    if e1 <= 0 or e2 <= 0:
        raise ValueError(f"pair energies must be positive, got ({e1}, {e2})")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    total = e1 + e2
    width = total / n_bins
    counts = backend.pair_collision_tally(
        float(e1), float(e2), int(n_samples), int(seed), int(n_bins), float(width)
    )
    edges = np.linspace(0.0, total, n_bins + 1)
    return McHistogram(bin_edges=edges, counts=counts, n_samples=n_samples, seed=seed)


def reference_bin_masses(e1: float, e2: float, bin_edges: np.ndarray) -> np.ndarray:
    """Exact bin integrals of the flux-weighted redistribution trapezoid.

    The outgoing-energy density of the kinematics sampler is proportional
    to min(sqrt(E), sqrt(min(e1,e2)), sqrt(e1+e2-E)); each branch has an
    elementary antiderivative, so bin masses are computed exactly rather
    than sampled at bin centers.
    """
    lo, hi = min(e1, e2), max(e1, e2)
    total = e1 + e2

    def antiderivative(x: np.ndarray) -> np.ndarray:
        x = np.clip(x, 0.0, total)
        out = np.where(
            x <= lo,
            (2.0 / 3.0) * np.power(x, 1.5),
            np.where(
                x <= hi,
                (2.0 / 3.0) * lo ** 1.5 + np.sqrt(lo) * (x - lo),
                (2.0 / 3.0) * lo ** 1.5
                + np.sqrt(lo) * (hi - lo)
                + (2.0 / 3.0) * (np.power(total - hi, 1.5) - np.power(total - x, 1.5)),
            ),
        )
        return out

    edges = np.asarray(bin_edges, dtype=np.float64)
    return np.diff(antiderivative(edges))


def compare_histogram_to_kernel(hist: McHistogram, reference_masses: np.ndarray) -> KernelComparison:
    """Per-bin z-scores of the tally against a reference shape.

    The reference is normalized to the total count, expected counts are
    binomial, and bins are scored as (observed - expected) / se.  Bins
    whose expected count vanishes only score nonzero if they were hit.
    """
    reference_masses = np.asarray(reference_masses, dtype=np.float64)
    if reference_masses.shape != hist.counts.shape:
        raise ValueError(
            f"support mismatch: histogram has {hist.counts.size} bins, "
            f"reference has {reference_masses.size}"
        )
    n = int(hist.counts.sum())
    if n == 0:
        raise ValueError("empty histogram")
    total_mass = float(reference_masses.sum())
    if total_mass <= 0:
        raise ValueError("reference shape has no mass on the histogram support")
    p = reference_masses / total_mass
    expected = n * p
    se = np.sqrt(n * p * (1.0 - p))
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(se > 0.0, (hist.counts - expected) / se,
                     np.where(hist.counts > 0, np.inf, 0.0))
    frac = float(np.count_nonzero(np.abs(z) > 3.0)) / z.size
    return KernelComparison(z_scores=z, max_abs_z=float(np.max(np.abs(z))), frac_beyond_3sigma=frac)


def walk_density_grid(result: WalkResult, dgrid: DepthGrid) -> np.ndarray:
    """Event density interpolated onto a depth grid for solver comparison."""
    centers = 0.5 * (result.events.bin_edges[:-1] + result.events.bin_edges[1:])
    return np.interp(dgrid.nodes, centers, result.event_density)
