"""Depth-coupling kernel of the disorder-averaged single-particle motion.

Between collisions a particle propagates with an exponentially attenuated
free path (mean free path = 1 in reduced units) and isotropic re-emission.
Integrating that 3D kernel over the transverse plane of the slab leaves
the classical one-dimensional kernel (1/2) E1(|dz|), where E1 is the
exponential integral.  The kernel is integrated exactly over source cells
via its antiderivative, which keeps the logarithmic singularity at zero
separation harmless and makes row sums agree with the analytic two-sided
leakage to near machine precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import DepthGrid, EnergyGrid

__all__ = [
    "exp_integral_e1",
    "milne_kernel",
    "kernel_cumulative",
    "face_escape_probability",
    "PropagatorMatrix",
    "build_propagator_matrix",
    "ballistic_source",
]

_EULER_GAMMA = 0.5772156649015328606


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Power series below x = 1, modified-Lentz continued fraction above;
    both converge to better than 1e-12 relative over the full range.
    """
    if x <= 0:
        raise ValueError(f"E1 requires x > 0, got {x}")
    if x <= 1.0:
        total = 0.0
        term = 1.0
        for k in range(1, 64):
            term *= -x / k
            contrib = term / k
            total += contrib
            if abs(contrib) < 1e-18 * max(abs(total), 1e-300):
                break
        return -_EULER_GAMMA - math.log(x) - total
    # E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...))))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 256):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x)


def milne_kernel(dz: float) -> float:
    """Plane-integrated propagation kernel (1/2) E1(|dz|).

    Integrably singular at zero separation; the matrix builder integrates
    over cells instead of ever evaluating the kernel there.
    """
    if dz < 0:
        raise ValueError(f"separation must be >= 0, got {dz}")
    if dz == 0.0:
        return math.inf
    return 0.5 * exp_integral_e1(dz)


def kernel_cumulative(x: float) -> float:
    """Integral of the kernel from 0 to x: (1/2)(x E1(x) - exp(-x) + 1).

    Increases from 0 to the half-line total of 1/2 as x grows.
    """
    if x < 0:
        raise ValueError(f"upper limit must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    return 0.5 * (x * exp_integral_e1(x) - math.exp(-x) + 1.0)


def face_escape_probability(x: float) -> float:
    """Probability that a scattered particle crosses a face x away unscattered.

    Equals 1/2 minus the cumulative kernel, i.e. (1/2) E2(x); evaluated in
    the cancellation-safe form (exp(-x) - x E1(x))/2.
    """
    if x < 0:
        raise ValueError(f"distance must be >= 0, got {x}")
    if x == 0.0:
        return 0.5
    return 0.5 * (math.exp(-x) - x * exp_integral_e1(x))


@dataclass(frozen=True)
class PropagatorMatrix:
    """Cell-integrated depth coupling.

    ``k[j, jp]`` is the probability that a particle scattered in cell
    ``jp`` scatters next in cell ``j``.  The matrix is symmetric Toeplitz
    on a uniform grid and independent of energy (the disorder mean free
    path carries no energy dependence), so a single instance serves every
    energy node.  ``escape_lo``/``escape_hi`` hold the per-cell
    probabilities of leaving through the z=0 and z=b faces instead; rows
    plus the two escapes account for all probability.
    """

    k: np.ndarray
    row_sums: np.ndarray
    escape_lo: np.ndarray
    escape_hi: np.ndarray

    def __post_init__(self):
        self.k.setflags(write=False)
        self.row_sums.setflags(write=False)
        self.escape_lo.setflags(write=False)
        self.escape_hi.setflags(write=False)

    @property
    def n(self) -> int:
        return self.k.shape[0]

    def apply(self, field: np.ndarray) -> np.ndarray:
        """Matrix-vector (or matrix-matrix over energy columns) product."""
        return self.k @ field


def build_propagator_matrix(dgrid: DepthGrid) -> PropagatorMatrix:
    """Assemble the dense coupling matrix by exact cell integration.

    For a target node at distance d from a source cell of width h the
    coupling is the cumulative kernel difference across the cell, written
    in terms of the tail function to avoid cancellation at large d; the
    self-cell integral splits symmetrically about the node.
    """
    n_z = dgrid.n
    h = dgrid.h
    # Toeplitz: coupling depends only on |j - jp|
    first = np.empty(n_z)
    first[0] = 2.0 * kernel_cumulative(0.5 * h)
    for m in range(1, n_z):
        d = m * h
        first[m] = face_escape_probability(d - 0.5 * h) - face_escape_probability(d + 0.5 * h)
    idx = np.abs(np.arange(n_z)[:, None] - np.arange(n_z)[None, :])
    k = first[idx]
    escape_lo = np.array([face_escape_probability(z) for z in dgrid.nodes])
    escape_hi = np.array([face_escape_probability(dgrid.b - z) for z in dgrid.nodes])
    row_sums = k.sum(axis=1)
    return PropagatorMatrix(k=k, row_sums=row_sums, escape_lo=escape_lo, escape_hi=escape_hi)


def ballistic_source(dgrid: DepthGrid, egrid: EnergyGrid) -> np.ndarray:
    """First-scattering source exp(-z) of the attenuated incident mode.

    Feeds only the elastic line at the incident energy; the interaction
    strength plays no role in it.
    """
    del egrid  # the source is monochromatic at the incident energy
    return np.exp(-dgrid.nodes)
