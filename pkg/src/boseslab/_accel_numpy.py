"""Pure-numpy implementations of the hot kernels.

Selected via the BOSESLAB_NO_NUMBA environment flag or when numba is not
installed.  Results agree with the numba path to rounding (the collision
gain uses an FFT autocorrelation, so individual floats can differ in the
last bits); Monte Carlo tallies follow the identical per-id random
streams and are integer-exact per backend.
"""
from __future__ import annotations

import numpy as np

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53

_WALK_CHUNK = 1 << 18
_PAIR_CHUNK = 1 << 20


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def _unit(z: np.ndarray) -> np.ndarray:
    return (z >> np.uint64(11)).astype(np.float64) * _U64_TO_UNIT


def collision_gain(Y: np.ndarray, kappa: np.ndarray, alpha: float, out: np.ndarray) -> np.ndarray:
    """Vectorized counterpart of the numba gain kernel (see _accel_numba)."""
    n_rows, n = Y.shape
    sufx = np.zeros((n_rows, n))
    sufx[:, : n - 1] = np.cumsum(Y[:, :0:-1], axis=1)[:, ::-1]
    pref = np.cumsum(Y * kappa[None, :], axis=1)
    low = kappa[None, :] * sufx * sufx
    mid = 2.0 * pref * (sufx + Y) - Y * Y * kappa[None, :]

    # pair-sum autocorrelation of every row via FFT
    spec = np.fft.rfft(Y, n=2 * n, axis=1)
    conv = np.fft.irfft(spec * spec, n=2 * n, axis=1)[:, : 2 * n - 1]
    high = np.zeros((n_rows, n))
    for d in range(1, n + 1):
        dz = d - 1
        ydz = Y[:, dz]
        conv[:, 2 * dz] -= ydz * ydz
        if dz + 1 < n:
            conv[:, 2 * dz + 1 : dz + n] -= 2.0 * ydz[:, None] * Y[:, dz + 1 :]
        k0 = d - 1
        hi = min(n, 2 * n - 1 - k0)
        high[:, :hi] += kappa[dz] * conv[:, k0 : k0 + hi]
    out[:, :] = alpha / kappa[None, :] * (low + mid + high)
    return out


def slab_walk_tally(b: float, h: float, n_cells: int, n_walkers: int, seed: int):
    """Lockstep-vectorized slab walk; identical streams to the numba path."""
    counts = np.zeros(n_cells, dtype=np.int64)
    trans = 0
    refl = 0
    with np.errstate(over="ignore"):
        for lo in range(0, n_walkers, _WALK_CHUNK):
            hi = min(n_walkers, lo + _WALK_CHUNK)
            ids = np.arange(lo + 1, hi + 1, dtype=np.uint64)
            state = _mix64(np.uint64(seed) + _GOLD * ids)
            z = np.zeros(hi - lo)
            mu = np.ones(hi - lo)
            while state.size:
                state += _GOLD
                step = -np.log(1.0 - _unit(_mix64(state)))
                z += mu * step
                out_lo = z < 0.0
                out_hi = z >= b
                refl += int(np.count_nonzero(out_lo))
                trans += int(np.count_nonzero(out_hi))
                alive = ~(out_lo | out_hi)
                z = z[alive]
                state = state[alive]
                cells = np.minimum((z / h).astype(np.int64), n_cells - 1)
                np.add.at(counts, cells, 1)
                state += _GOLD
                mu = 2.0 * _unit(_mix64(state)) - 1.0
    return counts, trans, refl


def pair_collision_tally(e1: float, e2: float, n_samples: int, seed: int,
                         n_bins: int, bin_width: float) -> np.ndarray:
    """Vectorized pair-collision sampler; identical streams to the numba path."""
    counts = np.zeros(n_bins, dtype=np.int64)
    p1 = np.sqrt(e1)
    p2 = np.sqrt(e2)
    with np.errstate(over="ignore"):
        for lo in range(0, n_samples, _PAIR_CHUNK):
            hi = min(n_samples, lo + _PAIR_CHUNK)
            ids = np.arange(lo + 1, hi + 1, dtype=np.uint64)
            state = _mix64(np.uint64(seed) + _GOLD * ids)
            draws = []
            for _ in range(6):
                state += _GOLD
                draws.append(_unit(_mix64(state)))
            mu1, ph1, mu2, ph2, mun, phn = draws
            mu1 = 2.0 * mu1 - 1.0
            mu2 = 2.0 * mu2 - 1.0
            mun = 2.0 * mun - 1.0
            ph1 *= 2.0 * np.pi
            ph2 *= 2.0 * np.pi
            phn *= 2.0 * np.pi
            s1 = np.sqrt(np.maximum(0.0, 1.0 - mu1 * mu1))
            s2 = np.sqrt(np.maximum(0.0, 1.0 - mu2 * mu2))
            sn = np.sqrt(np.maximum(0.0, 1.0 - mun * mun))
            cx = 0.5 * (p1 * s1 * np.cos(ph1) + p2 * s2 * np.cos(ph2))
            cy = 0.5 * (p1 * s1 * np.sin(ph1) + p2 * s2 * np.sin(ph2))
            cz = 0.5 * (p1 * mu1 + p2 * mu2)
            qx = 0.5 * (p1 * s1 * np.cos(ph1) - p2 * s2 * np.cos(ph2))
            qy = 0.5 * (p1 * s1 * np.sin(ph1) - p2 * s2 * np.sin(ph2))
            qz = 0.5 * (p1 * mu1 - p2 * mu2)
            q = np.sqrt(qx * qx + qy * qy + qz * qz)
            ox = cx + q * sn * np.cos(phn)
            oy = cy + q * sn * np.sin(phn)
            oz = cz + q * mun
            e3 = ox * ox + oy * oy + oz * oz
            idx = np.minimum((e3 / bin_width).astype(np.int64), n_bins - 1)
            np.add.at(counts, idx, 1)
    return counts
