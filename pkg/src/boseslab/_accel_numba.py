"""Numba implementations of the hot kernels.

Import fails cleanly when numba is unavailable; :mod:`boseslab.backend`
then falls back to the numpy implementations.  All kernels are written so
results are bitwise independent of the worker count: parallel loops only
ever write disjoint outputs (collision gain) or merge integer tallies
(Monte Carlo), never reduce floating point across threads.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53

_MC_CHUNKS = 256  # fixed tally partitioning, independent of thread count


@njit(cache=True, inline="always")
def _mix64(z):
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _unit(z):
    return float(z >> np.uint64(11)) * _U64_TO_UNIT


@njit(cache=True, parallel=True, fastmath=True)
def collision_gain(Y, kappa, alpha, out):
    """Gain side of the collision operator for every depth row of Y.

    Y[j, n] carries the flux-like weights w_n c_n / kappa_n with the
    elastic line folded into its grid node.  For each output node m the
    pair sum splits by which square root is smallest: below both pair
    energies (suffix-sum square), between them (prefix/suffix product),
    or above the larger one, where the sum over pairs at fixed pair-sum
    is a thresholded autocorrelation evaluated by descending over the
    threshold.  Cost is O(n_e^2) per row instead of the O(n_e^3) of the
    direct triple contraction, with identical algebra.
    """
    n_rows, n = Y.shape
    for j in prange(n_rows):
        y = Y[j]
        sufx = np.empty(n)      # sum over nodes strictly above m
        acc = 0.0
        for mm in range(n - 1, -1, -1):
            sufx[mm] = acc
            acc += y[mm]
        pref = np.empty(n)      # kappa-weighted prefix sums
        acc = 0.0
        for mm in range(n):
            acc += y[mm] * kappa[mm]
            pref[mm] = acc
        # full pair-sum autocorrelation
        conv = np.zeros(2 * n - 1)
        for i in range(n):
            yi = y[i]
            if yi != 0.0:
                conv[2 * i] += yi * yi
                for k in range(i + 1, n):
                    conv[i + k] += 2.0 * yi * y[k]
        # high-branch accumulation: peel pairs whose lower member is the
        # threshold, then gather the shifted remainder
        high = np.zeros(n)
        for d in range(1, n + 1):
            dz = d - 1
            ydz = y[dz]
            if ydz != 0.0:
                conv[2 * dz] -= ydz * ydz
                for k in range(dz + 1, n):
                    conv[dz + k] -= 2.0 * ydz * y[k]
            k0 = d - 1
            hi = n if n <= 2 * n - 1 - k0 else 2 * n - 1 - k0
            kd = kappa[dz]
            for m0 in range(hi):
                high[m0] += kd * conv[k0 + m0]
        for mm in range(n):
            low = kappa[mm] * sufx[mm] * sufx[mm]
            mid = 2.0 * pref[mm] * (sufx[mm] + y[mm]) - y[mm] * y[mm] * kappa[mm]
            out[j, mm] = alpha / kappa[mm] * (low + mid + high[mm])
    return out


@njit(cache=True, parallel=True)
def slab_walk_tally(b, h, n_cells, n_walkers, seed):
    """Random-walk transport through the slab with per-walker RNG streams.

    Walkers enter at z = 0 along +z, fly exponential free paths along
    their current direction cosine, and re-emerge isotropically at each
    scattering.  Scattering events are tallied per depth cell; exits are
    counted as transmitted (z >= b) or reflected (z < 0).  Streams are
    keyed by walker index, so tallies are identical for any thread count.
    """
    counts = np.zeros((_MC_CHUNKS, n_cells), dtype=np.int64)
    trans = np.zeros(_MC_CHUNKS, dtype=np.int64)
    refl = np.zeros(_MC_CHUNKS, dtype=np.int64)
    per = (n_walkers + _MC_CHUNKS - 1) // _MC_CHUNKS
    for c in prange(_MC_CHUNKS):
        lo = c * per
        hi = min(n_walkers, lo + per)
        for wid in range(lo, hi):
            state = _mix64(np.uint64(seed) + _GOLD * np.uint64(wid + 1))
            z = 0.0
            mu = 1.0
            while True:
                state = state + _GOLD
                step = -math.log(1.0 - _unit(_mix64(state)))
                z += mu * step
                if z < 0.0:
                    refl[c] += 1
                    break
                if z >= b:
                    trans[c] += 1
                    break
                cell = int(z / h)
                if cell >= n_cells:
                    cell = n_cells - 1
                counts[c, cell] += 1
                state = state + _GOLD
                mu = 2.0 * _unit(_mix64(state)) - 1.0
    return counts.sum(axis=0), trans.sum(), refl.sum()


@njit(cache=True, parallel=True)
def pair_collision_tally(e1, e2, n_samples, seed, n_bins, bin_width):
    """Outgoing-energy histogram of isotropic s-wave pair collisions.

    Each sample draws two isotropic momenta of fixed magnitudes
    sqrt(e1), sqrt(e2), redraws the relative-momentum direction
    isotropically with conserved magnitude, and tallies one outgoing
    particle's energy.  Per-sample RNG streams keep the histogram
    independent of the worker count.
    """
    counts = np.zeros((_MC_CHUNKS, n_bins), dtype=np.int64)
    per = (n_samples + _MC_CHUNKS - 1) // _MC_CHUNKS
    p1 = math.sqrt(e1)
    p2 = math.sqrt(e2)
    for c in prange(_MC_CHUNKS):
        lo = c * per
        hi = min(n_samples, lo + per)
        for sid in range(lo, hi):
            state = _mix64(np.uint64(seed) + _GOLD * np.uint64(sid + 1))
            state = state + _GOLD
            mu1 = 2.0 * _unit(_mix64(state)) - 1.0
            state = state + _GOLD
            ph1 = 2.0 * math.pi * _unit(_mix64(state))
            state = state + _GOLD
            mu2 = 2.0 * _unit(_mix64(state)) - 1.0
            state = state + _GOLD
            ph2 = 2.0 * math.pi * _unit(_mix64(state))
            state = state + _GOLD
            mun = 2.0 * _unit(_mix64(state)) - 1.0
            state = state + _GOLD
            phn = 2.0 * math.pi * _unit(_mix64(state))
            s1 = math.sqrt(max(0.0, 1.0 - mu1 * mu1))
            s2 = math.sqrt(max(0.0, 1.0 - mu2 * mu2))
            sn = math.sqrt(max(0.0, 1.0 - mun * mun))
            k1x = p1 * s1 * math.cos(ph1)
            k1y = p1 * s1 * math.sin(ph1)
            k1z = p1 * mu1
            k2x = p2 * s2 * math.cos(ph2)
            k2y = p2 * s2 * math.sin(ph2)
            k2z = p2 * mu2
            cx = 0.5 * (k1x + k2x)
            cy = 0.5 * (k1y + k2y)
            cz = 0.5 * (k1z + k2z)
            qx = 0.5 * (k1x - k2x)
            qy = 0.5 * (k1y - k2y)
            qz = 0.5 * (k1z - k2z)
            q = math.sqrt(qx * qx + qy * qy + qz * qz)
            ox = cx + q * sn * math.cos(phn)
            oy = cy + q * sn * math.sin(phn)
            oz = cz + q * mun
            e3 = ox * ox + oy * oy + oz * oz
            idx = int(e3 / bin_width)
            if idx >= n_bins:
                idx = n_bins - 1
            counts[c, idx] += 1
    return counts.sum(axis=0)
