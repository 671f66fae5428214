"""Hot-kernel backend selection.

The numba implementations are used when available; setting the
environment variable ``BOSESLAB_NO_NUMBA`` to a truthy value (or running
without numba installed) selects the pure-numpy fallback.  Both backends
expose the same three kernels with identical semantics; see
``benchmarks/bench_backends.py`` for a throughput comparison.
"""
from __future__ import annotations

import os

__all__ = [
    "USING_NUMBA",
    "backend_name",
    "set_num_threads",
    "collision_gain",
    "slab_walk_tally",
    "pair_collision_tally",
]


def _numpy_forced() -> bool:
    return os.environ.get("BOSESLAB_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USING_NUMBA = False
if not _numpy_forced():
    try:
        from ._accel_numba import (  # noqa: F401
            collision_gain,
            pair_collision_tally,
            slab_walk_tally,
        )

        USING_NUMBA = True
    except ImportError:
        pass
if not USING_NUMBA:
    from ._accel_numpy import (  # noqa: F401
        collision_gain,
        pair_collision_tally,
        slab_walk_tally,
    )


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"


def set_num_threads(n: int) -> None:
    """Pin the numba worker count; 0 leaves the automatic choice.

    Kernel results are bitwise independent of the worker count by
    construction, so this only affects throughput.  A no-op on the numpy
    backend.
    """
    if USING_NUMBA and n > 0:
        import numba

        numba.set_num_threads(n)
