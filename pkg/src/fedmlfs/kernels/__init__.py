"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise the
numpy fallback is used. Set FEDMLFS_KERNELS=numpy (or =native) to force a
backend, e.g. for the benchmark in benchmarks/bench_kernels.py.
"""

import os

from . import _numpy

try:
    from . import _native
except ImportError:
    _native = None


def _pick():
    choice = os.environ.get("FEDMLFS_KERNELS", "auto").lower()
    if choice == "numpy":
        return _numpy
    if choice == "native":
        if _native is None:
            raise ImportError(
                "FEDMLFS_KERNELS=native but the compiled extension is not "
                "available; reinstall with a C compiler present")
        return _native
    if choice != "auto":
        raise ValueError(f"unknown FEDMLFS_KERNELS value: {choice!r}")
    return _native if _native is not None else _numpy


_impl = _pick()

BACKEND = _impl.BACKEND
similarity_matrix = _impl.similarity_matrix
row_sums = _impl.row_sums
intersection_row_sums = _impl.intersection_row_sums
pairwise_min_totals = _impl.pairwise_min_totals

__all__ = [
    "BACKEND",
    "similarity_matrix",
    "row_sums",
    "intersection_row_sums",
    "pairwise_min_totals",
]
