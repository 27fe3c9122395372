"""Backend selection for the batch kernels.

The compiled Cython module is used when importable; otherwise the numpy
fallback takes over.  Set ``PMFRISK_BACKEND=python`` to force the fallback.
All random draws happen outside the kernels (in the sampler, through a
seeded numpy Generator), so results for a given seed do not depend on the
backend beyond last-ulp rounding.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if _compiled is None or os.environ.get("PMFRISK_BACKEND", "").lower() in ("python", "numpy"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    _impl = _compiled
    BACKEND = "cython"


def get_backend() -> str:
    """Name of the active backend: 'cython' or 'python'."""
    return BACKEND


def available_backends() -> tuple[str, ...]:
    return ("python",) if _compiled is None else ("cython", "python")


def load_backend(name: str):
    """Module object for an explicit backend (benchmarks and parity tests)."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def barycentric_points(verts, sel, spacings, impl=None):
    """Points ``sum_j w_ij verts[sel[i], j]`` with w = normalized spacings."""
    impl = impl or _impl
    v = np.ascontiguousarray(verts, dtype=np.float64)
    s = np.ascontiguousarray(sel, dtype=np.intp)
    e = np.ascontiguousarray(spacings, dtype=np.float64)
    if v.ndim != 3 or e.ndim != 2 or s.ndim != 1:
        raise ValueError("verts must be (S,k+1,d), sel (n,), spacings (n,k+1)")
    if e.shape != (s.size, v.shape[1]):
        raise ValueError("spacings shape must be (len(sel), verts.shape[1])")
    return impl.barycentric_points(v, s, e)


def self_convolve(pmfs, steps, impl=None):
    """``steps``-fold self-convolution of each row of ``pmfs``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    impl = impl or _impl
    p = np.ascontiguousarray(np.atleast_2d(pmfs), dtype=np.float64)
    return impl.self_convolve(p, int(steps))


def relative_entropy_pairs(a, b, impl=None):
    """Rowwise I(a_i, b_i); either argument may be a single row."""
    impl = impl or _impl
    a2 = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b2 = np.atleast_2d(np.asarray(b, dtype=np.float64))
    n = max(a2.shape[0], b2.shape[0])
    a2 = np.ascontiguousarray(np.broadcast_to(a2, (n, a2.shape[1])))
    b2 = np.ascontiguousarray(np.broadcast_to(b2, (n, b2.shape[1])))
    if a2.shape != b2.shape:
        raise ValueError("row lengths of a and b must agree")
    return impl.relative_entropy_pairs(a2, b2)
