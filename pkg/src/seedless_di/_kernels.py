"""Hot numeric kernels: Walsh-Hadamard transforms and truth-table scans.

Two interchangeable backends produce bit-identical float64 results:

* ``numba`` -- ``@njit``-compiled loops (default when numba imports cleanly)
* ``numpy`` -- vectorised reshape/stride fallback

Set ``SEEDLESS_DI_BACKEND=numpy`` (or ``numba``) to force one. Both apply
the same butterfly in the same order, so outputs match bitwise; the
benchmark under ``benchmarks/`` compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

_FORCED = os.environ.get("SEEDLESS_DI_BACKEND", "").strip().lower()

if _FORCED not in ("", "numba", "numpy"):
    raise ValueError(f"SEEDLESS_DI_BACKEND must be 'numba' or 'numpy', got {_FORCED!r}")

_HAVE_NUMBA = False
if _FORCED != "numpy":
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _FORCED == "numba":
            raise


def backend_name() -> str:
    """Name of the active kernel backend."""
    return "numba" if _HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy reference path


def _fwht_numpy(v: np.ndarray) -> None:
    """In-place Walsh-Hadamard butterfly; pairs index bit i with mask bit i."""
    n = v.size
    h = 1
    while h < n:
        w = v.reshape(-1, 2, h)
        lo = w[:, 0, :].copy()
        hi = w[:, 1, :].copy()
        w[:, 0, :] = lo + hi
        w[:, 1, :] = lo - hi
        h *= 2


def _centered_indicator_numpy(table: np.ndarray, k: int, m_out: int) -> np.ndarray:
    out = np.full(table.size, -(0.5**m_out), dtype=np.float64)
    out[table == k] += 1.0
    return out


def _max_abs_argmax_numpy(v: np.ndarray) -> tuple[float, int]:
    idx = int(np.argmax(np.abs(v)))
    return float(abs(v[idx])), idx


# ---------------------------------------------------------------------------
# numba path

if _HAVE_NUMBA:

    @njit(cache=True)
    def _fwht_numba(v):  # pragma: no cover - exercised via dispatch
        n = v.size
        h = 1
        while h < n:
            for i in range(0, n, 2 * h):
                for j in range(i, i + h):
                    x = v[j]
                    y = v[j + h]
                    v[j] = x + y
                    v[j + h] = x - y
            h *= 2

    @njit(cache=True)
    def _centered_indicator_numba(table, k, m_out):  # pragma: no cover
        shift = 0.5**m_out
        out = np.empty(table.size, dtype=np.float64)
        for a in range(table.size):
            out[a] = (1.0 if table[a] == k else 0.0) - shift
        return out

    @njit(cache=True)
    def _max_abs_argmax_numba(v):  # pragma: no cover
        best = -1.0
        arg = 0
        for i in range(v.size):
            x = abs(v[i])
            if x > best:
                best = x
                arg = i
        return best, arg


# ---------------------------------------------------------------------------
# dispatch


def fwht_inplace(v: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform of a float64 vector, in place.

    Output entry r equals sum_a v[a] * (-1)^(popcount(a & r)); length must
    be a power of two.
    """
    if v.dtype != np.float64 or v.ndim != 1:
        raise ValueError("fwht_inplace expects a 1-D float64 array")
    if v.size & (v.size - 1):
        raise ValueError("length must be a power of two")
    if _HAVE_NUMBA:
        _fwht_numba(v)
    else:
        _fwht_numpy(v)
    return v


def centered_indicator(table: np.ndarray, k: int, m_out: int) -> np.ndarray:
    """Vector over inputs a of [table[a] == k] - 2^-m."""
    if _HAVE_NUMBA:
        return _centered_indicator_numba(table, np.int64(k), np.int64(m_out))
    return _centered_indicator_numpy(table, k, m_out)


def max_abs_argmax(v: np.ndarray) -> tuple[float, int]:
    """Largest absolute entry and its index."""
    if _HAVE_NUMBA:
        best, arg = _max_abs_argmax_numba(v)
        return float(best), int(arg)
    return _max_abs_argmax_numpy(v)
