"""Pre-image kernels over the flat transition table.

Transitions are stored as three parallel int64 arrays ``src``, ``col`` and
``dst``; ``col`` is the coalition-action column of each transition for the
coalition being evaluated.  Coalition choices are a boolean ``allowed``
matrix of shape ``(n_states, n_cols)``.

Two interchangeable implementations exist: numba-compiled loops and plain
numpy.  Setting ``ATLK_DISABLE_NUMBA=1`` (or running without numba installed)
selects the numpy path.  Both are importable as ``numba_impl`` and
``numpy_impl`` for the benchmark and for cross-checking in the tests.
"""

from __future__ import annotations

import os
import types

import numpy as np


def _numpy_hit(src, col, dst, target, n_states, n_cols):
    out = np.zeros((n_states, n_cols), dtype=np.bool_)
    m = target[dst]
    out[src[m], col[m]] = True
    return out


def _numpy_pre_forced(src, col, dst, allowed, target):
    n_states, n_cols = allowed.shape
    hit = _numpy_hit(src, col, dst, target, n_states, n_cols)
    covered = allowed.any(axis=1)
    return covered & (hit | ~allowed).all(axis=1)


def _numpy_pre_exists_ac(src, col, dst, allowed, target):
    n_states, n_cols = allowed.shape
    escape = _numpy_hit(src, col, dst, ~target, n_states, n_cols)
    return allowed & ~escape


def _numpy_pre_exists(src, col, dst, allowed, target):
    return _numpy_pre_exists_ac(src, col, dst, allowed, target).any(axis=1)


def _numpy_post(src, dst, source, n_states):
    out = np.zeros(n_states, dtype=np.bool_)
    out[dst[source[src]]] = True
    return out


numpy_impl = types.SimpleNamespace(
    name="numpy",
    hit=_numpy_hit,
    pre_forced=_numpy_pre_forced,
    pre_exists=_numpy_pre_exists,
    pre_exists_ac=_numpy_pre_exists_ac,
    post=_numpy_post,
)


def _build_numba_impl():
    from numba import njit

    @njit(cache=True, nogil=True)
    def hit(src, col, dst, target, n_states, n_cols):
        out = np.zeros((n_states, n_cols), dtype=np.bool_)
        for k in range(src.shape[0]):
            if target[dst[k]]:
                out[src[k], col[k]] = True
        return out

    @njit(cache=True, nogil=True)
    def pre_forced(src, col, dst, allowed, target):
        n_states, n_cols = allowed.shape
        h = np.zeros((n_states, n_cols), dtype=np.bool_)
        for k in range(src.shape[0]):
            if target[dst[k]]:
                h[src[k], col[k]] = True
        out = np.zeros(n_states, dtype=np.bool_)
        for s in range(n_states):
            covered = False
            ok = True
            for c in range(n_cols):
                if allowed[s, c]:
                    covered = True
                    if not h[s, c]:
                        ok = False
                        break
            out[s] = covered and ok
        return out

    @njit(cache=True, nogil=True)
    def pre_exists_ac(src, col, dst, allowed, target):
        n_states, n_cols = allowed.shape
        out = allowed.copy()
        for k in range(src.shape[0]):
            if not target[dst[k]]:
                out[src[k], col[k]] = False
        return out

    @njit(cache=True, nogil=True)
    def pre_exists(src, col, dst, allowed, target):
        n_states, n_cols = allowed.shape
        ac = allowed.copy()
        for k in range(src.shape[0]):
            if not target[dst[k]]:
                ac[src[k], col[k]] = False
        out = np.zeros(n_states, dtype=np.bool_)
        for s in range(n_states):
            for c in range(n_cols):
                if ac[s, c]:
                    out[s] = True
                    break
        return out

    @njit(cache=True, nogil=True)
    def post(src, dst, source, n_states):
        out = np.zeros(n_states, dtype=np.bool_)
        for k in range(src.shape[0]):
            if source[src[k]]:
                out[dst[k]] = True
        return out

    return types.SimpleNamespace(
        name="numba",
        hit=hit,
        pre_forced=pre_forced,
        pre_exists=pre_exists,
        pre_exists_ac=pre_exists_ac,
        post=post,
    )


try:
    numba_impl = _build_numba_impl()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None


def _select():
    if os.environ.get("ATLK_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return numpy_impl
    return numba_impl or numpy_impl


active = _select()
BACKEND = active.name
