"""Search-loop kernels: a numba-jitted hot path and a pure-numpy fallback.

The backend is picked once at import from the EOCLUST_BACKEND environment
variable ("numba" or "numpy"); unset means numba when importable, numpy
otherwise. `set_backend` switches at runtime (used by tests and the
benchmark). The choice affects speed only: both backends are bit-for-bit
equivalent, which the test suite asserts.

Equivalence rests on two constraints that the code below must preserve:

* Victim selection realizes the total order (fitness descending, per-step
  hash key ascending, vertex index ascending). The order has no ties, so
  quickselect (jit path) and np.lexsort (numpy path) pick the same vertex.
  The hash keys are splitmix64 outputs of a running counter, recomputed
  every step so equal-fitness vertices are ranked in fresh random order.
* Every floating-point update is a scalar operation applied in adjacency
  order in both paths. Do not vectorize the fitness updates in the numpy
  kernel: np.sum changes the rounding and the trajectories diverge.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = ["KernelBundle", "available_backends", "get_kernels", "set_backend", "active"]

# splitmix64 finalizer constants
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_K1 = np.uint64(0xBF58476D1CE4E5B9)
_K2 = np.uint64(0x94D049BB133111EB)
_R30 = np.uint64(30)
_R27 = np.uint64(27)
_R31 = np.uint64(31)
_ONE = np.uint64(1)
_MASK_INT = (1 << 64) - 1


def _splitmix64(x):
    z = x + _GOLDEN
    z = (z ^ (z >> _R30)) * _K1
    z = (z ^ (z >> _R27)) * _K2
    return z ^ (z >> _R31)


def _vector_tie_keys(start: int, n: int) -> np.ndarray:
    """Vectorized splitmix64 of counters start..start+n-1 (mod 2^64)."""
    x = np.uint64(start & _MASK_INT) + np.arange(n, dtype=np.uint64)
    z = x + _GOLDEN
    z = (z ^ (z >> _R30)) * _K1
    z = (z ^ (z >> _R27)) * _K2
    return z ^ (z >> _R31)


def _select_victim(lam, keys, buf, r):
    """Index of the rank-r element (0-based, rank 0 = worst).

    Order: lam descending, then keys ascending, then index ascending; the
    order has no ties so the answer is unique and matches a full sort. One
    pass keeps the current top r+1 elements in ``buf`` by insertion, which
    degenerates to an argmax scan for r = 0 and stays cheap for the small
    ranks the power law concentrates on.
    """
    n = lam.shape[0]
    size = 0
    for e in range(n):
        le = lam[e]
        ke = keys[e]
        if size > r:
            # full buffer: skip unless e outranks the current boundary
            tail = buf[r]
            lt = lam[tail]
            if not (le > lt or (le == lt and (ke < keys[tail] or (ke == keys[tail] and e < tail)))):
                continue
            pos = r
        else:
            pos = size
            size += 1
        while pos > 0:
            prev = buf[pos - 1]
            lp = lam[prev]
            if le > lp or (le == lp and (ke < keys[prev] or (ke == keys[prev] and e < prev))):
                buf[pos] = prev
                pos -= 1
            else:
                break
        buf[pos] = e
    return buf[r]


def _sort_chunk_loop(indptr, nbr, nbr_w, b, use_powerlaw, k, labels, lam,
                     best_labels, cost_box, tie_box, idx_buf, keys_buf,
                     rand_block, out_cur, out_best):
    """Exact-ranking search steps, loop style (the jit target).

    rand_block holds two uniforms per step (rank draw, label draw). Mutates
    labels/lam/best_labels/cost_box/tie_box in place and records per-step
    current and best cost.
    """
    n = labels.shape[0]
    steps = rand_block.shape[0]
    cur = cost_box[0]
    best = cost_box[1]
    ctr = tie_box[0]
    for s in range(steps):
        x = ctr
        for i in range(n):
            keys_buf[i] = _splitmix64(x)
            x = x + _ONE
        ctr = x
        if use_powerlaw:
            t = rand_block[s, 0] * b[n - 1]
            r = 0
            while r < n - 1 and b[r] <= t:
                r += 1
        else:
            r = 0
        v = _select_victim(lam, keys_buf, idx_buf, r)
        old = labels[v]
        nl = int(rand_block[s, 1] * (k - 1))
        if nl > k - 2:
            nl = k - 2
        if nl >= old:
            nl += 1
        labels[v] = nl
        d_old = 0.0
        d_new = 0.0
        for p in range(indptr[v], indptr[v + 1]):
            j = nbr[p]
            w = nbr_w[p]
            lj = labels[j]
            if lj == old:
                d_old += w
                lam[j] -= w
            elif lj == nl:
                d_new += w
                lam[j] += w
        lam[v] = lam[v] - d_old + d_new
        cur = cur - d_old + d_new
        if cur < best:
            best = cur
            best_labels[:] = labels
        out_cur[s] = cur
        out_best[s] = best
    cost_box[0] = cur
    cost_box[1] = best
    tie_box[0] = ctr


def _sort_chunk_numpy(indptr, nbr, nbr_w, b, use_powerlaw, k, labels, lam,
                      best_labels, cost_box, tie_box, idx_buf, keys_buf,
                      rand_block, out_cur, out_best):
    """Numpy fallback for `_sort_chunk_loop`; same contract, same results.

    Victim lookup is vectorized (lexsort over the shared total order); the
    fitness updates stay scalar in adjacency order on purpose, see module
    docstring.
    """
    n = labels.shape[0]
    steps = rand_block.shape[0]
    cur = float(cost_box[0])
    best = float(cost_box[1])
    ctr = int(tie_box[0])
    bn = b[:n]
    for s in range(steps):
        keys = _vector_tie_keys(ctr, n)
        ctr = (ctr + n) & _MASK_INT
        order = np.lexsort((keys, -lam))
        if use_powerlaw:
            t = rand_block[s, 0] * bn[n - 1]
            r = int(np.searchsorted(bn, t, side="right"))
            if r > n - 1:
                r = n - 1
        else:
            r = 0
        v = int(order[r])
        old = labels[v]
        nl = int(rand_block[s, 1] * (k - 1))
        if nl > k - 2:
            nl = k - 2
        if nl >= old:
            nl += 1
        labels[v] = nl
        d_old = 0.0
        d_new = 0.0
        for p in range(indptr[v], indptr[v + 1]):
            j = nbr[p]
            w = nbr_w[p]
            lj = labels[j]
            if lj == old:
                d_old += w
                lam[j] -= w
            elif lj == nl:
                d_new += w
                lam[j] += w
        lam[v] = lam[v] - d_old + d_new
        cur = cur - d_old + d_new
        if cur < best:
            best = cur
            best_labels[:] = labels
        out_cur[s] = cur
        out_best[s] = best
    cost_box[0] = cur
    cost_box[1] = best
    tie_box[0] = np.uint64(ctr)


def _heapify_loop(heap_vertex, heap_pos, lam):
    """Rebuild max-heap order (on lam) over whatever heap_vertex holds."""
    n = heap_vertex.shape[0]
    for i in range(n):
        heap_pos[heap_vertex[i]] = i
    for start in range(n // 2 - 1, -1, -1):
        x = heap_vertex[start]
        h = start
        while True:
            c = 2 * h + 1
            if c >= n:
                break
            rgt = c + 1
            if rgt < n and lam[heap_vertex[rgt]] > lam[heap_vertex[c]]:
                c = rgt
            cv = heap_vertex[c]
            if lam[cv] > lam[x]:
                heap_vertex[h] = cv
                heap_pos[cv] = h
                h = c
            else:
                break
        heap_vertex[h] = x
        heap_pos[x] = h


def _heap_chunk_loop(indptr, nbr, nbr_w, b, use_powerlaw, k, labels, lam,
                     best_labels, cost_box, heap_vertex, heap_pos,
                     rand_block, out_cur, out_best):
    """Approximate-ranking search steps: rank r selects heap slot r.

    The heap keeps parent fitness >= child fitness, so slot 0 is the exact
    worst vertex but deeper slots only approximate their rank. Sift-up and
    sift-down are inlined (three copies below, keep them in sync) so this
    function stays self-contained and its plain-python form never touches
    jitted helpers.
    """
    n = labels.shape[0]
    steps = rand_block.shape[0]
    cur = cost_box[0]
    best = cost_box[1]
    for s in range(steps):
        if use_powerlaw:
            t = rand_block[s, 0] * b[n - 1]
            r = 0
            while r < n - 1 and b[r] <= t:
                r += 1
        else:
            r = 0
        v = heap_vertex[r]
        old = labels[v]
        nl = int(rand_block[s, 1] * (k - 1))
        if nl > k - 2:
            nl = k - 2
        if nl >= old:
            nl += 1
        labels[v] = nl
        d_old = 0.0
        d_new = 0.0
        for p in range(indptr[v], indptr[v + 1]):
            j = nbr[p]
            w = nbr_w[p]
            lj = labels[j]
            if lj == old:
                d_old += w
                lam[j] -= w
                # fitness dropped: sift j down
                h = heap_pos[j]
                while True:
                    c = 2 * h + 1
                    if c >= n:
                        break
                    rgt = c + 1
                    if rgt < n and lam[heap_vertex[rgt]] > lam[heap_vertex[c]]:
                        c = rgt
                    cv = heap_vertex[c]
                    if lam[cv] > lam[j]:
                        heap_vertex[h] = cv
                        heap_pos[cv] = h
                        h = c
                    else:
                        break
                heap_vertex[h] = j
                heap_pos[j] = h
            elif lj == nl:
                d_new += w
                lam[j] += w
                # fitness rose: sift j up
                h = heap_pos[j]
                while h > 0:
                    parent = (h - 1) >> 1
                    pv = heap_vertex[parent]
                    if lam[j] > lam[pv]:
                        heap_vertex[h] = pv
                        heap_pos[pv] = h
                        h = parent
                    else:
                        break
                heap_vertex[h] = j
                heap_pos[j] = h
        lam[v] = lam[v] - d_old + d_new
        # victim may have moved either way: sift up, then down
        h = heap_pos[v]
        while h > 0:
            parent = (h - 1) >> 1
            pv = heap_vertex[parent]
            if lam[v] > lam[pv]:
                heap_vertex[h] = pv
                heap_pos[pv] = h
                h = parent
            else:
                break
        while True:
            c = 2 * h + 1
            if c >= n:
                break
            rgt = c + 1
            if rgt < n and lam[heap_vertex[rgt]] > lam[heap_vertex[c]]:
                c = rgt
            cv = heap_vertex[c]
            if lam[cv] > lam[v]:
                heap_vertex[h] = cv
                heap_pos[cv] = h
                h = c
            else:
                break
        heap_vertex[h] = v
        heap_pos[v] = h
        cur = cur - d_old + d_new
        if cur < best:
            best = cur
            best_labels[:] = labels
        out_cur[s] = cur
        out_best[s] = best
    cost_box[0] = cur
    cost_box[1] = best


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelBundle:
    backend: str
    sort_chunk: object
    heap_chunk: object
    heapify: object


def available_backends() -> tuple[str, ...]:
    try:
        import numba  # noqa: F401
    except ImportError:
        return ("numpy",)
    return ("numba", "numpy")


_BUNDLES: dict[str, KernelBundle] = {}


def get_kernels(backend: str) -> KernelBundle:
    if backend in _BUNDLES:
        return _BUNDLES[backend]
    if backend == "numpy":
        bundle = KernelBundle(
            backend="numpy",
            sort_chunk=_sort_chunk_numpy,
            heap_chunk=_heap_chunk_loop,
            heapify=_heapify_loop,
        )
    elif backend == "numba":
        try:
            from numba import njit
        except ImportError as exc:
            raise ImportError("EOCLUST_BACKEND=numba but numba is not installed") from exc
        global _splitmix64, _select_victim
        if not hasattr(_splitmix64, "py_func"):
            _splitmix64 = njit(cache=True)(_splitmix64)
            _select_victim = njit(cache=True)(_select_victim)
        bundle = KernelBundle(
            backend="numba",
            sort_chunk=njit(cache=True)(_sort_chunk_loop),
            heap_chunk=njit(cache=True)(_heap_chunk_loop),
            heapify=njit(cache=True)(_heapify_loop),
        )
    else:
        raise ValueError(f"unknown kernel backend {backend!r}")
    _BUNDLES[backend] = bundle
    return bundle


def _resolve_default() -> str:
    env = os.environ.get("EOCLUST_BACKEND", "").strip().lower()
    if env in ("numba", "numpy"):
        return env
    if env:
        raise ValueError(f"EOCLUST_BACKEND must be 'numba' or 'numpy', got {env!r}")
    return "numba" if "numba" in available_backends() else "numpy"


_ACTIVE = get_kernels(_resolve_default())


def set_backend(backend: str) -> KernelBundle:
    """Switch the kernels the engine uses; returns the new bundle."""
    global _ACTIVE
    _ACTIVE = get_kernels(backend)
    return _ACTIVE


def active() -> KernelBundle:
    return _ACTIVE
