"""Hot numeric kernels, numba-compiled with a pure-numpy fallback.

Setting the environment variable ``SHIFTBANDS_NO_NUMBA`` to a non-empty value
selects the numpy implementations; so does a failed numba import.  Both paths
produce identical results up to floating-point associativity, and the
parallel numba loops are arranged so each output element is reduced serially
(bit-reproducible across thread counts).

``benchmarks/bench_fastpath.py`` times one path against the other.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_ENABLED = not os.environ.get("SHIFTBANDS_NO_NUMBA", "")
if NUMBA_ENABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover - environment without numba
        NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# batched phase sums: out[m] = sum_i exp(2 pi i <values[i], alphas[m]>)


def phase_sum_batch_numpy(values: np.ndarray, alphas: np.ndarray,
                          block_elems: int = 1 << 22) -> np.ndarray:
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[0] == 1 and values.size > values.shape[1]:
        values = values.T
    alphas = np.atleast_2d(np.asarray(alphas, dtype=np.float64))
    n_pts = values.shape[0]
    out = np.empty(alphas.shape[0], dtype=np.complex128)
    step = max(1, block_elems // max(n_pts, 1))
    for i in range(0, alphas.shape[0], step):
        phases = values @ alphas[i:i + step].T
        out[i:i + step] = np.exp(2j * np.pi * phases).sum(axis=0)
    return out


if NUMBA_ENABLED:
    @numba.njit(cache=True, parallel=True)
    def _phase_sum_batch_nb(values, alphas):  # pragma: no cover - compiled
        m_cnt = alphas.shape[0]
        out = np.empty(m_cnt, dtype=np.complex128)
        two_pi = 2.0 * np.pi
        for m in numba.prange(m_cnt):
            re = 0.0
            im = 0.0
            for i in range(values.shape[0]):
                ph = 0.0
                for r in range(values.shape[1]):
                    ph += values[i, r] * alphas[m, r]
                ph *= two_pi
                re += np.cos(ph)
                im += np.sin(ph)
            out[m] = complex(re, im)
        return out

    def phase_sum_batch_numba(values, alphas):
        values = np.ascontiguousarray(np.atleast_2d(np.asarray(values, dtype=np.float64)))
        if values.shape[0] == 1 and values.size > values.shape[1]:
            values = np.ascontiguousarray(values.T)
        alphas = np.ascontiguousarray(np.atleast_2d(np.asarray(alphas, dtype=np.float64)))
        return _phase_sum_batch_nb(values, alphas)


# ---------------------------------------------------------------------------
# sorted band counting: number of (u, v) pairs with lo < u + v < hi


def band_pair_count_numpy(u_sorted: np.ndarray, v_block: np.ndarray,
                          lo: float, hi: float) -> int:
    left = np.searchsorted(u_sorted, lo - v_block, side="right")
    right = np.searchsorted(u_sorted, hi - v_block, side="left")
    return int(np.maximum(right - left, 0).sum())


if NUMBA_ENABLED:
    @numba.njit(cache=True, parallel=True)
    def _band_pair_count_nb(u_sorted, v_block, lo, hi):  # pragma: no cover
        total = 0
        n = u_sorted.shape[0]
        for i in numba.prange(v_block.shape[0]):
            a = lo - v_block[i]
            b = hi - v_block[i]
            # first index with u > a
            l, r = 0, n
            while l < r:
                mid = (l + r) // 2
                if u_sorted[mid] <= a:
                    l = mid + 1
                else:
                    r = mid
            left = l
            # first index with u >= b
            l, r = 0, n
            while l < r:
                mid = (l + r) // 2
                if u_sorted[mid] < b:
                    l = mid + 1
                else:
                    r = mid
            if l > left:
                total += l - left
        return total

    def band_pair_count_numba(u_sorted, v_block, lo, hi):
        return int(_band_pair_count_nb(
            np.ascontiguousarray(u_sorted, dtype=np.float64),
            np.ascontiguousarray(v_block, dtype=np.float64),
            float(lo), float(hi)))


# ---------------------------------------------------------------------------
# sparse polynomial evaluation over a block of points


def form_values_numpy(points: np.ndarray, exps: np.ndarray,
                      coeffs: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    out = np.zeros(points.shape[0], dtype=np.float64)
    for t in range(exps.shape[0]):
        term = np.full(points.shape[0], coeffs[t])
        for v in range(exps.shape[1]):
            e = exps[t, v]
            if e == 1:
                term = term * points[:, v]
            elif e > 1:
                term = term * points[:, v] ** e
        out += term
    return out


if NUMBA_ENABLED:
    @numba.njit(cache=True, parallel=True)
    def _form_values_nb(points, exps, coeffs):  # pragma: no cover - compiled
        n_pts = points.shape[0]
        out = np.empty(n_pts, dtype=np.float64)
        for i in numba.prange(n_pts):
            acc = 0.0
            for t in range(exps.shape[0]):
                term = coeffs[t]
                for v in range(exps.shape[1]):
                    e = exps[t, v]
                    if e:
                        base = points[i, v]
                        pw = base
                        for _ in range(e - 1):
                            pw *= base
                        term *= pw
                acc += term
            out[i] = acc
        return out

    def form_values_numba(points, exps, coeffs):
        return _form_values_nb(
            np.ascontiguousarray(points, dtype=np.float64),
            np.ascontiguousarray(exps, dtype=np.int64),
            np.ascontiguousarray(coeffs, dtype=np.float64))


# ---------------------------------------------------------------------------
# active implementations

if NUMBA_ENABLED:
    phase_sum_batch = phase_sum_batch_numba
    band_pair_count = band_pair_count_numba
    form_values = form_values_numba
else:
    phase_sum_batch = phase_sum_batch_numpy
    band_pair_count = band_pair_count_numpy
    form_values = form_values_numpy


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
