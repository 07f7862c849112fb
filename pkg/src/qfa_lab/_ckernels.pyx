# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled K-set search kernels.

Semantics match ``_kernels_py`` bit for bit: sums accumulate in index order,
the worst case is ``max_c s_c**2 / d**2`` and ties are broken on the value
quantized to ``quantum`` (first candidate in lexicographic order wins).
"""
import numpy as np
from libc.math cimport nearbyint
from libc.stdlib cimport malloc, free

cdef long long KEY_MAX = 9223372036854775807


cdef inline double _worst(const double* s, Py_ssize_t ncol, double dd) noexcept nogil:
    cdef double mx = 0.0, v
    cdef Py_ssize_t c
    for c in range(ncol):
        v = s[c] * s[c]
        if v > mx:
            mx = v
    return mx / dd


def exhaustive_min(const double[:, ::1] table, int d, int first_lo, int first_hi,
                   double quantum):
    """Lexicographic scan of all ``d``-subsets of table rows whose first
    element lies in ``[first_lo, first_hi)``.

    Returns ``(key, value, combo, count)``; ``combo`` is ``None`` when the
    range is empty.
    """
    cdef Py_ssize_t m = table.shape[0], ncol = table.shape[1]
    cdef Py_ssize_t i, j, c, changed
    cdef long long count = 0, key, best_key = KEY_MAX
    cdef double dd = <double>d * <double>d, v, best_val = 0.0
    cdef int last_first
    if d < 1 or d > m:
        return KEY_MAX, float("nan"), None, 0
    last_first = min(first_hi, <int>(m - d + 1))
    if first_lo >= last_first:
        return KEY_MAX, float("nan"), None, 0

    cdef int* idx = <int*>malloc(d * sizeof(int))
    cdef int* best = <int*>malloc(d * sizeof(int))
    cdef double* partial = <double*>malloc((d + 1) * ncol * sizeof(double))
    if idx == NULL or best == NULL or partial == NULL:
        free(idx); free(best); free(partial)
        raise MemoryError()
    try:
        with nogil:
            for c in range(ncol):
                partial[c] = 0.0
            for i in range(d):
                idx[i] = first_lo + i
            changed = 0
            while True:
                for i in range(changed, d):
                    for c in range(ncol):
                        partial[(i + 1) * ncol + c] = partial[i * ncol + c] + table[idx[i], c]
                v = _worst(partial + d * ncol, ncol, dd)
                key = <long long>nearbyint(v / quantum)
                count += 1
                if key < best_key:
                    best_key = key
                    best_val = v
                    for j in range(d):
                        best[j] = idx[j]
                # advance to the next combination in lexicographic order
                i = d - 1
                while i >= 0 and idx[i] == m - d + i:
                    i -= 1
                if i < 0:
                    break
                idx[i] += 1
                if i == 0 and idx[0] >= last_first:
                    break
                for j in range(i + 1, d):
                    idx[j] = idx[j - 1] + 1
                changed = i
        combo = tuple(best[j] for j in range(d))
    finally:
        free(idx); free(best); free(partial)
    return best_key, best_val, combo, count


def evaluate_sets(const double[:, ::1] table, const long long[:, ::1] combos):
    """Worst-case value of each row of ``combos`` (row indices into ``table``)."""
    cdef Py_ssize_t t = combos.shape[0], d = combos.shape[1], ncol = table.shape[1]
    cdef Py_ssize_t r, i, c
    cdef double dd = <double>d * <double>d
    out = np.empty(t, dtype=np.float64)
    cdef double[::1] res = out
    cdef double* s = <double*>malloc(ncol * sizeof(double))
    if s == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(t):
                for c in range(ncol):
                    s[c] = 0.0
                for i in range(d):
                    for c in range(ncol):
                        s[c] = s[c] + table[combos[r, i], c]
                res[r] = _worst(s, ncol, dd)
    finally:
        free(s)
    return out
