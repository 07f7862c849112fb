"""Pure numpy implementation of the K-set search kernels.

Used when the compiled extension is not built. Arithmetic order mirrors
``_ckernels.pyx`` so both backends return identical results.
"""
from itertools import combinations, islice

import numpy as np

KEY_MAX = np.iinfo(np.int64).max
BATCH = 1 << 15


def _worst_values(sums, d):
    return (sums * sums).max(axis=1) / (float(d) * float(d))


def _sequential_sums(table, combos):
    # start from 0.0 like the compiled kernel so rounding matches exactly
    s = np.zeros((combos.shape[0], table.shape[1]))
    for i in range(combos.shape[1]):
        s = s + table[combos[:, i]]
    return s


def exhaustive_min(table, d, first_lo, first_hi, quantum):
    table = np.ascontiguousarray(table, dtype=np.float64)
    m = table.shape[0]
    if d < 1 or d > m:
        return KEY_MAX, float("nan"), None, 0
    last_first = min(first_hi, m - d + 1)
    best_key, best_val, best_combo, count = KEY_MAX, float("nan"), None, 0
    for first in range(first_lo, last_first):
        rest = combinations(range(first + 1, m), d - 1)
        while True:
            chunk = list(islice(rest, BATCH))
            if not chunk:
                break
            combos = np.empty((len(chunk), d), dtype=np.int64)
            combos[:, 0] = first
            if d > 1:
                combos[:, 1:] = np.array(chunk, dtype=np.int64)
            vals = _worst_values(_sequential_sums(table, combos), d)
            keys = np.rint(vals / quantum).astype(np.int64)
            i = int(np.argmin(keys))
            count += len(chunk)
            if keys[i] < best_key:
                best_key = int(keys[i])
                best_val = float(vals[i])
                best_combo = tuple(int(x) for x in combos[i])
    return best_key, best_val, best_combo, count


def evaluate_sets(table, combos):
    table = np.ascontiguousarray(table, dtype=np.float64)
    combos = np.ascontiguousarray(combos, dtype=np.int64)
    return _worst_values(_sequential_sums(table, combos), combos.shape[1])
