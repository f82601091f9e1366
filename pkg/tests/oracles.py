"""Independent reference computations used by the test suite.

Nothing here calls into the package's table code: rectangle integrals come
from integer cumulative sums over an explicitly zero-padded array.
"""

import numpy as np


def brute_force_best(values, pad):
    """``best[w, h]`` = max |sum| / (w h) over every w x h window of the
    integer grid zero-padded by ``pad`` cells on each side, for all window
    sizes that fit.  Returned as exact integer sums and sizes so callers can
    form the average with a single division."""
    v = np.asarray(values, dtype=np.int64)
    n1, n2 = v.shape
    big = np.zeros((n1 + 2 * pad, n2 + 2 * pad), dtype=np.int64)
    big[pad:pad + n1, pad:pad + n2] = v
    m1, m2 = big.shape
    S = np.zeros((m1 + 1, m2 + 1), dtype=np.int64)
    S[1:, 1:] = big.cumsum(0).cumsum(1)
    best = np.zeros((m1 + 1, m2 + 1))
    for w in range(1, m1 + 1):
        for h in range(1, m2 + 1):
            sums = S[w:, h:] - S[:-w, h:] - S[w:, :-h] + S[:-w, :-h]
            best[w, h] = np.abs(sums).max() / (w * h)
    return best


def brute_force_query(best, k1, k2):
    """Sup over windows with at least k1 x k2 cells.  The mean of the
    function over a window is sum / (w h) whatever the cell sizes."""
    return float(best[k1:, k2:].max())


def brute_force_1d(values, k, pad):
    v = np.concatenate([np.zeros(pad, dtype=np.int64), np.asarray(values, dtype=np.int64),
                        np.zeros(pad, dtype=np.int64)])
    P = np.concatenate([[0], v.cumsum()])
    out = 0.0
    for w in range(k, len(v) + 1):
        out = max(out, float(np.abs(P[w:] - P[:-w]).max()) / w)
    return out


def indicator_norm(p, length=1.0):
    """Net norm with fine index 1 of the indicator of an interval."""
    return length ** (1.0 / p) * p * p / (p - 1.0)
