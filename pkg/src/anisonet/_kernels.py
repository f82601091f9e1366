"""Compiled rectangle-maximum kernels over a summed-area table.

``S`` is always an ``(n1 + 1) x (n2 + 1)`` prefix-integral array.  Every
rectangle integral is the four-term inclusion-exclusion, so each kernel does
O(1) work per rectangle.  All kernels release the GIL.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _rect(S, i0, i1, j0, j1):
    return (S[i1, j1] - S[i0, j1]) - (S[i1, j0] - S[i0, j0])


@njit(cache=True, nogil=True)
def inside_best(S, widths, out):
    """For every x1-width w in ``widths`` and every x2-height h, store in
    ``out[w - 1, h - 1]`` the largest |integral| over all w x h rectangles
    lying inside the support."""
    n1 = S.shape[0] - 1
    n2 = S.shape[1] - 1
    for a in range(widths.shape[0]):
        w = widths[a]
        for h in range(1, n2 + 1):
            m = 0.0
            for i in range(n1 - w + 1):
                for j in range(n2 - h + 1):
                    v = abs((S[i + w, j + h] - S[i, j + h]) - (S[i + w, j] - S[i, j]))
                    if v > m:
                        m = v
            out[w - 1, h - 1] = m


@njit(cache=True, nogil=True)
def anchored_tables(S):
    """Maxima involving support-anchored ranges (prefix or suffix of an axis).

    Returns ``(e1, e2, e12)``:

    * ``e1[j-1, h-1]``: x1 anchored of length j, x2 inside window of length h;
    * ``e2[w-1, j-1]``: x1 inside window of length w, x2 anchored of length j;
    * ``e12[j1-1, j2-1]``: anchored on both axes.
    """
    n1 = S.shape[0] - 1
    n2 = S.shape[1] - 1
    e1 = np.zeros((n1, n2))
    e2 = np.zeros((n1, n2))
    e12 = np.zeros((n1, n2))
    for j in range(1, n1 + 1):
        for side in range(2):
            i0 = 0 if side == 0 else n1 - j
            i1 = j if side == 0 else n1
            for h in range(1, n2 + 1):
                m = e1[j - 1, h - 1]
                for b in range(n2 - h + 1):
                    v = abs(_rect(S, i0, i1, b, b + h))
                    if v > m:
                        m = v
                e1[j - 1, h - 1] = m
            for j2 in range(1, n2 + 1):
                for side2 in range(2):
                    b0 = 0 if side2 == 0 else n2 - j2
                    b1 = j2 if side2 == 0 else n2
                    v = abs(_rect(S, i0, i1, b0, b1))
                    if v > e12[j - 1, j2 - 1]:
                        e12[j - 1, j2 - 1] = v
    for j in range(1, n2 + 1):
        for side in range(2):
            b0 = 0 if side == 0 else n2 - j
            b1 = j if side == 0 else n2
            for w in range(1, n1 + 1):
                m = e2[w - 1, j - 1]
                for a in range(n1 - w + 1):
                    v = abs(_rect(S, a, a + w, b0, b1))
                    if v > m:
                        m = v
                e2[w - 1, j - 1] = m
    return e1, e2, e12


@njit(cache=True, nogil=True)
def suffix_argmax_ratio(num, den):
    """For every k, the index k' >= k maximising ``num[k'] / den[k']``.

    The comparison is by cross-multiplication so the selected pair is the
    exact maximiser whenever the products are exact.
    """
    n = num.shape[0]
    idx = np.empty(n, dtype=np.int64)
    best = n - 1
    for k in range(n - 1, -1, -1):
        if num[k] * den[best] > num[best] * den[k]:
            best = k
        idx[k] = best
    return idx
