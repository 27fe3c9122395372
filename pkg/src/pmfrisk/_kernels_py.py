"""Numpy implementations of the batch kernels.

Same call signatures and accumulation order as the compiled module in
``_kernels.pyx`` so both backends agree to the last few ulps.
"""
import numpy as np


def barycentric_points(verts, sel, spacings):
    """Map positive spacings to points inside selected simplices.

    verts    : (S, k+1, d) vertex coordinates per simplex
    sel      : (n,) simplex index per draw
    spacings : (n, k+1) positive draws (exponential for uniformity)

    Row i returns sum_j w_ij * verts[sel[i], j] with w_i the normalized
    spacings, i.e. a uniform barycentric point when spacings are iid
    standard exponentials.
    """
    w = spacings / spacings.sum(axis=1, keepdims=True)
    return np.einsum("nk,nkd->nd", w, verts[sel])


def self_convolve(pmfs, steps):
    """``steps``-fold self-convolution of each row.

    pmfs : (m, L) rows of per-step probabilities
    Returns (m, steps*(L-1)+1).
    """
    m, L = pmfs.shape
    out = pmfs.copy()
    for _ in range(steps - 1):
        cur = out.shape[1]
        nxt = np.zeros((m, cur + L - 1))
        for j in range(L):
            nxt[:, j:j + cur] += pmfs[:, j:j + 1] * out
        out = nxt
    return out


def relative_entropy_pairs(a, b):
    """Rowwise relative entropy I(a_i, b_i) = sum a ln(a/b) in nats.

    Zero terms contribute 0; any support difference between a row pair
    (in either direction) yields +inf for that row.
    """
    pos_a = a > 0.0
    pos_b = b > 0.0
    same = np.all(pos_a == pos_b, axis=1)
    mask = pos_a & pos_b
    ratio = np.divide(a, b, out=np.ones(a.shape), where=mask)
    logr = np.log(ratio, out=np.zeros(a.shape), where=mask)
    vals = (a * logr).sum(axis=1)
    vals[~same] = np.inf
    return vals
