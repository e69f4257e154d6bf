"""Pure numpy implementation of the coefficient-index kernels.

Used when the compiled ``_ckernels`` extension is unavailable. Every function
returns triplets ``(src, dst, val)`` in the row-vector orientation: an entry
maps source coefficient ``src`` into target slot ``dst``. Indices are 0-based,
``m0(i, j) = i*(i+1)/2 + j``.
"""
import numpy as np


def _pairs(n):
    """All ``(i, j)`` with ``0 <= j <= i <= n`` in storage order."""
    if n < 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e
    i = np.repeat(np.arange(n + 1), np.arange(1, n + 2))
    j = np.arange(i.size) - i * (i + 1) // 2
    return i, j


def _m0(i, j):
    return i * (i + 1) // 2 + j


def _falling(n, k):
    out = np.ones_like(n, dtype=float)
    for r in range(k):
        out = out * (n - r)
    return out


def partial_triplets(N, p, q):
    i, j = _pairs(N - p - q)
    src = _m0(i + p + q, j + q)
    vals = _falling(i - j + p, p) * _falling(j + q, q)
    keep = vals != 0.0
    return src[keep], _m0(i, j)[keep], vals[keep]


def mul_xi_triplets(lam, N, out_order):
    lam = np.asarray(lam, dtype=float)
    i, j = _pairs(out_order)
    dst = _m0(i, j)
    src_l, dst_l, val_l = [], [], []
    for q in range(min(out_order, lam.size - 1) + 1):
        if lam[q] == 0.0:
            continue
        sel = j >= q
        src_l.append(_m0(i[sel] - q, j[sel] - q))
        dst_l.append(dst[sel])
        val_l.append(np.full(sel.sum(), lam[q]))
    return _cat(src_l, dst_l, val_l)


def mul_x_triplets(a, N, out_order):
    a = np.asarray(a, dtype=float)
    i, j = _pairs(out_order)
    dst = _m0(i, j)
    src_l, dst_l, val_l = [], [], []
    for q in range(min(out_order, a.size - 1) + 1):
        if a[q] == 0.0:
            continue
        sel = i - j >= q
        src_l.append(_m0(i[sel] - q, j[sel]))
        dst_l.append(dst[sel])
        val_l.append(np.full(sel.sum(), a[q]))
    return _cat(src_l, dst_l, val_l)


def affine_power_table(alpha, gamma, n):
    table = np.zeros((n + 1, n + 1))
    table[0, 0] = 1.0
    for j in range(1, n + 1):
        table[j, 1:] = alpha * table[j - 1, :-1]
        table[j, :] += gamma * table[j - 1, :]
    return table


def trace_triplets(alpha, gamma, N):
    table = affine_power_table(float(alpha), float(gamma), N)
    i, j = _pairs(N)
    src = _m0(i, j)
    src_l, dst_l, val_l = [], [], []
    for r in range(N + 1):
        sel = j >= r
        vals = table[j[sel], r]
        nz = vals != 0.0
        src_l.append(src[sel][nz])
        dst_l.append((i[sel] - j[sel] + r)[nz])
        val_l.append(vals[nz])
    return _cat(src_l, dst_l, val_l)


def _cat(src_l, dst_l, val_l):
    if not src_l:
        e = np.zeros(0, dtype=np.int64)
        return e, e.copy(), np.zeros(0)
    return (np.concatenate(src_l).astype(np.int64),
            np.concatenate(dst_l).astype(np.int64),
            np.concatenate(val_l))


def tri_eval(coeffs, N, xt, xit):
    """Nested Horner evaluation of ``sum K_ij xt**(i-j) xit**j`` at points."""
    coeffs = np.asarray(coeffs, dtype=float)
    xt = np.asarray(xt, dtype=float)
    xit = np.asarray(xit, dtype=float)
    acc = np.zeros(np.broadcast(xt, xit).shape)
    for a in range(N, -1, -1):
        inner = np.zeros_like(acc)
        for j in range(N - a, -1, -1):
            inner = inner * xit + coeffs[_m0(a + j, j)]
        acc = acc * xt + inner
    return acc
