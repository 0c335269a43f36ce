"""Hot scan kernels over prefix-sum arrays.

Every statistic in :mod:`maxinc.stats` reduces to one of three scans over a
prefix array ``P`` (length ``n + 1``):

* ``scan_abs``    max over (l, k) of ``|P[k+l] - P[k]| / norms[l]``
* ``scan_signed`` max and min over (l, k) of ``(P[k+l] - P[k]) / norms[l]``
* ``scan_hat``    max over (l, k) of ``((P[k+l]-P[k]) - (P[k]-P[k-l])) / norms[l]``

``order`` lists the window lengths to visit and must be sorted by
non-decreasing ``norms``. That ordering lets the scans stop as soon as the
walk's total range divided by the current norm falls below the running best,
and the numba kernels additionally skip blocks of start indices whose
min/max envelope cannot beat the best. Both prunings are exact: a pruned
window can never win, including ties, so the numba and numpy paths return
the same triple ``(value, l, k)``.

Ties are broken by smallest ``l`` then smallest ``k``. Windows of length 1
read the increments from ``unit`` (normally the jumps themselves) rather
than from prefix differences, so the length-1 field is exact.
"""

import numpy as np

from maxinc import _accel
from maxinc._accel import njit, prange

BLOCK = 32


# --------------------------------------------------------------------------
# numba kernels
# --------------------------------------------------------------------------


@njit(cache=True)
def _block_envelope(P, B):
    m = P.shape[0]
    nb = (m + B - 1) // B
    lo = np.empty(nb)
    hi = np.empty(nb)
    for i in range(nb):
        a = i * B
        b = min(a + B, m)
        mn = P[a]
        mx = P[a]
        for j in range(a + 1, b):
            v = P[j]
            if v < mn:
                mn = v
            if v > mx:
                mx = v
        lo[i] = mn
        hi[i] = mx
    return lo, hi


@njit(cache=True)
def _better(v, l, k, bv, bl, bk):
    if v > bv:
        return True
    if v == bv and bl >= 0:
        if l < bl or (l == bl and k < bk):
            return True
    return False


@njit(cache=True)
def _scan_abs_1d_nb(P, unit, norms, order):
    n = P.shape[0] - 1
    B = 32
    lo, hi = _block_envelope(P, B)
    rng = max(np.max(P) - np.min(P), np.max(np.abs(unit)))
    best = -1.0
    bl = -1
    bk = -1
    for idx in range(order.shape[0]):
        l = order[idx]
        nrm = norms[l]
        if bl >= 0 and rng / nrm < best:
            break
        raw = -1.0
        rk = -1
        if l == 1:
            for k in range(n):
                d = abs(unit[k])
                if d > raw:
                    raw = d
                    rk = k
        else:
            last = n - l
            i = 0
            while i * B <= last:
                k0 = i * B
                k1 = min(k0 + B, last + 1)
                j1 = (k0 + l) // B
                j2 = (k1 - 1 + l) // B
                hj = max(hi[j1], hi[j2])
                lj = min(lo[j1], lo[j2])
                bound = max(hj - lo[i], hi[i] - lj)
                i += 1
                if bound <= raw or bound / nrm < best:
                    continue
                for k in range(k0, k1):
                    d = abs(P[k + l] - P[k])
                    if d > raw:
                        raw = d
                        rk = k
        if rk < 0:
            continue
        v = raw / nrm
        if bl < 0 or _better(v, l, rk, best, bl, bk):
            best = v
            bl = l
            bk = rk
    return best, bl, bk


@njit(cache=True)
def _scan_abs_nd_nb(P, unit, norms, order):
    n = P.shape[0] - 1
    d = P.shape[1]
    diag = 0.0
    for j in range(d):
        r = np.max(P[:, j]) - np.min(P[:, j])
        diag += r * r
    diag = np.sqrt(diag)
    for k in range(unit.shape[0]):
        s = 0.0
        for j in range(d):
            s += unit[k, j] * unit[k, j]
        diag = max(diag, np.sqrt(s))
    best = -1.0
    bl = -1
    bk = -1
    for idx in range(order.shape[0]):
        l = order[idx]
        nrm = norms[l]
        if bl >= 0 and diag / nrm < best:
            break
        raw = -1.0
        rk = -1
        for k in range(n - l + 1):
            s = 0.0
            if l == 1:
                for j in range(d):
                    s += unit[k, j] * unit[k, j]
            else:
                for j in range(d):
                    t = P[k + l, j] - P[k, j]
                    s += t * t
            s = np.sqrt(s)
            if s > raw:
                raw = s
                rk = k
        v = raw / nrm
        if bl < 0 or _better(v, l, rk, best, bl, bk):
            best = v
            bl = l
            bk = rk
    return best, bl, bk


@njit(cache=True)
def _scan_signed_nb(P, unit, norms, order, want_min):
    n = P.shape[0] - 1
    B = 32
    lo, hi = _block_envelope(P, B)
    rng = max(np.max(P) - np.min(P), np.max(np.abs(unit)))
    bM = -np.inf
    bMl = -1
    bMk = -1
    bm = np.inf
    bml = -1
    bmk = -1
    for idx in range(order.shape[0]):
        l = order[idx]
        nrm = norms[l]
        if bMl >= 0 and rng / nrm < bM and (not want_min or -rng / nrm > bm):
            break
        rM = -np.inf
        rMk = -1
        rm = np.inf
        rmk = -1
        if l == 1:
            for k in range(n):
                u = unit[k]
                if u > rM:
                    rM = u
                    rMk = k
                if u < rm:
                    rm = u
                    rmk = k
        else:
            last = n - l
            i = 0
            while i * B <= last:
                k0 = i * B
                k1 = min(k0 + B, last + 1)
                j1 = (k0 + l) // B
                j2 = (k1 - 1 + l) // B
                hj = max(hi[j1], hi[j2])
                lj = min(lo[j1], lo[j2])
                up = hj - lo[i]
                dn = lj - hi[i]
                i += 1
                skip_max = up <= rM or up / nrm < bM
                skip_min = (not want_min) or dn >= rm or dn / nrm > bm
                if skip_max and skip_min:
                    continue
                for k in range(k0, k1):
                    t = P[k + l] - P[k]
                    if t > rM:
                        rM = t
                        rMk = k
                    if t < rm:
                        rm = t
                        rmk = k
        if rMk >= 0:
            v = rM / nrm
            if bMl < 0 or _better(v, l, rMk, bM, bMl, bMk):
                bM = v
                bMl = l
                bMk = rMk
        if want_min and rmk >= 0:
            v = rm / nrm
            if bml < 0 or _better(-v, l, rmk, -bm, bml, bmk):
                bm = v
                bml = l
                bmk = rmk
    return bM, bMl, bMk, bm, bml, bmk


@njit(cache=True)
def _scan_hat_nb(P, norms, order):
    n = P.shape[0] - 1
    B = 32
    lo, hi = _block_envelope(P, B)
    rng = np.max(P) - np.min(P)
    twice = rng - (-rng)
    best = -np.inf
    bl = -1
    bk = -1
    for idx in range(order.shape[0]):
        l = order[idx]
        nrm = norms[l]
        if l + 1 > n - l:
            continue
        if bl >= 0 and twice / nrm < best:
            break
        raw = -np.inf
        rk = -1
        first = l + 1
        last = n - l
        i = first // B
        while i * B <= last:
            k0 = max(i * B, first)
            k1 = min(i * B + B, last + 1)
            j1 = (k0 + l) // B
            j2 = (k1 - 1 + l) // B
            h1 = (k0 - l) // B
            h2 = (k1 - 1 - l) // B
            hj = max(hi[j1], hi[j2])
            hk = max(hi[h1], hi[h2])
            ub1 = hj - lo[i]
            lb2 = lo[i] - hk
            bound = ub1 - lb2
            i += 1
            if bound <= raw or bound / nrm < best:
                continue
            for k in range(k0, k1):
                t = (P[k + l] - P[k]) - (P[k] - P[k - l])
                if t > raw:
                    raw = t
                    rk = k
        if rk < 0:
            continue
        v = raw / nrm
        if bl < 0 or _better(v, l, rk, best, bl, bk):
            best = v
            bl = l
            bk = rk
    return best, bl, bk


@njit(cache=True, parallel=True)
def _scan_abs_1d_par(P, unit, norms, order, chunks):
    vals = np.empty(chunks)
    ls = np.empty(chunks, dtype=np.int64)
    ks = np.empty(chunks, dtype=np.int64)
    m = order.shape[0]
    for c in prange(chunks):
        a = c * m // chunks
        b = (c + 1) * m // chunks
        v, l, k = _scan_abs_1d_nb(P, unit, norms, order[a:b])
        vals[c] = v
        ls[c] = l
        ks[c] = k
    return vals, ls, ks


# --------------------------------------------------------------------------
# numpy twins
# --------------------------------------------------------------------------


def _better_py(v, l, k, best):
    if best is None:
        return True
    bv, bl, bk = best
    return v > bv or (v == bv and (l, k) < (bl, bk))


def _scan_abs_np(P, unit, norms, order):
    vector = P.ndim == 2
    if vector:
        span = P.max(axis=0) - P.min(axis=0)
        rng = max(np.sqrt(np.sum(span * span)), np.sqrt(np.sum(unit * unit, axis=1)).max())
    else:
        rng = max(P.max() - P.min(), np.abs(unit).max())
    best = None
    for l in order:
        l = int(l)
        nrm = norms[l]
        if best is not None and rng / nrm < best[0]:
            break
        diff = unit if l == 1 else P[l:] - P[:-l]
        if vector:
            mag = np.sqrt(np.sum(diff * diff, axis=1))
        else:
            mag = np.abs(diff)
        k = int(np.argmax(mag))
        v = mag[k] / nrm
        if _better_py(v, l, k, best):
            best = (v, l, k)
    return best


def _scan_signed_np(P, unit, norms, order, want_min):
    rng = max(P.max() - P.min(), np.abs(unit).max())
    top = None
    bot = None
    for l in order:
        l = int(l)
        nrm = norms[l]
        if top is not None and rng / nrm < top[0] and (not want_min or -rng / nrm > bot[0]):
            break
        diff = unit if l == 1 else P[l:] - P[:-l]
        k = int(np.argmax(diff))
        v = diff[k] / nrm
        if _better_py(v, l, k, top):
            top = (v, l, k)
        if want_min:
            k = int(np.argmin(diff))
            v = diff[k] / nrm
            if bot is None or _better_py(-v, l, k, (-bot[0], bot[1], bot[2])):
                bot = (v, l, k)
    if not want_min:
        bot = (np.inf, -1, -1)
    return top + bot


def _scan_hat_np(P, norms, order):
    n = P.shape[0] - 1
    rng = P.max() - P.min()
    twice = rng - (-rng)
    best = None
    for l in order:
        l = int(l)
        nrm = norms[l]
        if l + 1 > n - l:
            continue
        if best is not None and twice / nrm < best[0]:
            break
        ks = np.arange(l + 1, n - l + 1)
        diff = (P[ks + l] - P[ks]) - (P[ks] - P[ks - l])
        j = int(np.argmax(diff))
        v = diff[j] / nrm
        if _better_py(v, l, int(ks[j]), best):
            best = (v, l, int(ks[j]))
    return best


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def _use_numba(backend):
    if backend is None:
        return _accel.USE_NUMBA
    if backend not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {backend!r}")
    if backend == "numba" and not _accel.HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is unavailable or disabled")
    return backend == "numba"


def _as_order(order):
    return np.ascontiguousarray(order, dtype=np.int64)


def scan_abs(P, unit, norms, order, *, parallel=False, backend=None):
    """Return ``(value, l, k)`` for the two-sided scan. ``P`` is 1-D or (n+1, d)."""
    use_nb = _use_numba(backend)
    order = _as_order(order)
    if not use_nb:
        v, l, k = _scan_abs_np(P, unit, norms, order)
        return float(v), l, k
    P = np.ascontiguousarray(P, dtype=np.float64)
    unit = np.ascontiguousarray(unit, dtype=np.float64)
    norms = np.ascontiguousarray(norms, dtype=np.float64)
    if P.ndim == 2:
        v, l, k = _scan_abs_nd_nb(P, unit, norms, order)
    elif parallel and order.shape[0] > 64:
        chunks = max(2, min(64, order.shape[0] // 32))
        vals, ls, ks = _scan_abs_1d_par(P, unit, norms, order, chunks)
        best = None
        for v, l, k in zip(vals, ls, ks):
            if l >= 0 and _better_py(v, int(l), int(k), best):
                best = (v, int(l), int(k))
        v, l, k = best
    else:
        v, l, k = _scan_abs_1d_nb(P, unit, norms, order)
    return float(v), int(l), int(k)


def scan_signed(P, unit, norms, order, *, want_min=True, backend=None):
    """Return ``(max, l, k, min, l, k)`` of the signed scan over a 1-D prefix."""
    use_nb = _use_numba(backend)
    order = _as_order(order)
    if not use_nb:
        out = _scan_signed_np(P, unit, norms, order, want_min)
    else:
        out = _scan_signed_nb(
            np.ascontiguousarray(P, dtype=np.float64),
            np.ascontiguousarray(unit, dtype=np.float64),
            np.ascontiguousarray(norms, dtype=np.float64),
            order,
            want_min,
        )
    M, Ml, Mk, m, ml, mk = out
    return float(M), int(Ml), int(Mk), float(m), int(ml), int(mk)


def scan_hat(P, norms, order, *, backend=None):
    """Return ``(value, l, k)`` for the second-difference scan."""
    use_nb = _use_numba(backend)
    order = _as_order(order)
    if not use_nb:
        v, l, k = _scan_hat_np(P, norms, order)
    else:
        v, l, k = _scan_hat_nb(
            np.ascontiguousarray(P, dtype=np.float64),
            np.ascontiguousarray(norms, dtype=np.float64),
            order,
        )
    return float(v), int(l), int(k)


def ascending_order(norms, lengths):
    """Stable ascending-norm visiting order for the given window lengths."""
    lengths = np.asarray(lengths, dtype=np.int64)
    return lengths[np.argsort(norms[lengths], kind="stable")]
