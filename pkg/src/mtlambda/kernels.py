"""Hot numeric kernels.

Every kernel exists twice: a numba loop (``*_nb``) and a vectorised numpy
implementation (``*_np``). The public names dispatch on ``USE_NUMBA``; both
variants are exact integer code and must agree bit for bit.
"""

import numpy as np

from ._jit import USE_NUMBA, njit

__all__ = [
    "cf_path_values",
    "gather_sum_mod",
    "matmul_mod",
    "nullspace_mod",
    "binomial_transform",
    "USE_NUMBA",
]


# ---------------------------------------------------------------------------
# Continued-fraction path evaluation
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def cf_path_values_nb(nums, den, level, table, values):
    out = np.zeros(nums.shape[0], dtype=np.int64)
    for t in range(nums.shape[0]):
        a = nums[t]
        b = den
        pm2, qm2, pm1, qm1 = 0, 1, 1, 0
        tot = 0
        while b != 0:
            q = a // b
            pk = q * pm1 + pm2
            qk = q * qm1 + qm2
            if pk * qm1 - pm1 * qk == 1:
                c = qk
            else:
                c = -qk
            tot += values[table[(c % level) * level + qm1 % level]]
            pm2, qm2, pm1, qm1 = pm1, qm1, pk, qk
            r = a - q * b
            a = b
            b = r
        out[t] = tot
    return out


def cf_path_values_np(nums, den, level, table, values):
    a = np.array(nums, dtype=np.int64)
    b = np.full_like(a, den)
    pm2 = np.zeros_like(a)
    qm2 = np.ones_like(a)
    pm1 = np.ones_like(a)
    qm1 = np.zeros_like(a)
    tot = np.zeros_like(a)
    idx = np.flatnonzero(b != 0)
    while idx.size:
        aa, bb = a[idx], b[idx]
        q = aa // bb
        p1, q1 = pm1[idx], qm1[idx]
        pk = q * p1 + pm2[idx]
        qk = q * q1 + qm2[idx]
        c = np.where(pk * q1 - p1 * qk == 1, qk, -qk)
        tot[idx] += values[table[(c % level) * level + q1 % level]]
        pm2[idx], qm2[idx] = p1, q1
        pm1[idx], qm1[idx] = pk, qk
        a[idx] = bb
        b[idx] = aa - q * bb
        idx = idx[b[idx] != 0]
    return tot


def cf_path_values(nums, den, level, table, values):
    """Sum of Manin-symbol values along the convergent path from oo to a/den.

    ``nums`` holds the numerators a, ``table`` is the flattened P^1(Z/level)
    lookup and ``values`` the integer value of each Manin symbol.
    """
    nums = np.ascontiguousarray(nums, dtype=np.int64)
    if USE_NUMBA:
        return cf_path_values_nb(nums, np.int64(den), np.int64(level), table, values)
    return cf_path_values_np(nums, den, level, table, values)


# ---------------------------------------------------------------------------
# Arithmetic modulo a word-size prime (q < 2**31)
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def gather_sum_mod_nb(idx2d, W, q):
    n, h = idx2d.shape
    k = W.shape[1]
    out = np.zeros((n, k), dtype=np.int64)
    for i in range(n):
        for t in range(h):
            row = idx2d[i, t]
            for j in range(k):
                out[i, j] += W[row, j]
        for j in range(k):
            out[i, j] %= q
    return out


def gather_sum_mod_np(idx2d, W, q):
    out = np.zeros((idx2d.shape[0], W.shape[1]), dtype=np.int64)
    for t in range(idx2d.shape[1]):
        out += W[idx2d[:, t]]
        if t % 1024 == 1023:
            out %= q
    return out % q


def gather_sum_mod(idx2d, W, q):
    """``out[i] = sum_t W[idx2d[i, t]] mod q`` (at most 2**32 terms per row)."""
    idx2d = np.ascontiguousarray(idx2d, dtype=np.int64)
    W = np.ascontiguousarray(W, dtype=np.int64)
    if USE_NUMBA:
        return gather_sum_mod_nb(idx2d, W, np.int64(q))
    return gather_sum_mod_np(idx2d, W, q)


@njit(cache=True, nogil=True)
def matmul_mod_nb(A, B, q):
    n, m = A.shape
    k = B.shape[1]
    out = np.zeros((n, k), dtype=np.int64)
    for i in range(n):
        for t in range(m):
            a = A[i, t]
            if a == 0:
                continue
            for j in range(k):
                out[i, j] = (out[i, j] + a * B[t, j]) % q
    return out


def matmul_mod_np(A, B, q):
    lo = B & 0xFFFF
    hi = B >> 16
    out_hi = (A @ hi) % q
    out_lo = (A @ lo) % q
    return (out_hi * 65536 + out_lo) % q


def matmul_mod(A, B, q):
    """Exact ``A @ B mod q`` for reduced int64 operands and q < 2**31."""
    A = np.ascontiguousarray(A, dtype=np.int64)
    B = np.ascontiguousarray(B, dtype=np.int64)
    if A.shape[1] > 65536:
        raise ValueError("inner dimension too large for exact int64 accumulation")
    if USE_NUMBA:
        return matmul_mod_nb(A, B, np.int64(q))
    return matmul_mod_np(A, B, q)


@njit(cache=True)
def _inv_mod_nb(a, q):
    # extended Euclid; q prime
    r0, r1 = q, a % q
    s0, s1 = 0, 1
    while r1 != 0:
        t = r0 // r1
        r0, r1 = r1, r0 - t * r1
        s0, s1 = s1, s0 - t * s1
    return s0 % q


@njit(cache=True, nogil=True)
def _rref_mod_nb(A, q):
    A = A.copy()
    m, n = A.shape
    pivots = np.full(n, -1, dtype=np.int64)
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if A[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(n):
                tmp = A[r, j]
                A[r, j] = A[piv, j]
                A[piv, j] = tmp
        inv = _inv_mod_nb(A[r, c], q)
        for j in range(n):
            A[r, j] = (A[r, j] * inv) % q
        for i in range(m):
            if i != r and A[i, c] != 0:
                f = A[i, c]
                for j in range(n):
                    A[i, j] = (A[i, j] - f * A[r, j]) % q
        pivots[c] = r
        r += 1
    return A, pivots


def _rref_mod_np(A, q):
    A = A.copy()
    m, n = A.shape
    pivots = np.full(n, -1, dtype=np.int64)
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * pow(int(A[r, c]), q - 2, q)) % q
        col = A[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            A[rows] = (A[rows] - np.outer(col[rows], A[r]) % q) % q
        pivots[c] = r
        r += 1
    return A, pivots


def nullspace_mod(A, q):
    """Basis (as rows) of the right kernel of ``A`` over GF(q)."""
    A = np.ascontiguousarray(A, dtype=np.int64) % q
    m, n = A.shape
    if m == 0:
        return np.eye(n, dtype=np.int64)
    R, pivots = (_rref_mod_nb(A, np.int64(q)) if USE_NUMBA else _rref_mod_np(A, q))
    free = np.flatnonzero(pivots < 0)
    pivot_cols = np.flatnonzero(pivots >= 0)
    K = np.zeros((free.size, n), dtype=np.int64)
    for t, f in enumerate(free):
        K[t, f] = 1
        K[t, pivot_cols] = (-R[pivots[pivot_cols], f]) % q
    return K


# ---------------------------------------------------------------------------
# Binomial transform sum_j c_j (1+T)^j modulo p^M, in int64 limbs
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def binomial_transform_nb(coeffs, base, top):
    L, K = coeffs.shape
    P = np.zeros((L, K), dtype=np.int64)
    for j in range(L - 1, -1, -1):
        deg = L - 1 - j
        for k in range(deg, 0, -1):
            carry = 0
            for t in range(K):
                s = P[k, t] + P[k - 1, t] + carry
                if t < K - 1:
                    if s >= base:
                        s -= base
                        carry = 1
                    else:
                        carry = 0
                elif s >= top:
                    s -= top
                P[k, t] = s
        carry = 0
        for t in range(K):
            s = P[0, t] + coeffs[j, t] + carry
            if t < K - 1:
                if s >= base:
                    s -= base
                    carry = 1
                else:
                    carry = 0
            elif s >= top:
                s -= top
            P[0, t] = s
    return P


def _add_limbs_np(x, y, base, top):
    s = x + y
    K = s.shape[-1]
    for t in range(K - 1):
        over = s[..., t] >= base
        s[..., t] -= over * base
        s[..., t + 1] += over
    last = s[..., K - 1]
    last[last >= top] -= top
    return s


def binomial_transform_np(coeffs, base, top):
    L, K = coeffs.shape
    P = np.zeros((L, K), dtype=np.int64)
    for j in range(L - 1, -1, -1):
        deg = L - 1 - j
        if deg:
            P[1:deg + 1] = _add_limbs_np(P[1:deg + 1], P[0:deg], base, top)
        P[0] = _add_limbs_np(P[0], coeffs[j], base, top)
    return P


def binomial_transform(coeffs, base, top):
    """Coefficients of ``sum_j c_j (1+T)^j`` in limb form.

    ``coeffs`` has shape (L, K): K little-endian limbs per residue, all but
    the last in base ``base`` and the last reduced modulo ``top``.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.int64)
    if USE_NUMBA:
        return binomial_transform_nb(coeffs, np.int64(base), np.int64(top))
    return binomial_transform_np(coeffs, base, top)
