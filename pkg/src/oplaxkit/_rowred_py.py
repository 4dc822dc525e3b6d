"""Pure-Python row-reduction and matrix-product kernels.

Twin of the compiled ``oplaxkit._rowred`` extension: identical signatures and
identical output (same pivoting order), so either lane can back ``linalg``.
The rational-field kernels live only here; the compiled module covers F_p.
"""

from __future__ import annotations

from fractions import Fraction


def matmul_mod(p, n, m, k, a, b):
    """(n x m) @ (m x k) over F_p; flat row-major int lists."""
    out = [0] * (n * k)
    for i in range(n):
        ai = i * m
        oi = i * k
        for t in range(m):
            x = a[ai + t]
            if x:
                bt = t * k
                for j in range(k):
                    y = b[bt + j]
                    if y:
                        out[oi + j] = (out[oi + j] + x * y) % p
    return out


def rref_mod(p, rows, cols, entries):
    """Reduced row echelon form over F_p.

    Pivots are the first nonzero entry in column order scanning the remaining
    rows top-down. Returns ``(flat_rref, pivot_columns)``.
    """
    m = [v % p for v in entries]
    pivots = []
    piv_r = 0
    for c in range(cols):
        if piv_r == rows:
            break
        r = piv_r
        while r < rows and m[r * cols + c] == 0:
            r += 1
        if r == rows:
            continue
        if r != piv_r:
            rs, ps = r * cols, piv_r * cols
            for j in range(cols):
                m[rs + j], m[ps + j] = m[ps + j], m[rs + j]
        ps = piv_r * cols
        inv = pow(m[ps + c], p - 2, p)
        if inv != 1:
            for j in range(c, cols):
                m[ps + j] = m[ps + j] * inv % p
        for rr in range(rows):
            if rr == piv_r:
                continue
            f = m[rr * cols + c]
            if f:
                rrs = rr * cols
                for j in range(c, cols):
                    m[rrs + j] = (m[rrs + j] - f * m[ps + j]) % p
        pivots.append(c)
        piv_r += 1
    return m, pivots


def rref_frac(rows, cols, entries):
    """Reduced row echelon form over Q (Fraction entries), same pivoting."""
    m = list(entries)
    pivots = []
    piv_r = 0
    for c in range(cols):
        if piv_r == rows:
            break
        r = piv_r
        while r < rows and not m[r * cols + c]:
            r += 1
        if r == rows:
            continue
        if r != piv_r:
            rs, ps = r * cols, piv_r * cols
            for j in range(cols):
                m[rs + j], m[ps + j] = m[ps + j], m[rs + j]
        ps = piv_r * cols
        inv = 1 / m[ps + c]
        if inv != 1:
            for j in range(c, cols):
                m[ps + j] = m[ps + j] * inv
        for rr in range(rows):
            if rr == piv_r:
                continue
            f = m[rr * cols + c]
            if f:
                rrs = rr * cols
                for j in range(c, cols):
                    m[rrs + j] = m[rrs + j] - f * m[ps + j]
        pivots.append(c)
        piv_r += 1
    if not all(isinstance(v, Fraction) for v in m):
        m = [Fraction(v) for v in m]
    return m, pivots
