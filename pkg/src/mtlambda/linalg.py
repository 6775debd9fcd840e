"""Exact sparse elimination over Q and the modular lifting helpers."""

from __future__ import annotations

import math
from fractions import Fraction

# Word-size primes below 2**31 used for the modular eigenspace computations.
MODULAR_PRIMES = (2147483629, 2147483587, 2147483579, 2147483563, 2147483549, 2147483543)


def _normalize(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for c in row.values():
        g = math.gcd(g, c)
        if g == 1:
            return row
    return {k: c // g for k, c in row.items()} if g > 1 else row


class SparseEchelon:
    """Incremental fraction-free echelon form of integer relation rows.

    Rows are dicts ``column -> integer``. Each accepted row becomes a pivot
    row; pivot rows only reference columns that are free or pivots created
    later, which makes back substitution a single reverse sweep.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, dict[int, int]] = {}
        self.order: list[int] = []
        self._time: dict[int, int] = {}

    def add(self, row: dict[int, int]) -> bool:
        row = {k: c for k, c in row.items() if c}
        while row:
            hits = [k for k in row if k in self.pivots]
            if not hits:
                break
            k = min(hits, key=self._time.__getitem__)
            piv = self.pivots[k]
            a, b = piv[k], row[k]
            g = math.gcd(a, b)
            a //= g
            b //= g
            new = {j: a * c for j, c in row.items()}
            for j, c in piv.items():
                val = new.get(j, 0) - b * c
                if val:
                    new[j] = val
                else:
                    new.pop(j, None)
            row = _normalize(new)
        if not row:
            return False
        units = [k for k, c in row.items() if c in (1, -1)]
        k = max(units) if units else max(row)
        self.pivots[k] = row
        self._time[k] = len(self.order)
        self.order.append(k)
        return True

    @property
    def rank(self) -> int:
        return len(self.order)

    def free_columns(self) -> list[int]:
        return [j for j in range(self.ncols) if j not in self.pivots]

    def solve(self) -> dict[int, dict[int, Fraction]]:
        """Express every column as a rational combination of the free columns."""
        expr: dict[int, dict[int, Fraction]] = {j: {j: Fraction(1)} for j in self.free_columns()}
        for k in reversed(self.order):
            row = self.pivots[k]
            lead = row[k]
            out: dict[int, Fraction] = {}
            for j, c in row.items():
                if j == k:
                    continue
                f = Fraction(-c, lead)
                for b, d in expr[j].items():
                    val = out.get(b, 0) + f * d
                    if val:
                        out[b] = val
                    else:
                        out.pop(b, None)
            expr[k] = out
        return expr


def rational_reconstruction(a: int, m: int) -> Fraction | None:
    """Smallest r/s with r = a*s (mod m) and |r|, s <= sqrt(m/2), or None."""
    a %= m
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def crt_pair(a1: int, m1: int, a2: int, m2: int) -> tuple[int, int]:
    """Combine x = a1 (m1), x = a2 (m2) for coprime moduli."""
    t = ((a2 - a1) * pow(m1, -1, m2)) % m2
    return a1 + m1 * t, m1 * m2


def primitive_integer_vector(values) -> list[int]:
    """Scale a rational vector to coprime integers, first nonzero entry positive."""
    values = [Fraction(v) for v in values]
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(v * den) for v in values]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return [-x for x in ints] if lead < 0 else ints
