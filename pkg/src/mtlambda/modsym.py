"""Weight-2 modular symbols for Gamma_0(N) in the Manin-symbol presentation.

A Manin symbol is a point (u : v) of P^1(Z/N). Modular symbols are the
quotient of the free module on these points by

* the two-term relation  x + xS = 0,        (u, v)S = (v, -u)
* the three-term relation x + xT + xT^2 = 0, (u, v)T = (v, -u - v)
* optionally the sign relation x = s * x iota, (u, v)iota = (-u, v).

A symbol in the dual picture is a vector of values on the basis symbols; the
reduction map extends it to every Manin symbol. Hecke operators act through
the Heilbronn-Merel matrices of determinant l.

The eigensymbol attached to a curve is located modulo a word-size prime,
lifted by rational reconstruction and then verified in exact arithmetic.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import sympy

from . import kernels
from .ec_arith import BadReduction, EllipticCurve, NonMinimalModel, ap, valuation
from .linalg import (
    MODULAR_PRIMES,
    SparseEchelon,
    crt_pair,
    primitive_integer_vector,
    rational_reconstruction,
)

__all__ = [
    "P1Element",
    "P1List",
    "SymbolSpace",
    "Eigensymbol",
    "BadPrime",
    "NotIsolated",
    "NoEigenspace",
    "ReconstructionFailed",
    "build_p1",
    "build_space",
    "heilbronn_merel",
    "hecke_matrix",
    "iota_matrix",
    "eigensymbol",
    "normalize_at_p",
    "evaluate",
    "evaluate_many",
    "continued_fraction_path",
]

DEFAULT_PRIME_BOUND = 50


class BadPrime(ValueError):
    pass


class NotIsolated(ArithmeticError):
    def __init__(self, dimension: int, bound: int):
        super().__init__(f"eigenspace still has dimension {dimension} after primes <= {bound}")
        self.dimension = dimension


class NoEigenspace(ArithmeticError):
    pass


class ReconstructionFailed(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# P^1(Z/N)
# ---------------------------------------------------------------------------

class P1Element(NamedTuple):
    u: int
    v: int
    index: int


class P1List:
    """Canonical representatives of P^1(Z/N) with O(1) lookup.

    The representative of a class minimises v, then u, over unit scalings.
    """

    def __init__(self, level: int, reps: list[tuple[int, int]], table: np.ndarray):
        self.level = level
        self.reps = reps
        self.table = table
        table.setflags(write=False)
        self.u = np.array([r[0] for r in reps], dtype=np.int64)
        self.v = np.array([r[1] for r in reps], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.reps)

    def __getitem__(self, i: int) -> P1Element:
        u, v = self.reps[i]
        return P1Element(u, v, i)

    def __iter__(self):
        return (P1Element(u, v, i) for i, (u, v) in enumerate(self.reps))

    def index(self, u: int, v: int) -> int:
        N = self.level
        k = int(self.table[(u % N) * N + v % N])
        if k < 0:
            raise ValueError(f"({u} : {v}) is not a point of P^1(Z/{N})")
        return k

    def index_array(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        N = self.level
        return self.table[(u % N) * N + v % N].astype(np.int64)


@lru_cache(maxsize=32)
def build_p1(N: int) -> P1List:
    if N < 1:
        raise ValueError("level must be positive")
    if N == 1:
        return P1List(1, [(0, 0)], np.zeros(1, dtype=np.int32))
    units = np.array([t for t in range(N) if math.gcd(t, N) == 1], dtype=np.int64)
    table = np.full(N * N, -1, dtype=np.int32)
    reps: list[tuple[int, int]] = []
    # v ranges over divisors in increasing order; v = 0 (the divisor N) comes last
    for g in sympy.divisors(N):
        v = g % N
        for u in range(N):
            if math.gcd(math.gcd(u, g), N) != 1 or table[u * N + v] >= 0:
                continue
            table[((units * u) % N) * N + (units * v) % N] = len(reps)
            reps.append((u, v))
    return P1List(N, reps, table)


# ---------------------------------------------------------------------------
# Relation reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymbolSpace:
    """Quotient of the Manin-symbol module by the relations.

    ``basis`` holds the Manin indices of the basis symbols and
    ``reduction_map[x]`` expresses symbol x as ``{basis position: coefficient}``.
    """

    level: int
    sign: int
    p1: P1List
    basis: tuple[int, ...]
    reduction_map: tuple[dict[int, Fraction], ...]
    _dense_mod: dict = field(default_factory=dict, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def reduce(self, u: int, v: int) -> dict[int, Fraction]:
        return self.reduction_map[self.p1.index(u, v)]

    def reduction_matrix(self) -> np.ndarray:
        R = np.full((len(self.p1), self.dimension), Fraction(0), dtype=object)
        for x, row in enumerate(self.reduction_map):
            for c, val in row.items():
                R[x, c] = val
        return R

    def reduction_mod(self, q: int) -> np.ndarray:
        """Dense reduction matrix modulo the prime q."""
        if q not in self._dense_mod:
            R = np.zeros((len(self.p1), self.dimension), dtype=np.int64)
            for x, row in enumerate(self.reduction_map):
                for c, val in row.items():
                    R[x, c] = val.numerator * pow(val.denominator, -1, q) % q
            R.setflags(write=False)
            self._dense_mod[q] = R
        return self._dense_mod[q]

    def extend(self, values) -> list[Fraction]:
        """Values on every Manin symbol from values on the basis."""
        vals = [Fraction(x) for x in values]
        return [sum((c * vals[b] for b, c in row.items()), Fraction(0)) for row in self.reduction_map]


def _generators(p1: P1List, sign: int):
    """Orbits under S (and iota when sign != 0).

    Returns ``gen[x] = (generator, coefficient)`` or None for symbols forced
    to vanish, plus the Manin index of each generator.
    """
    n = len(p1)
    u, v = p1.u, p1.v
    s_img = p1.index_array(v, -u)
    i_img = p1.index_array(-u, v)
    gen: list[tuple[int, int] | None] = [None] * n
    seen = np.zeros(n, dtype=bool)
    free: list[int] = []
    for x in range(n):
        if seen[x]:
            continue
        coef = {x: 1}
        stack = [x]
        consistent = True
        while stack:
            y = stack.pop()
            moves = [(int(s_img[y]), -1)]
            if sign:
                moves.append((int(i_img[y]), sign))
            for z, c in moves:
                cz = coef[y] * c
                if z in coef:
                    consistent &= coef[z] == cz
                else:
                    coef[z] = cz
                    stack.append(z)
        for y in coef:
            seen[y] = True
        if consistent:
            g = len(free)
            free.append(x)
            for y, c in coef.items():
                gen[y] = (g, c)
    return gen, free


def _three_term_rows(p1: P1List, gen):
    u, v = p1.u, p1.v
    t_img = p1.index_array(v, -u - v)
    done = np.zeros(len(p1), dtype=bool)
    for x in range(len(p1)):
        if done[x]:
            continue
        y = int(t_img[x])
        z = int(t_img[y])
        orbit = (x, y, z) if len({x, y, z}) == 3 else (x, x, x)
        done[[x, y, z]] = True
        row: dict[int, int] = {}
        for w in orbit:
            if gen[w] is not None:
                g, c = gen[w]
                row[g] = row.get(g, 0) + c
        yield row


@lru_cache(maxsize=16)
def build_space(N: int, sign: int = 0) -> SymbolSpace:
    """Modular symbols of weight 2 for Gamma_0(N), restricted to a sign subspace."""
    if sign not in (-1, 0, 1):
        raise ValueError("sign must be -1, 0 or 1")
    p1 = build_p1(N)
    gen, free = _generators(p1, sign)
    ech = SparseEchelon(len(free))
    for row in _three_term_rows(p1, gen):
        ech.add(row)
    expr = ech.solve()
    basis_gens = ech.free_columns()
    pos = {g: i for i, g in enumerate(basis_gens)}
    by_gen = [{pos[b]: c for b, c in expr[g].items()} for g in range(len(free))]
    rmap = []
    for x in range(len(p1)):
        if gen[x] is None:
            rmap.append({})
        else:
            g, s = gen[x]
            rmap.append(by_gen[g] if s == 1 else {b: -c for b, c in by_gen[g].items()})
    return SymbolSpace(N, sign, p1, tuple(free[g] for g in basis_gens), tuple(rmap))


# ---------------------------------------------------------------------------
# Hecke action
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def heilbronn_merel(ell: int) -> np.ndarray:
    """Matrices [[a, b], [c, d]] with ad - bc = ell, a > b >= 0, d > c >= 0."""
    out = []
    for a in range(1, ell + 1):
        for d in range(1, ell + 1):
            bc = a * d - ell
            if bc < 0:
                continue
            if bc == 0:
                out.extend((a, 0, c, d) for c in range(d))
                out.extend((a, b, 0, d) for b in range(1, a))
            else:
                for b in range(1, a):
                    if bc % b == 0 and bc // b < d:
                        out.append((a, b, bc // b, d))
    arr = np.array(out, dtype=np.int64).reshape(-1, 4)
    arr.setflags(write=False)
    return arr


def _hecke_targets(space: SymbolSpace, ell: int, symbols=None) -> np.ndarray:
    """Manin index of x*h for each basis symbol x (rows) and Heilbronn matrix h."""
    if space.level % ell == 0:
        raise BadPrime(f"{ell} divides the level {space.level}")
    if not sympy.isprime(ell):
        raise BadPrime(f"{ell} is not prime")
    idx = np.asarray(space.basis if symbols is None else symbols, dtype=np.int64)
    u = space.p1.u[idx][:, None]
    v = space.p1.v[idx][:, None]
    H = heilbronn_merel(ell)
    return space.p1.index_array(u * H[:, 0] + v * H[:, 2], u * H[:, 1] + v * H[:, 3])


def _gather_exact(space: SymbolSpace, targets: np.ndarray) -> np.ndarray:
    d = space.dimension
    M = np.full((targets.shape[0], d), Fraction(0), dtype=object)
    for i, row in enumerate(targets):
        acc: dict[int, Fraction] = {}
        for x in row:
            for c, val in space.reduction_map[x].items():
                acc[c] = acc.get(c, 0) + val
        for c, val in acc.items():
            M[i, c] = Fraction(val)
    return M


def hecke_matrix(space: SymbolSpace, ell: int) -> np.ndarray:
    """Exact T_ell on value vectors: ``(T v)[b] = sum_h (R v)[b h]``."""
    return _gather_exact(space, _hecke_targets(space, ell))


def iota_matrix(space: SymbolSpace) -> np.ndarray:
    idx = np.asarray(space.basis, dtype=np.int64)
    targets = space.p1.index_array(-space.p1.u[idx], space.p1.v[idx])
    return _gather_exact(space, targets[:, None])


# ---------------------------------------------------------------------------
# Eigensymbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Eigensymbol:
    """Values of a Hecke eigensymbol on the basis and on every Manin symbol."""

    level: int
    sign: int
    label: str
    values: tuple[Fraction, ...]
    identifying_eigenvalues: tuple[tuple[int, int], ...] = ()
    manin_values: tuple[Fraction, ...] = ()
    p_normalized_at: int | None = None
    _scaled: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(x) for x in self.values))
        object.__setattr__(self, "manin_values", tuple(Fraction(x) for x in self.manin_values))
        if self.manin_values:
            den = math.lcm(*(x.denominator for x in self.manin_values))
            ints = [int(x * den) for x in self.manin_values]
            big = max(abs(x) for x in ints)
            arr = np.array(ints, dtype=np.int64) if big < 2**40 else None
            object.__setattr__(self, "_scaled", (arr, den))

    def scaled_manin_values(self) -> tuple[np.ndarray | None, int]:
        """``(D * manin_values as int64, D)``; the array is None if entries are too large."""
        if self._scaled is None:
            raise ValueError("symbol carries no Manin-symbol values")
        return self._scaled


def _eigen_primes(space: SymbolSpace, curve: EllipticCurve, bound: int):
    for ell in sympy.primerange(2, bound + 1):
        if space.level % ell == 0:
            continue
        try:
            yield ell, ap(curve, ell)
        except (BadReduction, NonMinimalModel):
            continue


def _isolate_mod(space: SymbolSpace, primes, q: int):
    """Kernel of all (T_ell - a_ell) modulo q; returns (basis rows, primes used)."""
    d = space.dimension
    Rq = space.reduction_mod(q)
    K = np.eye(d, dtype=np.int64)
    used = []
    for ell, a in primes:
        used.append((ell, a))
        W = Rq if len(used) == 1 else kernels.matmul_mod(Rq, K.T, q)
        P = kernels.gather_sum_mod(_hecke_targets(space, ell), W, q)
        P = (P - (a % q) * K.T) % q
        C = kernels.nullspace_mod(P, q)
        K = kernels.matmul_mod(C, K, q) if C.shape[0] else C
        if K.shape[0] <= 1:
            break
    return K, used


def _verify_exact(space: SymbolSpace, full: list[Fraction], eigen) -> bool:
    p1 = space.p1
    u, v = p1.u, p1.v
    vals = np.array(full, dtype=object)
    if np.any(vals + vals[p1.index_array(v, -u)] != 0):
        return False
    t1 = p1.index_array(v, -u - v)
    if np.any(vals + vals[t1] + vals[t1[t1]] != 0):
        return False
    if space.sign and np.any(vals - space.sign * vals[p1.index_array(-u, v)] != 0):
        return False
    basis_vals = vals[list(space.basis)]
    for ell, a in eigen:
        tv = vals[_hecke_targets(space, ell)].sum(axis=1)
        if np.any(tv != a * basis_vals):
            return False
    return True


def eigensymbol(space: SymbolSpace, curve: EllipticCurve, sign: int,
                prime_bound: int = DEFAULT_PRIME_BOUND) -> Eigensymbol:
    """Content-one integral eigensymbol of ``curve`` in the given sign subspace."""
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    if space.sign != sign:
        space = build_space(space.level, sign)
    primes = list(_eigen_primes(space, curve, prime_bound))
    if space.dimension == 0:
        raise NoEigenspace(f"sign {sign} space of level {space.level} is zero")

    residues: list[int] | None = None
    modulus = 1
    lead = None
    used = None
    for q in MODULAR_PRIMES:
        K, used_q = _isolate_mod(space, primes, q)
        if K.shape[0] == 0:
            raise NoEigenspace(f"{curve.label} has no eigensymbol at level {space.level}")
        if K.shape[0] > 1:
            raise NotIsolated(K.shape[0], prime_bound)
        vec = K[0]
        if lead is None:
            lead = int(np.flatnonzero(vec)[0])
            used = used_q
        if vec[lead] == 0 or used_q != used:
            continue
        vec = vec * pow(int(vec[lead]), -1, q) % q
        if residues is None:
            residues, modulus = [int(x) for x in vec], q
        else:
            pairs = [crt_pair(r, modulus, int(x), q) for r, x in zip(residues, vec)]
            residues, modulus = [r for r, _ in pairs], pairs[0][1]
        lifted = [rational_reconstruction(r, modulus) for r in residues]
        if any(f is None for f in lifted):
            continue
        ints = primitive_integer_vector(lifted)
        full = space.extend(ints)
        if _verify_exact(space, full, used):
            return Eigensymbol(space.level, sign, curve.label, tuple(Fraction(x) for x in ints),
                               tuple(used), tuple(full))
    raise ReconstructionFailed(f"could not lift the eigensymbol of {curve.label}")


def normalize_at_p(symbol: Eigensymbol, p: int) -> Eigensymbol:
    """Rescale so that the minimal p-adic valuation of the basis values is zero."""
    vals = [x for x in symbol.values if x]
    if not vals:
        raise ValueError("cannot normalise the zero symbol")
    m = min(valuation(x.numerator, p) - valuation(x.denominator, p) for x in vals)
    scale = Fraction(p) ** (-m)
    return replace(
        symbol,
        values=tuple(x * scale for x in symbol.values),
        manin_values=tuple(x * scale for x in symbol.manin_values),
        p_normalized_at=p,
    )


# ---------------------------------------------------------------------------
# Evaluation on paths from oo
# ---------------------------------------------------------------------------

def _partial_quotients(r: Fraction, method: str):
    a, b = r.numerator, r.denominator
    while b:
        if method == "floor":
            q = a // b
        elif method == "nearest":
            q = (2 * a + b) // (2 * b)
        else:
            raise ValueError(f"unknown continued fraction method {method!r}")
        yield q
        a, b = b, a - q * b


def continued_fraction_path(r, method: str = "floor") -> list[tuple[int, int]]:
    """Manin symbols (c : d) whose unimodular segments chain oo to r."""
    r = Fraction(r)
    pm2, qm2, pm1, qm1 = 0, 1, 1, 0
    out = []
    for q in _partial_quotients(r, method):
        pk, qk = q * pm1 + pm2, q * qm1 + qm2
        det = pk * qm1 - pm1 * qk
        out.append((det * qk, qm1))
        pm2, qm2, pm1, qm1 = pm1, qm1, pk, qk
    return out


def evaluate(symbol: Eigensymbol, r, method: str = "floor") -> Fraction:
    """Value of the symbol on the path from oo to the cusp r."""
    p1 = build_p1(symbol.level)
    return sum((symbol.manin_values[p1.index(c, d)] for c, d in continued_fraction_path(r, method)),
               Fraction(0))


def evaluate_many(symbol: Eigensymbol, nums, den: int, threads: int = 1) -> tuple[np.ndarray, int]:
    """Values at nums[i]/den as ``(integer numerators, common denominator)``.

    Results are independent of ``threads``; work is split into contiguous
    chunks whose outputs are concatenated in order.
    """
    arr, D = symbol.scaled_manin_values()
    nums = np.asarray(nums, dtype=np.int64)
    if arr is None or den >= 2**31:
        out = [evaluate(symbol, Fraction(int(a), den)) * D for a in nums]
        return np.array([int(x) for x in out], dtype=object), D
    table = build_p1(symbol.level).table
    if threads <= 1 or nums.size < 4096:
        return kernels.cf_path_values(nums, den, symbol.level, table, arr), D
    chunks = np.array_split(nums, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: kernels.cf_path_values(c, den, symbol.level, table, arr), chunks))
    return np.concatenate(parts), D
