"""Mazur-Tate elements, their omega^i components and Iwasawa invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .ec_arith import valuation
from .modsym import Eigensymbol, evaluate_many

__all__ = [
    "RawTheta",
    "IsotypicElement",
    "IwasawaInvariants",
    "NonIntegralCoefficient",
    "NotUnitRoot",
    "DEFAULT_PRECISION",
    "raw_theta",
    "raw_theta_stabilized",
    "teichmuller",
    "omega_project",
    "discrete_log_one_plus_p",
    "to_polynomial",
    "from_polynomial",
    "invariants",
    "corestrict",
    "unit_root",
    "isotypic_invariants",
]

DEFAULT_PRECISION = 32
MAX_PRECISION = 1024


class NonIntegralCoefficient(ArithmeticError):
    pass


class NotUnitRoot(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class RawTheta:
    """Coefficients of sigma_a for a in (Z/p^{n+1})^x.

    Exact elements store ``numerators[k] / denominator`` at ``units[k]``;
    p-adic ones (``modulus`` set) store residues modulo ``modulus``.
    """

    p: int
    n: int
    units: np.ndarray
    numerators: np.ndarray
    denominator: int = 1
    modulus: int | None = None

    @property
    def coeffs(self) -> dict[int, Fraction | int]:
        if self.modulus is None:
            return {int(a): Fraction(int(x), self.denominator) for a, x in zip(self.units, self.numerators)}
        return {int(a): int(x) for a, x in zip(self.units, self.numerators)}

    def __len__(self) -> int:
        return len(self.units)


@dataclass(frozen=True)
class IsotypicElement:
    p: int
    n: int
    i: int
    precision: int
    coeffs: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return self.p ** self.precision


@dataclass(frozen=True)
class IwasawaInvariants:
    mu: int | None
    lam: int | None
    precision: int
    valid: bool


def _units(p: int, n: int) -> np.ndarray:
    a = np.arange(1, p ** (n + 1), dtype=np.int64)
    return a[a % p != 0]


def _check_pair(sym_plus: Eigensymbol, sym_minus: Eigensymbol, p: int):
    if sym_plus.level != sym_minus.level:
        raise ValueError("symbols have different levels")
    if sym_plus.sign != 1 or sym_minus.sign != -1:
        raise ValueError("expected a (+1, -1) pair of eigensymbols")
    if sym_plus.p_normalized_at != p or sym_minus.p_normalized_at != p:
        raise ValueError(f"symbols must be normalised at {p}")


def _sum_values(sym_plus, sym_minus, nums, den, threads):
    xp, dp = evaluate_many(sym_plus, nums, den, threads)
    xm, dm = evaluate_many(sym_minus, nums, den, threads)
    D = math.lcm(dp, dm)
    sp, sm = D // dp, D // dm
    if xp.dtype == object or xm.dtype == object or max(sp, sm) >= 2**15:
        xp, xm = xp.astype(object), xm.astype(object)
    return xp * sp + xm * sm, D


def raw_theta(sym_plus: Eigensymbol, sym_minus: Eigensymbol, p: int, n: int,
              threads: int = 1) -> RawTheta:
    _check_pair(sym_plus, sym_minus, p)
    units = _units(p, n)
    nums, D = _sum_values(sym_plus, sym_minus, units, p ** (n + 1), threads)
    return RawTheta(p, n, units, nums, D)


def _residues(nums, den: int, p: int, M: int) -> np.ndarray:
    """Images of nums/den in Z/p^M as an object array."""
    mod = p ** M
    nums = np.asarray(nums).astype(object)
    vd = int(valuation(den, p))
    if vd:
        step = p ** vd
        if any(x % step for x in nums):
            raise NonIntegralCoefficient(f"coefficient with negative {p}-adic valuation")
        nums = nums // step
        den //= step
    return nums * pow(den, -1, mod) % mod


def raw_theta_stabilized(sym_plus: Eigensymbol, sym_minus: Eigensymbol, p: int, n: int,
                         alpha, precision: int = DEFAULT_PRECISION, threads: int = 1) -> RawTheta:
    """Raw theta of the p-stabilised symbol, divided by alpha^{n+1}.

    ``alpha = +-1`` is the multiplicative case: no stabilisation term and the
    result stays exact. Otherwise alpha is an integer (a residue mod p^precision)
    or a rational p-adic unit.
    """
    _check_pair(sym_plus, sym_minus, p)
    if alpha in (1, -1):
        base = raw_theta(sym_plus, sym_minus, p, n, threads)
        sgn = int(alpha) ** (n + 1)
        return RawTheta(p, n, base.units, base.numerators * sgn, base.denominator)
    alpha = Fraction(alpha)
    if alpha == 0 or valuation(alpha.numerator, p) or valuation(alpha.denominator, p):
        raise NotUnitRoot(f"alpha = {alpha} is not a {p}-adic unit")
    mod = p ** precision
    a_inv = alpha.denominator * pow(alpha.numerator, -1, mod) % mod
    units = _units(p, n)
    top, D = _sum_values(sym_plus, sym_minus, units, p ** (n + 1), threads)
    low, D0 = _sum_values(sym_plus, sym_minus, units % p ** n, p ** n, threads)
    x = _residues(top, D, p, precision)
    y = _residues(low, D0, p, precision)
    coeff = (x - a_inv * y) % mod * pow(a_inv, n + 1, mod) % mod
    return RawTheta(p, n, units, coeff, 1, mod)


def teichmuller(a: int, p: int, M: int) -> int:
    if a % p == 0:
        raise ValueError(f"{a} is not a unit mod {p}")
    mod = p ** M
    x = a % mod
    while True:
        y = pow(x, p, mod)
        if y == x:
            return x
        x = y


@lru_cache(maxsize=16)
def _dlog_table(p: int, n: int) -> np.ndarray:
    m = p ** (n + 1)
    table = np.full(m, -1, dtype=np.int64)
    g = 1
    for j in range(p ** n):
        table[g] = j
        g = g * (1 + p) % m
    table.setflags(write=False)
    return table


def discrete_log_one_plus_p(u: int, p: int, n: int) -> int:
    """j in [0, p^n) with (1+p)^j = u mod p^{n+1}."""
    if u % p != 1 % p:
        raise ValueError(f"{u} is not 1 mod {p}")
    return int(_dlog_table(p, n)[u % p ** (n + 1)])


def _decompose(units: np.ndarray, p: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(a mod p, j) with sigma_a = delta(a mod p) * (1+p)^j."""
    m = p ** (n + 1)
    r = units % p
    tinv = np.zeros(p, dtype=np.int64)
    for b in range(1, p):
        tinv[b] = pow(teichmuller(b, p, n + 1), -1, m)
    g = units * tinv[r] % m
    return r, _dlog_table(p, n)[g]


def omega_project(raw: RawTheta, i: int, M: int = DEFAULT_PRECISION) -> IsotypicElement:
    p, n = raw.p, raw.n
    if not 0 <= i <= p - 2:
        raise ValueError(f"twist index must lie in [0, {p - 2}]")
    mod = p ** M
    if raw.modulus is None:
        res = _residues(raw.numerators, raw.denominator, p, M)
    else:
        if raw.modulus % mod:
            raise ValueError("raw element carries less precision than requested")
        res = np.asarray(raw.numerators).astype(object) % mod
    r, j = _decompose(raw.units, p, n)
    grid = np.zeros((p, p ** n), dtype=object)
    grid[r, j] = res
    out = np.zeros(p ** n, dtype=object)
    for b in range(1, p):
        out = (out + pow(teichmuller(b, p, M), i, mod) * grid[b]) % mod
    return IsotypicElement(p, n, i, M, tuple(int(x) for x in out))


def _limb_layout(p: int, M: int) -> tuple[int, int, int, int]:
    h = 1
    while p ** (h + 1) < 2**61:
        h += 1
    h = min(h, M)
    K = -(-M // h)
    return h, K, p ** h, p ** (M - (K - 1) * h)


def to_polynomial(elem: IsotypicElement) -> tuple[int, ...]:
    """Coefficients of sum_j c_j (1+T)^j modulo p^M, lowest degree first."""
    p, M = elem.p, elem.precision
    h, K, base, top = _limb_layout(p, M)
    limbs = np.zeros((len(elem.coeffs), K), dtype=np.int64)
    for j, c in enumerate(elem.coeffs):
        c %= p ** M
        for t in range(K - 1):
            c, limbs[j, t] = divmod(c, base)
        limbs[j, K - 1] = c
    P = kernels.binomial_transform(limbs, base, top)
    out = []
    for row in P:
        c = 0
        for t in range(K - 1, -1, -1):
            c = c * base + int(row[t])
        out.append(c)
    return tuple(out)


def from_polynomial(poly, p: int, M: int) -> tuple[int, ...]:
    """Inverse binomial transform: c_j = sum_{k >= j} (-1)^(k-j) C(k, j) a_k mod p^M."""
    mod = p ** M
    L = len(poly)
    coeffs = []
    for j in range(L):
        s = 0
        for k in range(j, L):
            s += (-1) ** (k - j) * math.comb(k, j) * poly[k]
        coeffs.append(s % mod)
    return tuple(coeffs)


def invariants(poly, p: int, M: int) -> IwasawaInvariants:
    mod = p ** M
    vals = [min(valuation(int(a) % mod, p), M) for a in poly]
    mu = min(vals, default=M)
    if mu >= M:
        return IwasawaInvariants(None, None, M, False)
    return IwasawaInvariants(int(mu), vals.index(mu), M, True)


def corestrict(elem: IsotypicElement) -> IsotypicElement:
    p, n = elem.p, elem.n
    if n < 1:
        raise ValueError("corestriction needs n >= 1")
    mod = elem.modulus
    grid = np.array(elem.coeffs, dtype=object).reshape(p, p ** (n - 1))
    return IsotypicElement(p, n - 1, elem.i, elem.precision,
                           tuple(int(x) % mod for x in grid.sum(axis=0)))


def unit_root(a_p: int, p: int, M: int = DEFAULT_PRECISION) -> int:
    """The root of X^2 - a_p X + p that is a p-adic unit, modulo p^M."""
    if a_p % p == 0:
        raise NotUnitRoot(f"a_{p} = {a_p} is not a unit: no unit root")
    mod = p ** M
    x = a_p % p
    prec = 1
    while prec < M:
        prec = min(2 * prec, M)
        f = x * x - a_p * x + p
        df = 2 * x - a_p
        x = (x - f * pow(df, -1, mod)) % mod
    assert (x * x - a_p * x + p) % mod == 0
    return x


def isotypic_invariants(raw: RawTheta, i: int, M: int = DEFAULT_PRECISION):
    """Project, transform and read off invariants, doubling M while undetermined.

    Returns ``(element, polynomial, invariants)``. A p-adic raw element caps
    the precision at its own modulus.
    """
    cap = MAX_PRECISION if raw.modulus is None else int(valuation(raw.modulus, raw.p))
    while True:
        elem = omega_project(raw, i, M)
        poly = to_polynomial(elem)
        inv = invariants(poly, raw.p, M)
        if inv.valid or 2 * M > cap:
            return elem, poly, inv
        M *= 2
