"""Elliptic curves over Q: invariants, point counts, local data at p >= 5, twists."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

__all__ = [
    "EllipticCurve",
    "LocalData",
    "SingularCurve",
    "BadReduction",
    "LimitExceeded",
    "NotAdditive",
    "SmallPrime",
    "InvalidTwist",
    "NonMinimalModel",
    "curve_invariants",
    "ap",
    "count_points",
    "count_points_naive",
    "reduction_ap",
    "eigenvalue_for_additive_prime",
    "local_reduction",
    "quadratic_twist",
    "star_discriminant",
    "valuation",
]

AP_PRIME_LIMIT = 10_000
INF = math.inf


class SingularCurve(ValueError):
    pass


class BadReduction(ValueError):
    pass


class LimitExceeded(ValueError):
    pass


class NotAdditive(ValueError):
    pass


class SmallPrime(ValueError):
    pass


class InvalidTwist(ValueError):
    pass


class NonMinimalModel(ValueError):
    """The model is not minimal at the requested prime (2 or 3 after a twist)."""


def valuation(x: int, p: int) -> float:
    """p-adic valuation of an integer; ``inf`` for zero."""
    if x == 0:
        return INF
    x = abs(x)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class EllipticCurve:
    """Weierstrass model ``[a1, a2, a3, a4, a6]`` with its conductor.

    ``minimal_at_2_3`` is False for models produced by :func:`quadratic_twist`,
    which are only minimised at primes >= 5.
    """

    label: str
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int
    minimal_at_2_3: bool = True

    def __post_init__(self):
        if self.discriminant == 0:
            raise SingularCurve(f"{self.label}: discriminant is zero")
        if self.conductor < 1:
            raise ValueError("conductor must be positive")
        delta = self.discriminant
        for ell in sympy.primefactors(self.conductor):
            if delta % ell:
                raise ValueError(f"{self.label}: prime {ell} divides N but not the discriminant")

    @classmethod
    def from_ainvs(cls, label: str, ainvs, conductor: int, **kw) -> "EllipticCurve":
        a1, a2, a3, a4, a6 = (int(a) for a in ainvs)
        return cls(label, a1, a2, a3, a4, a6, int(conductor), **kw)

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c4(self) -> int:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self) -> int:
        b2, b4, b6, _ = self.b_invariants
        return -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self) -> Fraction:
        return Fraction(self.c4 ** 3, self.discriminant)


def curve_invariants(curve: EllipticCurve) -> tuple[int, int, int, Fraction]:
    """Return ``(Delta, c4, c6, j)``; guarantees ``1728*Delta == c4**3 - c6**2``."""
    delta, c4, c6 = curve.discriminant, curve.c4, curve.c6
    if delta == 0:
        raise SingularCurve(curve.label)
    assert 1728 * delta == c4 ** 3 - c6 ** 2
    return delta, c4, c6, Fraction(c4 ** 3, delta)


# ---------------------------------------------------------------------------
# Point counting
# ---------------------------------------------------------------------------

def _reduced_ainvs(ainvs, ell):
    return [int(a) % ell for a in ainvs]


def count_points(ainvs, ell: int) -> int:
    """#E(F_ell) (projective, singular point included) via the quadratic character.

    Works for any model and any prime ell; for ell = 2 it enumerates y directly.
    """
    a1, a2, a3, a4, a6 = _reduced_ainvs(ainvs, ell)
    x = np.arange(ell, dtype=np.int64)
    rhs = (((x + a2) * x % ell + a4) * x + a6) % ell
    lin = (a1 * x + a3) % ell
    if ell == 2:
        total = 0
        for y in (0, 1):
            total += int(np.count_nonzero((y * y + lin * y - rhs) % 2 == 0))
        return total + 1
    # y^2 + lin*y = rhs  <=>  (2y + lin)^2 = lin^2 + 4 rhs
    disc = (lin * lin + 4 * rhs) % ell
    squares = np.zeros(ell, dtype=np.int64)
    squares[(x * x) % ell] = 1
    chi = np.where(disc == 0, 0, np.where(squares[disc] == 1, 1, -1))
    return int(ell + np.sum(chi)) + 1


def count_points_naive(ainvs, ell: int) -> int:
    """#E(F_ell) by enumerating every affine pair (x, y); O(ell^2)."""
    a1, a2, a3, a4, a6 = _reduced_ainvs(ainvs, ell)
    x = np.arange(ell, dtype=np.int64)[:, None]
    y = np.arange(ell, dtype=np.int64)[None, :]
    lhs = (y * y + a1 * x * y + a3 * y) % ell
    rhs = (((x + a2) * x % ell + a4) * x + a6) % ell
    return int(np.count_nonzero(lhs == rhs)) + 1


def reduction_ap(ainvs, ell: int) -> int:
    """``ell + 1 - #E~(F_ell)`` for the given model, whatever its reduction type."""
    if ell > AP_PRIME_LIMIT:
        raise LimitExceeded(f"prime {ell} above point-counting guard {AP_PRIME_LIMIT}")
    return ell + 1 - count_points(ainvs, ell)


def ap(curve: EllipticCurve, ell: int) -> int:
    """Trace of Frobenius a_ell for a prime of good reduction."""
    if curve.conductor % ell == 0:
        raise BadReduction(f"{ell} divides the conductor {curve.conductor}")
    if ell > AP_PRIME_LIMIT:
        raise LimitExceeded(f"prime {ell} above point-counting guard {AP_PRIME_LIMIT}")
    if ell in (2, 3) and not curve.minimal_at_2_3:
        raise NonMinimalModel(f"{curve.label} is not minimal at {ell}")
    a = reduction_ap(curve.ainvs, ell)
    if a * a > 4 * ell:
        raise ArithmeticError(f"Hasse bound violated: a_{ell} = {a}")
    return a


def eigenvalue_for_additive_prime(curve: EllipticCurve, p: int) -> int:
    """U_p eigenvalue of the newform at a prime of additive reduction (always 0)."""
    if curve.conductor % (p * p):
        raise NotAdditive(f"{p}^2 does not divide {curve.conductor}")
    return 0


# ---------------------------------------------------------------------------
# Local reduction data at p >= 5
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalData:
    p: int
    ord_delta_min: int
    ord_c4: float
    ord_j: float
    kodaira: str
    reduction_class: str
    potential_class: str
    defect_e: int
    c4_min: int = field(repr=False, compare=False, default=0)
    c6_min: int = field(repr=False, compare=False, default=0)

    @property
    def additive(self) -> bool:
        return self.reduction_class == "additive"


def _minimize_at(c4: int, c6: int, delta: int, p: int) -> tuple[int, int, int]:
    while c4 % p ** 4 == 0 and c6 % p ** 6 == 0 and delta % p ** 12 == 0:
        c4 //= p ** 4
        c6 //= p ** 6
        delta //= p ** 12
    return c4, c6, delta


def _kodaira(vc4: float, vd: int, vj: float) -> str:
    if vd == 0:
        return "I0"
    if vc4 == 0:
        return f"I{vd}"
    if vj < 0:
        return f"I{-int(vj)}*"
    return {2: "II", 3: "III", 4: "IV", 6: "I0*", 8: "IV*", 9: "III*", 10: "II*"}[vd]


def _short_model(c4: int, c6: int) -> list[int]:
    # y^2 = x^3 - 27 c4 x - 54 c6, isomorphic to the original away from 2 and 3
    return [0, 0, 0, -27 * c4, -54 * c6]


def local_reduction(curve: EllipticCurve, p: int) -> LocalData:
    """Reduction type, Kodaira symbol and semistability defect at a prime p >= 5."""
    if p < 5:
        raise SmallPrime("local classification needs p >= 5")
    c4, c6, delta = _minimize_at(curve.c4, curve.c6, curve.discriminant, p)
    vd = int(valuation(delta, p))
    vc4 = valuation(c4, p)
    vj = 3 * vc4 - vd if c4 else INF
    kod = _kodaira(vc4, vd, vj)

    if vd == 0:
        a = reduction_ap(_short_model(c4, c6), p)
        red = "good-supersingular" if a % p == 0 else "good-ordinary"
        pot, e = "already-semistable", 1
    elif vc4 == 0:
        red, pot, e = "multiplicative", "already-semistable", 1
    else:
        red = "additive"
        if vj < 0:
            pot, e = "pot-multiplicative", 1
        else:
            e = 12 // math.gcd(12, vd)
            if e > 2:
                ordinary = (p - 1) % e == 0
            else:
                tw_c4 = c4 * star_discriminant(p) ** 2
                tw_c6 = c6 * star_discriminant(p) ** 3
                tw_c4, tw_c6, _ = _minimize_at(tw_c4, tw_c6, (tw_c4 ** 3 - tw_c6 ** 2) // 1728, p)
                ordinary = reduction_ap(_short_model(tw_c4, tw_c6), p) % p != 0
            pot = "pot-good-ordinary" if ordinary else "pot-good-supersingular"
    return LocalData(p, vd, vc4, vj, kod, red, pot, e, c4, c6)


# ---------------------------------------------------------------------------
# Quadratic twists
# ---------------------------------------------------------------------------

def star_discriminant(p: int) -> int:
    """``(-1)^((p-1)/2) * p``: the fundamental discriminant of Q(sqrt p*) inside Q(mu_p)."""
    if p % 2 == 0:
        raise ValueError("p must be odd")
    return p if p % 4 == 1 else -p


def _conductor_exponent(ld: LocalData) -> int:
    if ld.reduction_class.startswith("good"):
        return 0
    if ld.reduction_class == "multiplicative":
        return 1
    return 2


def quadratic_twist(curve: EllipticCurve, d: int) -> EllipticCurve:
    """Twist by Q(sqrt d) as a short model minimised at every prime >= 5.

    Conductor exponents are recomputed at primes >= 5 dividing d and carried
    over elsewhere; the model is flagged as not minimal at 2 and 3.
    """
    if d == 0 or any(k > 1 for k in sympy.factorint(abs(d)).values()):
        raise InvalidTwist(f"twist parameter {d} is not squarefree")
    if any(ell in (2, 3) for ell in sympy.primefactors(d)):
        raise InvalidTwist("twists ramified at 2 or 3 need Tate's algorithm")
    A = -27 * curve.c4 * d * d
    B = -54 * curve.c6 * d ** 3
    for ell in sympy.primefactors(math.gcd(A, B)):
        if ell < 5:
            continue
        while A % ell ** 4 == 0 and B % ell ** 6 == 0:
            A //= ell ** 4
            B //= ell ** 6
    model = EllipticCurve(f"{curve.label}^({d})", 0, 0, 0, A, B, 1, minimal_at_2_3=False)
    N = curve.conductor
    for ell in sympy.primefactors(d):
        while N % ell == 0:
            N //= ell
        N *= ell ** _conductor_exponent(local_reduction(model, ell))
    return EllipticCurve(model.label, 0, 0, 0, A, B, N, minimal_at_2_3=False)
