"""Closed-form growth laws for lambda and exact fitting of observed sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import sympy

__all__ = [
    "GrowthModel",
    "Inconsistent",
    "NotPotOrdinaryShape",
    "NotStabilized",
    "q",
    "f",
    "predicted_lambda_quad",
    "predicted_lambda_ss",
    "predicted_lambda_bsd",
    "fit_growth",
    "model_residuals",
    "stable_lambda",
    "conjecture_cm_exponent",
]

CONVENTIONS = ("q_{n-1}", "q_n")


class Inconsistent(ValueError):
    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class NotPotOrdinaryShape(ValueError):
    pass


class NotStabilized(ValueError):
    pass


def q(n: int, p: int) -> int:
    """p^{n-1} - p^{n-2} + ... down to p - 1 (n even) or p^2 - p (n odd)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = 0
    for k in range(2, n + 1):
        out = p * out + (p - 1) * (k % 2 == 0)
    return out


def f(n: int, p: int, d: int) -> int:
    if n < 1:
        raise ValueError("n must be at least 1")
    return p ** n * d // 12 - p ** (n - 1) * d // 12


def predicted_lambda_quad(p: int, n: int, lambda_twist: int) -> int:
    return (p - 1) // 2 * p ** (n - 1) + lambda_twist


def predicted_lambda_ss(p: int, n: int, lambda_plus: int, lambda_minus: int) -> int:
    return (p - 1) // 2 * p ** (n - 1) + q(n, p) + (lambda_plus if n % 2 == 0 else lambda_minus)


def predicted_lambda_bsd(p: int, n: int, d: int, lambda_x: int) -> int:
    num = (p - 1) * d * p ** (n - 1)
    if num % 12:
        raise NotPotOrdinaryShape(f"12 does not divide (p-1)*d*p^(n-1) = {num}")
    return num // 12 + lambda_x


@dataclass(frozen=True)
class GrowthModel:
    """lambda_n = a p^{n-1} + b q_k + c_parity, with k = n-1 or n."""

    p: int
    a: Fraction
    b: Fraction
    c_even: Fraction
    c_odd: Fraction
    index_convention: str = "q_{n-1}"

    def q_term(self, n: int) -> int:
        return q(n - 1 if self.index_convention == "q_{n-1}" else n, self.p)

    def predict(self, n: int) -> Fraction:
        c = self.c_even if n % 2 == 0 else self.c_odd
        return self.a * self.p ** (n - 1) + self.b * self.q_term(n) + c


def _row(n: int, p: int, convention: str) -> list[int]:
    k = n - 1 if convention == "q_{n-1}" else n
    return [p ** (n - 1), q(k, p), int(n % 2 == 0), int(n % 2 == 1)]


def model_residuals(model: GrowthModel, points) -> dict[int, Fraction]:
    """Observed minus predicted, for every point that misses."""
    out = {}
    for n, lam in points:
        r = Fraction(lam) - model.predict(n)
        if r:
            out[n] = r
    return out


def _canonical(s0: list[Fraction], direction: list[Fraction], p: int) -> list[Fraction]:
    """Pick the member of s0 + t*direction with 0 <= b < p+1, preferring integral entries."""
    if direction[1] == 0:
        return s0
    direction = [x * (p + 1) / direction[1] for x in direction]
    lo = -s0[1] / (p + 1)
    candidates = []
    da = direction[0]
    if da:
        # t in [lo, lo + 1) making a integral
        a_lo, a_hi = sorted((s0[0] + da * lo, s0[0] + da * (lo + 1)))
        for k in range(math.ceil(a_lo), math.floor(a_hi) + 1):
            t = (k - s0[0]) / da
            if lo <= t < lo + 1:
                candidates.append(t)
    for t in sorted(candidates) + [lo]:
        vals = [x + t * d for x, d in zip(s0, direction)]
        if all(v.denominator == 1 for v in vals):
            return vals
    return [x + lo * d for x, d in zip(s0, direction)]


def fit_growth(points, p: int, a=None) -> GrowthModel:
    """Exact solve for (a, b, c_even, c_odd); ``a`` may be pinned in advance.

    Needs four points (three with a pinned) covering both parities. The
    q_{n-1} convention is tried before q_n.

    Since q_k = (p^k - 1)/(p+1) for even k and (p^k - p)/(p+1) for odd k,
    the four unknowns are only determined up to the shift
    b -> b + (p+1)t absorbed by a and the parity constants. The returned
    model is the member with 0 <= b < p+1 and integral coefficients when
    one exists.
    """
    points = sorted((int(n), int(lam)) for n, lam in points)
    if len({n for n, _ in points}) != len(points):
        raise ValueError("duplicate n in points")
    need = 3 if a is not None else 4
    if len(points) < need or len({n % 2 for n, _ in points}) < 2:
        raise ValueError(f"need at least {need} points covering both parities")
    residuals = {}
    for conv in CONVENTIONS:
        rows = [_row(n, p, conv) for n, _ in points]
        rhs = [lam for _, lam in points]
        if a is not None:
            rhs = [r - Fraction(a) * row[0] for r, row in zip(rhs, rows)]
            rows = [row[1:] for row in rows]
        A = sympy.Matrix(rows)
        try:
            sol, params = A.gauss_jordan_solve(sympy.Matrix([sympy.Rational(x) for x in rhs]))
        except ValueError:
            residuals[conv] = "no exact solution"
            continue
        zero = {t: 0 for t in params}
        s0 = [Fraction(int(x.p), int(x.q)) for x in sol.subs(zero)]
        if a is not None:
            s0 = [Fraction(a)] + s0
        elif params.shape[0] == 1:
            t = params[0]
            direction = [Fraction(int(x.p), int(x.q)) for x in sol.diff(t)]
            s0 = _canonical(s0, direction, p)
        model = GrowthModel(p, *s0, index_convention=conv)
        miss = model_residuals(model, points)
        if not miss:
            return model
        residuals[conv] = miss
    raise Inconsistent(f"no growth model fits {points}", residuals)


def _lambda_of(entry):
    if isinstance(entry, int):
        return entry
    return entry.lam if entry.valid else None


def stable_lambda(invariants_by_n) -> int:
    """Common lambda of the last two entries (invariants or plain integers)."""
    if len(invariants_by_n) < 2:
        raise ValueError("need at least two entries")
    prev, last = (_lambda_of(x) for x in invariants_by_n[-2:])
    if prev is None or last is None:
        raise NotStabilized("undetermined invariants among the last two entries")
    if last != prev:
        raise NotStabilized(f"lambda still moving: {prev} -> {last}")
    return last


def conjecture_cm_exponent(M: int, lambda_pm: tuple[int, int], nu: int, n: int, p: int) -> int:
    """M p^n + (q_n + lambda_pm) n + nu, taking lambda_plus for even n.

    ``lambda_pm`` is ``(lambda_plus, lambda_minus)``; the whole bracket is
    multiplied by n.
    """
    lam = lambda_pm[0] if n % 2 == 0 else lambda_pm[1]
    return M * p ** n + (q(n, p) + lam) * n + nu
