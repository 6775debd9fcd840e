"""End-to-end lambda computations with eigensymbol caching and a cost guard."""

from __future__ import annotations

from dataclasses import dataclass

from . import cache as cache_mod
from .ec_arith import EllipticCurve
from .mazur_tate import (
    DEFAULT_PRECISION,
    corestrict,
    isotypic_invariants,
    raw_theta,
    raw_theta_stabilized,
)
from .modsym import DEFAULT_PRIME_BOUND, Eigensymbol, build_space, eigensymbol, normalize_at_p

DEFAULT_COST_GUARD = 10**6


class CostGuard(ValueError):
    def __init__(self, estimate: int, guard: int):
        super().__init__(f"{estimate} symbol evaluations requested, guard is {guard}")
        self.estimate = estimate
        self.guard = guard


@dataclass(frozen=True)
class ThetaResult:
    n: int
    i: int
    mu: int | None
    lam: int | None
    valid: bool
    precision: int
    corestriction_zero: bool | None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "i": self.i,
            "mu": self.mu,
            "lambda": self.lam,
            "valid": self.valid,
            "precision": self.precision,
            "corestriction_zero": self.corestriction_zero,
        }


def evaluation_cost(p: int, n_values, stabilized: bool = False) -> int:
    """Continued-fraction evaluations (per symbol) needed for the given layers."""
    per = sum((p - 1) * p ** n for n in n_values)
    return 2 * per if stabilized else per


class Pipeline:
    def __init__(self, cache_dir=None, threads: int = 1, prime_bound: int = DEFAULT_PRIME_BOUND,
                 cost_guard: int = DEFAULT_COST_GUARD):
        self.cache_dir = cache_dir
        self.threads = max(1, int(threads))
        self.prime_bound = prime_bound
        self.cost_guard = cost_guard
        self._memo: dict[tuple[str, int, int], Eigensymbol] = {}

    def check_cost(self, p: int, n_values, stabilized: bool = False) -> int:
        est = evaluation_cost(p, n_values, stabilized)
        if est > self.cost_guard:
            raise CostGuard(est, self.cost_guard)
        return est

    def eigensymbol(self, curve: EllipticCurve, sign: int) -> Eigensymbol:
        key = (curve.label, curve.conductor, sign)
        if key in self._memo:
            return self._memo[key]
        path = None
        sym = None
        if self.cache_dir is not None:
            path = cache_mod.cache_path(self.cache_dir, curve.conductor, curve.label, sign)
            if path.exists():
                sym = cache_mod.load(path)
                if (sym.label, sym.level, sym.sign) != key:
                    sym = None
        if sym is None:
            sym = eigensymbol(build_space(curve.conductor, sign), curve, sign, self.prime_bound)
            if path is not None:
                cache_mod.save(sym, path)
        self._memo[key] = sym
        return sym

    def normalized_pair(self, curve: EllipticCurve, p: int) -> tuple[Eigensymbol, Eigensymbol]:
        return (normalize_at_p(self.eigensymbol(curve, 1), p),
                normalize_at_p(self.eigensymbol(curve, -1), p))

    def theta(self, curve: EllipticCurve, p: int, n_values, i: int = 0,
              precision: int = DEFAULT_PRECISION, alpha=None) -> list[ThetaResult]:
        """mu and lambda of theta_{n,i} for each n.

        With ``alpha`` the p-stabilised variant is used; a residue alpha must
        be known modulo p^precision.
        """
        n_values = list(n_values)
        self.check_cost(p, n_values, stabilized=alpha not in (None, 1, -1))
        plus, minus = self.normalized_pair(curve, p)
        out = []
        for n in n_values:
            if alpha is None:
                raw = raw_theta(plus, minus, p, n, self.threads)
            else:
                raw = raw_theta_stabilized(plus, minus, p, n, alpha, precision, self.threads)
            elem, _, inv = isotypic_invariants(raw, i, precision)
            cz = None
            if n >= 1 and alpha is None:
                cz = not any(corestrict(elem).coeffs)
            out.append(ThetaResult(n, i, inv.mu, inv.lam, inv.valid, inv.precision, cz))
        return out
