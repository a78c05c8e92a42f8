"""Frobenius lift, the dual-basis operator u, Witt components and Kummer valuations."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .poly import ExponentOverflowError, MAX_EXPONENT, Polynomial, pow_poly


def _prime_of(P: Polynomial, p: int | None) -> int:
    if p is not None:
        if P.ctx is not None and P.ctx.p != p:
            raise ValueError(f"p={p} disagrees with the polynomial's context")
        return p
    if P.ctx is None:
        raise ValueError("p is required for exact-integer polynomials")
    return P.ctx.p


def phi(P: Polynomial, m: int = 1, p: int | None = None) -> Polynomial:
    """Apply the Frobenius lift x_i -> x_i^p ``m`` times; coefficients are fixed."""
    p = _prime_of(P, p)
    if m == 0 or P.is_zero():
        return P
    exps = P.exps * (p**m)
    if exps.max() > MAX_EXPONENT:
        raise ExponentOverflowError("phi pushes an exponent past 2^32")
    return Polynomial(exps, P.coeffs, P.ctx, P.nvars, _canonical=True)


def _u_step(P: Polynomial, p: int) -> Polynomial:
    if P.is_zero():
        return P
    keep = ((P.exps % p) == p - 1).all(axis=1)
    exps = (P.exps[keep] - (p - 1)) // p
    return Polynomial(exps, P.coeffs[keep], P.ctx, P.nvars, _canonical=True)


def cartier_u(P: Polynomial, m: int = 1, p: int | None = None) -> Polynomial:
    """Apply u ``m`` times.

    One step sends c*x^i*y^j*z^k to c*x^((i-p+1)/p)*... when every exponent
    is congruent to p-1 mod p, and to 0 otherwise.
    """
    p = _prime_of(P, p)
    if m < 0:
        raise ValueError("m must be non-negative")
    for _ in range(m):
        if P.is_zero():
            break
        P = _u_step(P, p)
    return P


@dataclass(frozen=True)
class DeltaResult:
    value: Polynomial
    level: int


class InexactDivisionError(ArithmeticError):
    """A Witt-component division by p^m left a remainder (internal inconsistency)."""


def _exact_div(P: Polynomial, d: int) -> Polynomial:
    quotients = []
    for c in P.coeffs:
        q, r = divmod(int(c), d)
        if r:
            raise InexactDivisionError(f"coefficient {c} not divisible by {d}")
        quotients.append(q)
    return Polynomial(P.exps, quotients, None, P.nvars, _canonical=True)


def delta(P: Polynomial, level: int, p: int) -> DeltaResult:
    """Witt component Delta_level of an exact-integer polynomial.

    Delta_0 = id and
    Delta_m(a) = (a^(p^m) - sum_{l<m} p^l * phi^(m-l)(Delta_l(a))) / p^m.
    """
    if P.ctx is not None:
        raise ValueError("delta works over the exact integers; lift first")
    if level < 0:
        raise ValueError("level must be non-negative")
    return DeltaResult(_delta_cached(P, level, p), level)


@lru_cache(maxsize=256)
def _delta_cached(P: Polynomial, level: int, p: int) -> Polynomial:
    if level == 0:
        return P
    acc = pow_poly(P, p**level)
    for l in range(level):
        acc = acc - phi(_delta_cached(P, l, p), level - l, p).scale(p**l)
    return _exact_div(acc, p**level)


def delta1(P: Polynomial, p: int) -> Polynomial:
    """(P^p - phi(P)) / p."""
    return delta(P, 1, p).value


@dataclass(frozen=True)
class ValuationReport:
    total: int
    parts: tuple[int, ...]
    valuation: int
    carry_count: int
    legendre: int


def _legendre(n: int, p: int) -> int:
    v, q = 0, p
    while q <= n:
        v += n // q
        q *= p
    return v


def _carries(parts: Sequence[int], p: int) -> int:
    """Carries when adding ``parts`` in base p; each carry of value c counts c times."""
    carries, carry = 0, 0
    parts = list(parts)
    while any(parts) or carry:
        s = sum(x % p for x in parts) + carry
        carry = s // p
        carries += carry
        parts = [x // p for x in parts]
    return carries


def vp_multinomial(total: int, parts: Sequence[int], p: int) -> ValuationReport:
    """v_p(total! / prod(parts!)) by carry counting and by Legendre's formula."""
    parts = tuple(int(x) for x in parts)
    if any(x < 0 for x in parts) or sum(parts) != total:
        raise ValueError(f"parts {parts} do not sum to {total}")
    legendre = _legendre(total, p) - sum(_legendre(x, p) for x in parts)
    carries = _carries(parts, p)
    if legendre != carries:
        raise AssertionError(f"Kummer/Legendre disagreement: {carries} != {legendre}")
    return ValuationReport(total, parts, legendre, carries, legendre)


def digit_sum(n: int, p: int) -> int:
    s = 0
    while n:
        n, d = divmod(n, p)
        s += d
    return s


def coefficient_valuations(P: Polynomial, p: int) -> np.ndarray:
    """p-adic valuation of every coefficient of P (exact or residue mode)."""
    out = []
    for c in P.coeffs:
        c = int(c)
        v = 0
        while c and c % p == 0:
            c //= p
            v += 1
        out.append(v)
    return np.array(out, dtype=np.int64)
