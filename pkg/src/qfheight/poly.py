"""Sparse multivariate polynomials over Z or Z/p^K.

A polynomial is a set of (exponent vector, coefficient) pairs held in two
numpy arrays.  Residue-mode coefficients are canonical representatives in
``[0, p^K)`` and zero coefficients are dropped after every operation, which
is what keeps large Frobenius-type powers like ``f^(2^10)`` small: by
Kummer's theorem only multinomials of small p-adic valuation survive.

Terms are stored in no particular order; the graded-lex order is applied
only when a polynomial is listed or printed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

VAR_NAMES = "xyzw"
MAX_EXPONENT = 2**32 - 1
DEFAULT_TERM_CAP = 50_000_000
# pairs materialised per chunk in a product
_CHUNK_PAIRS = 2_000_000
_INT64_SAFE = 2**62


class DomainMismatchError(ValueError):
    pass


class ExponentOverflowError(OverflowError):
    pass


class ResourceLimitError(RuntimeError):
    """A computation would exceed the configured term-count cap."""


def term_cap() -> int:
    return int(os.environ.get("QFHEIGHT_TERM_CAP", DEFAULT_TERM_CAP))


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PrimeContext:
    """Prime ``p``, precision ``K`` (coefficients mod p^K) and variable count."""

    p: int
    K: int = 1
    nvars: int = 3

    def __post_init__(self) -> None:
        if not _is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if not 1 <= self.K <= 40:
            raise ValueError(f"precision K={self.K} outside 1..40")
        if not 1 <= self.nvars <= len(VAR_NAMES):
            raise ValueError(f"nvars={self.nvars} outside 1..{len(VAR_NAMES)}")

    @property
    def modulus(self) -> int:
        return self.p**self.K

    def with_precision(self, K: int) -> "PrimeContext":
        return PrimeContext(self.p, K, self.nvars)


def _coeff_dtype(modulus: int | None):
    if modulus is not None and modulus * modulus < _INT64_SAFE:
        return np.int64
    return object


def _pack_plan(maxima: np.ndarray) -> tuple[int, ...] | None:
    """Bit widths per variable for packing exponents into one int64 key."""
    widths = tuple(max(1, int(m).bit_length()) for m in maxima)
    if sum(widths) > 62:
        return None
    return widths


def _pack(exps: np.ndarray, widths: tuple[int, ...]) -> np.ndarray:
    key = np.zeros(exps.shape[0], dtype=np.int64)
    for j, w in enumerate(widths):
        key = (key << w) | exps[:, j]
    return key


def _unpack(key: np.ndarray, widths: tuple[int, ...]) -> np.ndarray:
    out = np.empty((key.shape[0], len(widths)), dtype=np.int64)
    for j in range(len(widths) - 1, -1, -1):
        w = widths[j]
        out[:, j] = key & ((1 << w) - 1)
        key = key >> w
    return out


def _reduce_coeffs(coeffs: np.ndarray, modulus: int | None) -> np.ndarray:
    if modulus is not None:
        coeffs = coeffs % modulus
    return coeffs


def _combine_keys(keys: np.ndarray, coeffs: np.ndarray, modulus: int | None):
    """Sum coefficients of equal keys, reduce, drop zeros."""
    if keys.shape[0] == 0:
        return keys, coeffs
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    coeffs = coeffs[order]
    starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
    keys = keys[starts]
    coeffs = _reduce_coeffs(np.add.reduceat(coeffs, starts), modulus)
    keep = coeffs != 0
    return keys[keep], coeffs[keep]


def _combine(exps: np.ndarray, coeffs: np.ndarray, modulus: int | None):
    if exps.shape[0] == 0:
        return exps, coeffs
    widths = _pack_plan(exps.max(axis=0))
    if widths is not None:
        keys, coeffs = _combine_keys(_pack(exps, widths), coeffs, modulus)
        return _unpack(keys, widths), coeffs
    uniq, inverse = np.unique(exps, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    starts = np.flatnonzero(
        np.concatenate(([True], inverse[order][1:] != inverse[order][:-1]))
    )
    summed = _reduce_coeffs(np.add.reduceat(coeffs[order], starts), modulus)
    keep = summed != 0
    return uniq[keep], summed[keep]


class Polynomial:
    """Immutable sparse polynomial.

    ``ctx`` is ``None`` for the exact-integer domain, otherwise the
    :class:`PrimeContext` whose modulus ``p^K`` the coefficients live in.
    """

    __slots__ = ("exps", "coeffs", "ctx", "nvars")

    def __init__(self, exps, coeffs, ctx: PrimeContext | None = None,
                 nvars: int | None = None, *, _canonical: bool = False):
        if nvars is None:
            nvars = ctx.nvars if ctx is not None else 3
        if ctx is not None and ctx.nvars != nvars:
            raise DomainMismatchError("context and variable count disagree")
        modulus = ctx.modulus if ctx is not None else None
        exps = np.asarray(exps, dtype=np.int64).reshape(-1, nvars)
        dtype = _coeff_dtype(modulus)
        if isinstance(coeffs, np.ndarray) and coeffs.dtype == dtype:
            pass
        elif dtype is object:
            coeffs = np.array([int(c) for c in coeffs] + [None], dtype=object)[:-1]
        else:
            coeffs = np.array([int(c) % modulus for c in coeffs], dtype=np.int64)
        if exps.shape[0] != coeffs.shape[0]:
            raise ValueError("exponent and coefficient counts differ")
        if exps.size and (exps.min() < 0 or exps.max() > MAX_EXPONENT):
            raise ExponentOverflowError("exponent outside [0, 2^32)")
        if not _canonical:
            exps, coeffs = _combine(exps, _reduce_coeffs(coeffs, modulus), modulus)
        self.exps = exps
        self.coeffs = coeffs
        self.ctx = ctx
        self.nvars = nvars
        self.exps.setflags(write=False)
        self.coeffs.setflags(write=False)

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, ctx: PrimeContext | None = None, nvars: int | None = None) -> "Polynomial":
        n = nvars or (ctx.nvars if ctx else 3)
        return cls(np.zeros((0, n), np.int64), [], ctx, n, _canonical=True)

    @classmethod
    def constant(cls, c: int, ctx: PrimeContext | None = None,
                 nvars: int | None = None) -> "Polynomial":
        n = nvars or (ctx.nvars if ctx else 3)
        return cls(np.zeros((1, n), np.int64), [c], ctx, n)

    @classmethod
    def monomial(cls, exps: Iterable[int], c: int = 1,
                 ctx: PrimeContext | None = None) -> "Polynomial":
        exps = tuple(exps)
        return cls([exps], [c], ctx, len(exps))

    @classmethod
    def from_dict(cls, terms: Mapping[tuple[int, ...], int],
                  ctx: PrimeContext | None = None, nvars: int | None = None) -> "Polynomial":
        if nvars is None:
            nvars = ctx.nvars if ctx else (len(next(iter(terms))) if terms else 3)
        return cls(list(terms.keys()) or np.zeros((0, nvars)), list(terms.values()), ctx, nvars)

    def _new(self, exps, coeffs, canonical=False, ctx="same") -> "Polynomial":
        ctx = self.ctx if ctx == "same" else ctx
        return Polynomial(exps, coeffs, ctx, self.nvars, _canonical=canonical)

    # inspection ---------------------------------------------------------
    @property
    def modulus(self) -> int | None:
        return self.ctx.modulus if self.ctx is not None else None

    def __len__(self) -> int:
        return int(self.exps.shape[0])

    def is_zero(self) -> bool:
        return self.exps.shape[0] == 0

    def to_dict(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(v) for v in e): int(c) for e, c in zip(self.exps, self.coeffs)}

    def terms(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms in decreasing graded-lex order."""
        return sorted(self.to_dict().items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], int]]:
        return iter(self.terms())

    def coefficient(self, exps: Iterable[int]) -> int:
        return self.to_dict().get(tuple(exps), 0)

    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self) else -1

    def has_constant_term(self) -> bool:
        return bool((self.exps.sum(axis=1) == 0).any())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self.ctx == other.ctx and self.nvars == other.nvars
                and self.to_dict() == other.to_dict())

    def __hash__(self) -> int:
        return hash((self.ctx, self.nvars, frozenset(self.to_dict().items())))

    def __repr__(self) -> str:
        dom = "ZZ" if self.ctx is None else f"Z/{self.ctx.p}^{self.ctx.K}"
        return f"Polynomial({str(self)!r}, {dom})"

    def __str__(self) -> str:
        return serialize(self)

    # domain changes -----------------------------------------------------
    def reduce(self, ctx: PrimeContext) -> "Polynomial":
        """Image in Z/p^K (from exact, or from a higher precision of the same p)."""
        if ctx.nvars != self.nvars:
            raise DomainMismatchError("variable counts differ")
        if self.ctx is not None and (self.ctx.p != ctx.p or self.ctx.K < ctx.K):
            raise DomainMismatchError(f"cannot map {self.ctx} to {ctx}")
        return Polynomial(self.exps, [int(c) for c in self.coeffs], ctx, self.nvars)

    def lift(self) -> "Polynomial":
        """Exact-integer polynomial with the canonical representatives as coefficients."""
        return Polynomial(self.exps, [int(c) for c in self.coeffs], None, self.nvars,
                          _canonical=True)

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.ctx != other.ctx or self.nvars != other.nvars:
            raise DomainMismatchError(f"{self.ctx} vs {other.ctx}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, int):
            return Polynomial.constant(other, self.ctx, self.nvars)
        self._check(other)
        return other

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        return self._new(np.concatenate([self.exps, other.exps]),
                         np.concatenate([self.coeffs, other.coeffs]))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return self._new(self.exps, -self.coeffs)

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def scale(self, c: int) -> "Polynomial":
        if self.modulus is not None:
            c %= self.modulus
        return self._new(self.exps, self.coeffs * c)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        return multiply(self, other)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        return pow_poly(self, exponent)

    def shift(self, exps: Iterable[int]) -> "Polynomial":
        """Multiply by the monomial with the given exponent vector."""
        e = np.asarray(tuple(exps), dtype=np.int64)
        out = self.exps + e
        if out.size and out.max() > MAX_EXPONENT:
            raise ExponentOverflowError("exponent outside [0, 2^32)")
        return self._new(out, self.coeffs, canonical=True)

    def filter_terms(self, mask: np.ndarray) -> "Polynomial":
        return self._new(self.exps[mask], self.coeffs[mask], canonical=True)


def multiply(a: Polynomial, b: Polynomial) -> Polynomial:
    a._check(b)
    if a.is_zero() or b.is_zero():
        return Polynomial.zero(a.ctx, a.nvars)
    if len(a) < len(b):
        a, b = b, a
    modulus = a.modulus
    maxima = a.exps.max(axis=0) + b.exps.max(axis=0)
    if maxima.max() > MAX_EXPONENT:
        raise ExponentOverflowError("product exponent outside [0, 2^32)")
    widths = _pack_plan(maxima)
    if widths is None:
        return _multiply_tuples(a, b)
    ka, kb = _pack(a.exps, widths), _pack(b.exps, widths)
    ca, cb = a.coeffs, b.coeffs
    step = max(1, _CHUNK_PAIRS // len(b))
    acc_k, acc_c = [], []
    pending = 0
    cap = term_cap()
    for lo in range(0, len(a), step):
        keys = (ka[lo:lo + step, None] + kb[None, :]).ravel()
        coeffs = _reduce_coeffs((ca[lo:lo + step, None] * cb[None, :]).ravel(), modulus)
        keys, coeffs = _combine_keys(keys, coeffs, modulus)
        acc_k.append(keys)
        acc_c.append(coeffs)
        pending += len(keys)
        if pending > 4 * _CHUNK_PAIRS and len(acc_k) > 1:
            k, c = _combine_keys(np.concatenate(acc_k), np.concatenate(acc_c), modulus)
            if len(k) > cap:
                raise ResourceLimitError(f"product exceeds term cap {cap}")
            acc_k, acc_c, pending = [k], [c], len(k)
    keys, coeffs = _combine_keys(np.concatenate(acc_k), np.concatenate(acc_c), modulus)
    if len(keys) > cap:
        raise ResourceLimitError(f"product has {len(keys)} terms, cap {cap}")
    return Polynomial(_unpack(keys, widths), coeffs, a.ctx, a.nvars, _canonical=True)


def _multiply_tuples(a: Polynomial, b: Polynomial) -> Polynomial:
    modulus = a.modulus
    out: dict[tuple[int, ...], int] = {}
    bt = list(b.to_dict().items())
    for ea, ca in a.to_dict().items():
        for eb, cb in bt:
            key = tuple(i + j for i, j in zip(ea, eb))
            out[key] = out.get(key, 0) + ca * cb
    if modulus is not None:
        out = {k: v % modulus for k, v in out.items()}
    return Polynomial.from_dict({k: v for k, v in out.items() if v}, a.ctx, a.nvars)


def _small_pow(base: Polynomial, exponent: int) -> Polynomial:
    result = Polynomial.constant(1, base.ctx, base.nvars)
    sq = base
    while exponent:
        if exponent & 1:
            result = multiply(result, sq)
        exponent >>= 1
        if exponent:
            sq = multiply(sq, sq)
    return result


def pow_poly(base: Polynomial, exponent: int) -> Polynomial:
    """``base ** exponent`` with reduction after every product.

    In residue mode the exponent is processed in base ``p``: the powers
    ``base^(p^i)`` are produced by repeated p-th powering, so every
    intermediate value stays Kummer-sparse.
    """
    if exponent < 0:
        raise ValueError("negative exponent")
    if exponent >= 2**32:
        raise ExponentOverflowError("exponent must be < 2^32")
    if base.ctx is None or base.ctx.p == 2:
        return _small_pow(base, exponent)
    p = base.ctx.p
    result = Polynomial.constant(1, base.ctx, base.nvars)
    power = base
    while exponent:
        exponent, digit = divmod(exponent, p)
        if digit:
            result = multiply(result, _small_pow(power, digit))
        if exponent:
            power = _small_pow(power, p)
    return result


def reduce_mod_frobenius_power(P: Polynomial, q: int) -> Polynomial:
    """Drop every term lying in m^[q] = (x_1^q, ..., x_N^q)."""
    if q < 1:
        raise ValueError("q must be positive")
    if P.is_zero():
        return P
    return P.filter_terms((P.exps < q).all(axis=1))


def in_frobenius_power(P: Polynomial, q: int, p_power: int | None = None) -> bool:
    """True iff every term of P whose coefficient is nonzero mod ``p_power`` lies in m^[q]."""
    if P.is_zero():
        return True
    outside = (P.exps < q).all(axis=1)
    if p_power is not None:
        if P.ctx is not None and P.modulus % p_power:
            raise ValueError("p_power must divide the working modulus")
        nonzero = np.array([int(c) % p_power != 0 for c in P.coeffs], dtype=bool)
        outside &= nonzero
    return not outside.any()


# serialization ----------------------------------------------------------------

def _monomial_str(exps: tuple[int, ...]) -> str:
    parts = []
    for name, e in zip(VAR_NAMES, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def serialize(P: Polynomial) -> str:
    """Graded-lex ordered text that :func:`parse_polynomial` reads back."""
    if P.is_zero():
        return "0"
    out = []
    for exps, c in P.terms():
        mono = _monomial_str(exps)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        out.append((sign, body))
    text = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


class PolynomialSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class _Parser:
    def __init__(self, text: str, ctx: PrimeContext | None, nvars: int):
        self.text = text
        self.pos = 0
        self.ctx = ctx
        self.nvars = nvars

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, message: str):
        raise PolynomialSyntaxError(message, self.pos)

    def nat(self) -> int:
        self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.fail("expected a natural number")
        return int(self.text[start:self.pos])

    def expr(self) -> Polynomial:
        sign = 1
        if self.peek() in "+-":
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        acc = self.term().scale(sign) if sign < 0 else self.term()
        while self.peek() in ("+", "-") and self.peek():
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> Polynomial:
        acc = self.factor()
        while self.peek() == "*":
            self.pos += 1
            acc = acc * self.factor()
        return acc

    def factor(self) -> Polynomial:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            where = self.pos
            e = self.nat()
            if e > MAX_EXPONENT:
                raise ExponentOverflowError(f"exponent {e} too large at position {where}")
            return pow_poly(base, e)
        return base

    def atom(self) -> Polynomial:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.fail("expected ')'")
            self.pos += 1
            return inner
        if ch.isdigit():
            return Polynomial.constant(self.nat(), self.ctx, self.nvars)
        if ch.isalpha():
            idx = VAR_NAMES.find(ch)
            if idx < 0 or idx >= self.nvars:
                self.fail(f"unknown variable {ch!r}")
            self.pos += 1
            exps = [0] * self.nvars
            exps[idx] = 1
            return Polynomial([exps], [1], self.ctx, self.nvars)
        self.fail("unexpected end of input" if not ch else f"unexpected {ch!r}")


def parse_polynomial(text: str, ctx: PrimeContext | None = None,
                     nvars: int | None = None) -> Polynomial:
    """Parse ``text`` (variables x, y, z; integers; + - * ^; parentheses).

    With ``ctx`` the coefficients are reduced modulo ``p^K``; without it the
    result lives in the exact-integer domain.
    """
    if nvars is None:
        nvars = ctx.nvars if ctx is not None else 3
    parser = _Parser(text, ctx, nvars)
    result = parser.expr()
    if parser.peek():
        parser.fail(f"unexpected {parser.peek()!r}")
    return result
