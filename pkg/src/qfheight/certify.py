"""Split/regular witness verification and non-splitting certificates.

Upper bounds: a witness ``g = a * f^E`` with ``E`` equal to ``p^(e+n-1)`` or
``p^(e+n-1) - 1`` lies in ``(f^(p^(e+n-1)-1))``, so only conditions D1 and
D3 need checking; acceptance proves ``sht^e(R/f) <= n`` (and, with a
regularity scalar ``c``, ``sht^reg(R/f) <= n``).

Lower bounds: the ideals ``I^e_n`` are over-approximated by the product
form ``u^k(Delta^sigma_k * f^(p-1) * J)`` where ``Delta = Delta_1(f^(p-1))``
and ``sigma_k = 1 + p + ... + p^(k-1)``.  If every piece lands in
``m^[p]`` the ring is not n-quasi-F^e-split.  A rejected certificate is
inconclusive, never evidence of splitting.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .frobenius import cartier_u, delta1
from .poly import (Polynomial, PrimeContext, in_frobenius_power, multiply, pow_poly,
                   reduce_mod_frobenius_power)

FPowerForm = Literal["p^(e+n-1)", "p^(e+n-1)-1"]
TABLE_FORM: FPowerForm = "p^(e+n-1)"
COROLLARY_FORM: FPowerForm = "p^(e+n-1)-1"


class PrecisionError(ValueError):
    pass


class SoundnessError(AssertionError):
    """Two certificates contradict each other; some computation is wrong."""


@dataclass(frozen=True)
class ConditionResult:
    label: str
    passed: bool
    offender: str | None = None

    def to_json(self) -> dict:
        out = {"label": self.label, "pass": self.passed}
        if self.offender is not None:
            out["offender"] = self.offender
        return out


@dataclass(frozen=True)
class CertificateOutcome:
    kind: str  # splitUpper | regularUpper | nonSplitLower | fPure
    conditions: tuple[ConditionResult, ...]
    p: int
    e: int
    n: int

    @property
    def accepted(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def verdict(self) -> str:
        if self.accepted:
            return "accepted"
        return "inconclusive" if self.kind == "nonSplitLower" else "rejected"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "conditions": [c.to_json() for c in self.conditions],
            "params": {"p": self.p, "e": self.e, "n": self.n},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False)


@dataclass(frozen=True)
class WitnessSpec:
    """Candidate certificate ``g = a * f^E`` (times ``c^(p^n-1)`` when regular)."""

    f: Polynomial
    p: int
    e: int
    n: int
    a: Polynomial
    form: FPowerForm = COROLLARY_FORM
    c: Polynomial | None = None
    tau4: Polynomial | None = None
    note: str = ""

    def __post_init__(self) -> None:
        if self.e < 1 or self.n < 1:
            raise ValueError("e and n must be positive")
        if self.form not in (TABLE_FORM, COROLLARY_FORM):
            raise ValueError(f"unknown f-power form {self.form!r}")

    @property
    def f_exponent(self) -> int:
        q = self.p ** (self.e + self.n - 1)
        return q if self.form == TABLE_FORM else q - 1

    @property
    def ctx(self) -> PrimeContext:
        return PrimeContext(self.p, self.n, self.f.nvars)

    def describe(self) -> dict:
        out = {"p": self.p, "e": self.e, "n": self.n, "f": str(self.f), "a": str(self.a),
               "form": self.form}
        if self.c is not None:
            out["c"] = str(self.c)
        return out


def _as_exact(P: Polynomial) -> Polynomial:
    return P if P.ctx is None else P.lift()


def _in_ctx(P: Polynomial, ctx: PrimeContext) -> Polynomial:
    return _as_exact(P).reduce(ctx)


def _term_str(exps, coeff) -> str:
    return f"{int(coeff)}*" + str(Polynomial.monomial(tuple(int(v) for v in exps)))


@lru_cache(maxsize=512)
def _cached_power(f: Polynomial, exponent: int) -> Polynomial:
    return pow_poly(f, exponent)


def f_power(f: Polynomial, exponent: int, ctx: PrimeContext) -> Polynomial:
    """``f^exponent`` in ``ctx``, memoised (witness checks reuse the same powers)."""
    return _cached_power(_in_ctx(f, ctx), exponent)


def u_of_f_multiple(M: Polynomial, f: Polynomial, m: int, k: int, ctx: PrimeContext,
                    evaluator: str = "interleaved") -> Polynomial:
    """u^k(M * f^(p^m - 1)) in ``ctx``.

    ``interleaved`` never forms the (dense) power.  With s = K-1,
    f^(p^i) = phi^(i-s)(f^(p^s)) mod p^K for i >= s, so
    f^(p^m-1) = f^(p^s-1) * C * phi(C) * ... * phi^(m-s-1)(C) with
    C = (f^(p^s))^(p-1), and each u-step peels one phi-layer through
    u(phi(b) * c) = b * u(c).  Requires k >= m - s - 1 so that no unexpanded
    layer is left over.
    """
    p, s = ctx.p, ctx.K - 1
    M = _in_ctx(M, ctx)
    if evaluator == "expand" or m <= s:
        return cartier_u(multiply(M, f_power(f, p**m - 1, ctx)), k)
    if evaluator != "interleaved":
        raise ValueError(f"unknown evaluator {evaluator!r}")
    layers = m - s
    if k < layers - 1:
        raise ValueError(f"u^{k} leaves phi-layers unexpanded (need k >= {layers - 1})")
    C = f_power(f, (p - 1) * p**s, ctx)
    T = multiply(multiply(M, f_power(f, p**s - 1, ctx)), C)
    for i in range(1, k + 1):
        T = cartier_u(T, 1)
        if i <= layers - 1:
            T = multiply(T, C)
    return T


def _check_precision(g: Polynomial, n: int) -> int:
    if g.ctx is None:
        raise PrecisionError("g must be in residue mode")
    if g.ctx.K < n:
        raise PrecisionError(f"precision K={g.ctx.K} < n={n}")
    return g.ctx.p


def is_f_pure(f: Polynomial, p: int | None = None) -> bool:
    """Fedder: f^(p-1) not in m^[p], computed mod p."""
    if p is None:
        if f.ctx is None:
            raise ValueError("p is required for exact-integer f")
        p = f.ctx.p
    if f.is_zero() or f.has_constant_term():
        raise ValueError("f must be nonzero without constant term")
    ctx = PrimeContext(p, 1, f.nvars)
    return not in_frobenius_power(f_power(f, p - 1, ctx), p)


def _d1_result(image: Polynomial, r: int, p: int) -> ConditionResult:
    mod = p**r
    for exps, c in zip(image.exps, image.coeffs):
        if int(c) % mod:
            return ConditionResult(f"D1(r={r})", False, _term_str(exps, c))
    return ConditionResult(f"D1(r={r})", True)


def _d3_result(image: Polynomial, p: int, n: int) -> ConditionResult:
    mod = p**n
    for exps, c in zip(image.exps, image.coeffs):
        if (exps <= p - 1).all() and int(c) % mod:
            return ConditionResult("D3", True)
    return ConditionResult("D3", False, "no term outside (m^[p], p^n)")


def check_d1(g: Polynomial, e: int, n: int, *, strategy: str = "direct",
             factor: tuple[Polynomial, Polynomial] | None = None) -> list[ConditionResult]:
    """D1: u^(e+r-1)(g) has all coefficients divisible by p^r, r = 1..n-1.

    ``strategy="reduced"`` needs ``factor=(f, a)`` with ``g = a * f^(p^(e+n-1)-1)``
    and tests u^(e+r-1)(a * f^(p^(e+r-1)-1)) for each r instead; the two
    are equivalent.
    """
    p = _check_precision(g, n)
    results = []
    for r in range(1, n):
        if strategy == "direct":
            image = cartier_u(g, e + r - 1)
        elif strategy == "reduced":
            if factor is None:
                raise ValueError("the reduced strategy needs factor=(f, a)")
            f, a = factor
            image = u_of_f_multiple(a, f, e + r - 1, e + r - 1, PrimeContext(p, r, g.nvars))
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        results.append(_d1_result(image, r, p))
    return results


def check_d3(g: Polynomial, e: int, n: int) -> ConditionResult:
    """D3: u^(e+n-2)(g) is not in (m^[p], p^n)."""
    p = _check_precision(g, n)
    # terms in m^[p^(e+n-1)] cannot reach a term outside m^[p]
    image = cartier_u(reduce_mod_frobenius_power(g, p ** (e + n - 1)), e + n - 2)
    return _d3_result(image, p, n)


def _regular_scalar(w: WitnessSpec) -> Polynomial:
    if w.c is None:
        raise ValueError("regular witness needs c")
    c = _as_exact(w.c)
    if c.is_zero():
        raise ValueError("regularity scalar c must be nonzero")
    if len(c) != 1:
        raise ValueError("regularity scalar c must be a monomial")
    if w.tau4 is not None and pow_poly(_as_exact(w.tau4), 4) != c:
        raise ValueError(f"c = {c} is not the fourth power of {w.tau4}")
    return c


def witness_multiplier(w: WitnessSpec, regular: bool) -> Polynomial:
    """Exact M with g (or g*c^(p^n-1)) = M * f^(p^(e+n-1)-1)."""
    M = _as_exact(w.a)
    if regular:
        M = multiply(M, pow_poly(_regular_scalar(w), w.p**w.n - 1))
    if w.form == TABLE_FORM:
        M = multiply(M, _as_exact(w.f))
    return M


def materialize(w: WitnessSpec, regular: bool = False) -> Polynomial:
    """The element D1/D3 are checked on, expanded in Z/p^n."""
    ctx = w.ctx
    return multiply(_in_ctx(witness_multiplier(w, regular), ctx),
                    f_power(w.f, w.p ** (w.e + w.n - 1) - 1, ctx))


def witness_conditions(M: Polynomial, f: Polynomial, p: int, e: int, n: int, *,
                       strategy: str = "direct",
                       evaluator: str = "interleaved") -> list[ConditionResult]:
    """D1 and D3 for g = M * f^(p^(e+n-1)-1), without expanding g unless asked."""
    ctx = PrimeContext(p, n, f.nvars)
    m = e + n - 1
    conds = []
    for r in range(1, n):
        if strategy == "direct":
            image = u_of_f_multiple(M, f, m, e + r - 1, ctx, evaluator)
        elif strategy == "reduced":
            image = u_of_f_multiple(M, f, e + r - 1, e + r - 1,
                                    PrimeContext(p, r, f.nvars), evaluator)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        conds.append(_d1_result(image, r, p))
    conds.append(_d3_result(u_of_f_multiple(M, f, m, e + n - 2, ctx, evaluator), p, n))
    return conds


def _verify(w: WitnessSpec, regular: bool, strategy: str, evaluator: str) -> CertificateOutcome:
    conds = witness_conditions(witness_multiplier(w, regular), w.f, w.p, w.e, w.n,
                               strategy=strategy, evaluator=evaluator)
    return CertificateOutcome("regularUpper" if regular else "splitUpper",
                              tuple(conds), w.p, w.e, w.n)


def verify_split_witness(w: WitnessSpec, strategy: str = "direct",
                         evaluator: str = "interleaved") -> CertificateOutcome:
    """Acceptance proves sht^e(R/f) <= n."""
    if w.c is not None:
        raise ValueError("split witnesses carry no regularity scalar; use verify_regular_witness")
    return _verify(w, False, strategy, evaluator)


def verify_regular_witness(w: WitnessSpec, strategy: str = "direct",
                           evaluator: str = "interleaved") -> CertificateOutcome:
    """D1 and D3 on g * c^(p^n-1); acceptance proves sht^reg(R/f) <= n
    provided c lies in the test-ideal locus, which is supplied as data."""
    _regular_scalar(w)
    return _verify(w, True, strategy, evaluator)


# J_e and non-splitting ----------------------------------------------------------

def _normalize_mod_p(P: Polynomial) -> Polynomial:
    """Scale so the graded-lex leading coefficient is 1 (P over Z/p)."""
    p = P.ctx.p
    lead = P.terms()[0][1]
    return P.scale(pow(lead, -1, p))


def _divides(a, b) -> bool:
    return all(i <= j for i, j in zip(a, b))


def j_generators(f: Polynomial, e: int, p: int) -> list[Polynomial]:
    """Generators u^(e-1)(f^(p^(e-1)-1) * mu) of J_e over Z/p, mu ranging over
    monomials with exponents below p^(e-1); zeros and redundancies removed."""
    ctx = PrimeContext(p, 1, f.nvars)
    if e == 1:
        return [Polynomial.constant(1, ctx)]
    q = p ** (e - 1)
    F = f_power(f, q - 1, ctx)
    # each term of F is picked up by exactly one mu: the one completing its
    # exponents to q-1 mod q
    mu = (q - 1 - F.exps) % q
    image = (F.exps + mu - (q - 1)) // q
    groups: dict[tuple[int, ...], list[int]] = {}
    for i, key in enumerate(map(tuple, mu.tolist())):
        groups.setdefault(key, []).append(i)
    gens = []
    for key in sorted(groups):
        idx = groups[key]
        g = Polynomial(image[idx], F.coeffs[idx], ctx, f.nvars)
        if not g.is_zero():
            gens.append(_normalize_mod_p(g))
    return _prune_generators(gens)


def _prune_generators(gens: list[Polynomial]) -> list[Polynomial]:
    unique = list(dict.fromkeys(gens))
    monos = [next(iter(g.to_dict())) for g in unique if len(g) == 1]
    out = []
    for g in unique:
        terms = list(g.to_dict())
        if len(g) == 1:
            m = terms[0]
            if any(_divides(o, m) and o != m for o in monos):
                continue
        elif all(any(_divides(o, t) for o in monos) for t in terms):
            continue
        out.append(g)
    return sorted(out, key=lambda g: (g.degree(), g.terms()))


def monomial_ideal_equal(gens: list[Polynomial], monomials: list[tuple[int, ...]],
                         box: int) -> bool:
    """Does ``gens`` generate the monomial ideal ``(monomials)`` in Z/p[x]/m^[box]?

    Containment is termwise; the reverse inclusion is Nakayama's lemma in the
    local ring: the generators must span M / mM, whose basis is the minimal
    monomial generators of M.
    """
    minimal = [m for m in set(monomials)
               if not any(_divides(o, m) and o != m for o in monomials)]
    if any(max(m) >= box for m in minimal):
        raise ValueError("box too small for the monomial generators")
    if not gens:
        return not minimal
    p = gens[0].ctx.p
    rows = []
    for g in gens:
        g = reduce_mod_frobenius_power(g, box)
        d = g.to_dict()
        if not all(any(_divides(m, t) for m in minimal) for t in d):
            return False
        rows.append([d.get(m, 0) % p for m in minimal])
    return _rank_mod_p(rows, p) == len(minimal)


def _rank_mod_p(rows: list[list[int]], p: int) -> int:
    rows = [list(r) for r in rows]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] % p), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(v * inv) % p for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] % p:
                factor = rows[i][col]
                rows[i] = [(v - factor * w) % p for v, w in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _truncated_mul(a: Polynomial, b: Polynomial, q: int) -> Polynomial:
    return reduce_mod_frobenius_power(
        multiply(reduce_mod_frobenius_power(a, q), reduce_mod_frobenius_power(b, q)), q)


def _truncated_pow(P: Polynomial, exponent: int, q: int) -> Polynomial:
    result = Polynomial.constant(1, P.ctx, P.nvars)
    base = reduce_mod_frobenius_power(P, q)
    while exponent:
        if exponent & 1:
            result = _truncated_mul(result, base, q)
        exponent >>= 1
        if exponent:
            base = _truncated_mul(base, base, q)
    return result


def theta_seed(f: Polynomial, p: int) -> tuple[Polynomial, Polynomial]:
    """(f^(p-1), Delta_1(f^(p-1))) over Z/p, Delta taken on the integer lift of f."""
    ctx = PrimeContext(p, 1, f.nvars)
    fe = _as_exact(f)
    F1 = pow_poly(fe, p - 1)
    return F1.reduce(ctx), delta1(F1, p).reduce(ctx)


def non_split_certificate(f: Polynomial, e: int, n: int, p: int,
                          mode: str = "viaJe") -> CertificateOutcome:
    """Sufficient test for "not n-quasi-F^e-split".

    Accepted iff (a) Delta^sigma_k * f^(p-1) lies in m^[p^(k+1)] for
    k = 0..n-2 and (b) Delta^sigma_(n-1) * f^(p-1) * j lies in m^[p^n] for
    every generator j of J (J_e, or (x, y, z) in ``viaMaximalIdeal`` mode).
    Acceptance: sht^e >= n+1 (viaJe) or sht^2 >= n+1 (viaMaximalIdeal).
    """
    if n < 1 or e < 1:
        raise ValueError("e and n must be positive")
    F1, D = theta_seed(f, p)
    ctx = F1.ctx
    if mode == "viaJe":
        J = j_generators(f, e, p)
    elif mode == "viaMaximalIdeal":
        if is_f_pure(f, p):
            raise ValueError("viaMaximalIdeal requires a non-F-pure f")
        J = [Polynomial.monomial(m, 1, ctx) for m in np.eye(f.nvars, dtype=int).tolist()]
        e = 2
    else:
        raise ValueError(f"unknown mode {mode!r}")
    conds = []
    for k in range(n - 1):
        q = p ** (k + 1)
        sigma = (p**k - 1) // (p - 1)
        prod = _truncated_mul(_truncated_pow(D, sigma, q), F1, q)
        conds.append(_membership_condition(f"productForm(k={k})", prod, q))
    q = p**n
    sigma = (p ** (n - 1) - 1) // (p - 1)
    top = _truncated_mul(_truncated_pow(D, sigma, q), F1, q)
    offender = None
    for j in J:
        prod = _truncated_mul(top, j, q)
        if not prod.is_zero():
            exps, c = prod.terms()[0]
            offender = f"j={j}: {c}*{Polynomial.monomial(exps)}"
            break
    conds.append(ConditionResult(f"productForm(k={n - 1})", offender is None, offender))
    return CertificateOutcome("nonSplitLower", tuple(conds), p, e, n)


def _membership_condition(label: str, truncated: Polynomial, q: int) -> ConditionResult:
    if truncated.is_zero():
        return ConditionResult(label, True)
    exps, c = truncated.terms()[0]
    return ConditionResult(label, False, f"{c}*{Polynomial.monomial(exps)} not in m^[{q}]")


def check_congruence(P: Polynomial, Q: Polynomial, q: int, p_power: int) -> bool:
    """P == Q modulo (m^[q], p_power)."""
    if P.ctx is None or Q.ctx is None:
        raise PrecisionError("congruence checks need residue mode")
    if P.ctx.modulus % p_power:
        raise PrecisionError(f"precision p^{P.ctx.K} too small for modulus {p_power}")
    return in_frobenius_power(P - Q, q, p_power)


def all_monomials(nvars: int, max_degree: int):
    """Monomials of total degree <= max_degree in increasing graded-lex order."""
    for d in range(max_degree + 1):
        combos = [c for c in itertools.product(range(d + 1), repeat=nvars) if sum(c) == d]
        yield from sorted(combos)
