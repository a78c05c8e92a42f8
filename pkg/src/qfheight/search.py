"""Brute-force witness search over monomial multipliers.

Independent of the constructed witnesses: candidates ``g = a * f^(p^(e+n-1)-1)``
are enumerated by (total degree of a, graded-lex order of a, e) and each is
run through the split-witness verifier.  Exhausting the budget proves
nothing.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator, Sequence

from .certify import COROLLARY_FORM, CertificateOutcome, WitnessSpec, all_monomials, \
    verify_split_witness
from .poly import Polynomial


@dataclass(frozen=True)
class SearchBudget:
    degree_bound: int = 6
    e_list: tuple[int, ...] = (1,)
    time_cap_seconds: float | None = None

    def __post_init__(self) -> None:
        if self.degree_bound < 0:
            raise ValueError("degree bound must be non-negative")
        if not self.e_list or min(self.e_list) < 1:
            raise ValueError("e_list needs positive entries")
        object.__setattr__(self, "e_list", tuple(sorted(set(self.e_list))))


@dataclass(frozen=True)
class SearchResult:
    status: str  # found | exhausted | timeout
    witness: WitnessSpec | None
    outcome: CertificateOutcome | None
    tested: int
    elapsed: float

    @property
    def found(self) -> bool:
        return self.status == "found"


def candidates(nvars: int, budget: SearchBudget) -> Iterator[tuple[tuple[int, ...], int]]:
    """(exponents of a, e) in search order."""
    for exps in all_monomials(nvars, budget.degree_bound):
        for e in budget.e_list:
            yield exps, e


def brute_force_witness_search(f: Polynomial, n: int, budget: SearchBudget,
                               p: int | None = None) -> SearchResult:
    """First accepted split witness for height ``n`` within the budget."""
    if f.has_constant_term() or f.is_zero():
        raise ValueError("f must be nonzero without constant term")
    if p is None:
        if f.ctx is None:
            raise ValueError("p is required for exact-integer f")
        p = f.ctx.p
    start = time.monotonic()
    tested = 0
    for exps, e in candidates(f.nvars, budget):
        if budget.time_cap_seconds is not None and time.monotonic() - start > budget.time_cap_seconds:
            return SearchResult("timeout", None, None, tested, time.monotonic() - start)
        w = WitnessSpec(f, p, e, n, Polynomial.monomial(exps), COROLLARY_FORM, note="search")
        outcome = verify_split_witness(w)
        tested += 1
        if outcome.accepted:
            return SearchResult("found", w, outcome, tested, time.monotonic() - start)
    return SearchResult("exhausted", None, None, tested, time.monotonic() - start)


def search_position(exps: Sequence[int], e: int, nvars: int, budget: SearchBudget) -> int:
    """Index of (exps, e) in the enumeration order (for prefix-stability checks)."""
    for i, cand in enumerate(candidates(nvars, budget)):
        if cand == (tuple(exps), e):
            return i
    raise ValueError("candidate outside the budget")
