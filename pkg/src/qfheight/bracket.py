"""Two-sided bounds on sht^e from certificates.

The lower bound comes from the non-splitting certificates at level e; the
upper bound from the first height n at which some split witness is
accepted.  Witnesses may sit at a level e' >= e, since sht^e <= sht^e'.
Any contradiction between the two sides raises ``SoundnessError``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .catalog import RdpSpec, SplitAt, equation_of, witness_for
from .certify import (COROLLARY_FORM, CertificateOutcome, SoundnessError, WitnessSpec,
                      non_split_certificate, verify_split_witness)
from .poly import Polynomial
from .search import SearchBudget, brute_force_witness_search


@dataclass(frozen=True)
class BracketOptions:
    use_catalog_witness: bool = True
    use_brute_search: bool = False
    search_degree_bound: int = 6
    search_time_cap: float | None = None


@dataclass(frozen=True)
class HeightBracket:
    e: int
    lower: int
    upper: int | None
    lower_evidence: CertificateOutcome | None = field(default=None, compare=False)
    upper_evidence: WitnessSpec | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.upper is not None and self.lower > self.upper:
            raise SoundnessError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "exact": self.exact}


def _catalog_candidates(spec: RdpSpec | None, n: int, e: int) -> list[WitnessSpec]:
    if spec is None:
        return []
    try:
        return [witness_for(spec, SplitAt(n, e))]
    except ValueError:
        return []


def height_bracket(f: Polynomial | None, e: int, n_max: int, p: int | None = None, *,
                   spec: RdpSpec | None = None,
                   options: BracketOptions = BracketOptions()) -> HeightBracket:
    """Certified lower and upper bounds on sht^e(R/f) with heights up to ``n_max``."""
    if spec is not None:
        f = equation_of(spec) if f is None else f
        p = spec.p if p is None else p
    if f is None:
        raise ValueError("need f or spec")
    if p is None:
        if f.ctx is None:
            raise ValueError("p is required for exact-integer f")
        p = f.ctx.p
    if f.is_zero() or f.has_constant_term():
        raise ValueError("f must be nonzero without constant term")
    if e < 1 or n_max < 1:
        raise ValueError("e and n_max must be positive")

    refuted: dict[int, CertificateOutcome] = {}
    for n in range(1, n_max + 1):
        cert = non_split_certificate(f, e, n, p)
        if cert.accepted:
            refuted[n] = cert
    lower = 1 + max(refuted, default=0)

    upper, evidence = None, None
    for n in range(1, n_max + 1):
        pool = [WitnessSpec(f, p, e, n, Polynomial.constant(1), COROLLARY_FORM, note="base")]
        if options.use_catalog_witness:
            pool += _catalog_candidates(spec, n, e)
        for w in pool:
            if verify_split_witness(w).accepted:
                evidence = w
                break
        if evidence is None and options.use_brute_search and n >= lower:
            result = brute_force_witness_search(
                f, n, SearchBudget(options.search_degree_bound, (e,), options.search_time_cap), p)
            evidence = result.witness
        if evidence is not None:
            upper = n
            if any(k >= n for k in refuted):
                raise SoundnessError(f"height {n} at level {e} is both refuted and witnessed "
                                     f"(witness {evidence.describe()})")
            break
    return HeightBracket(e, lower, upper, refuted.get(lower - 1), evidence)


@dataclass(frozen=True)
class TimedBracket:
    bracket: HeightBracket
    elapsed_ms: int


def timed_bracket(*args, **kwargs) -> TimedBracket:
    start = time.perf_counter()
    b = height_bracket(*args, **kwargs)
    return TimedBracket(b, int((time.perf_counter() - start) * 1000))
