"""Reproduction suites: reference-table heights, the D-family grid, witness
rows, and the operator and lemma identities on seeded random grids."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .bracket import HeightBracket, height_bracket
from .catalog import (D_FAMILIES, RdpSpec, RegularAt, SplitAt, alpha_sequence, ceil_log2,
                      closed_form_heights, e0_inequality, e0_of, equation_of, is_power_of_two,
                      j_closed_form, reference_tables, witness_for)
from .certify import (SoundnessError, WitnessSpec, check_congruence, j_generators, monomial_ideal_equal,
                      non_split_certificate, verify_regular_witness, verify_split_witness)
from .frobenius import cartier_u, delta, delta1, phi, vp_multinomial
from .poly import Polynomial, PrimeContext, parse_polynomial, pow_poly

DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    name: str
    checks: list[Check] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def to_json(self) -> dict:
        return {"name": self.name, "passed": sum(c.passed for c in self.checks),
                "failed": [f"{c.name}: {c.detail}" if c.detail else c.name for c in self.failed]}


def _timed(name: str, body: Callable[[SuiteReport], None]) -> SuiteReport:
    report = SuiteReport(name)
    start = time.perf_counter()
    body(report)
    report.elapsed = time.perf_counter() - start
    return report


def _bracket_check(report: SuiteReport, label: str, spec: RdpSpec, e: int, n_max: int,
                   expected: int) -> HeightBracket | None:
    try:
        b = height_bracket(None, e, n_max, spec=spec)
    except SoundnessError as exc:
        report.add(label, False, f"soundness violation: {exc}")
        return None
    ok = b.exact and b.lower == expected
    report.add(label, ok, "" if ok else f"bracket [{b.lower}, {b.upper}] vs expected {expected}")
    return b


# reference heights and the D grid ------------------------------------------------

def d0_specs(n_range: Iterable[int] = range(2, 9)) -> list[RdpSpec]:
    return [RdpSpec(2, fam, n, 0) for fam in D_FAMILIES for n in n_range]


def table1_rows(report: SuiteReport, d0_range: Iterable[int] = range(2, 9)) -> None:
    """Brackets at e=1 (and at e=2 for non-F-pure rows) against the reference columns."""
    tables = reference_tables()
    for row in tables.e_rows():
        spec = RdpSpec(row.p, row.family, None, row.coindex)
        name = f"p={row.p} {spec.label}"
        _bracket_check(report, f"{name} e=1", spec, 1, row.sht + 1, row.sht)
        if row.sht > 1:
            _bracket_check(report, f"{name} e=2", spec, 2, row.sht_inf + 1, row.sht_inf)
    for spec in d0_specs(d0_range):
        h = ceil_log2(spec.n_param) + 1  # the D^0 reference column
        for e in (1, 2):
            _bracket_check(report, f"p=2 {spec.label} e={e}", spec, e, h + 1, h)


def d_grid(report: SuiteReport, n_formula: Iterable[int] = range(2, 17),
           n_bracket: Iterable[int] = range(2, 9), e_list=(1, 2, 3)) -> None:
    for fam in D_FAMILIES:
        for n in n_formula:
            for r in range(n):
                spec = RdpSpec(2, fam, n, r)
                expected = 1 if n - r == 1 else ceil_log2(n - r) + 1
                got = closed_form_heights(spec, 1).height
                report.add(f"formula {spec.label} e=1", got == expected, f"{got} != {expected}")
    for fam in D_FAMILIES:
        for n in n_bracket:
            for r in range(n):
                spec = RdpSpec(2, fam, n, r)
                for e in e_list:
                    h = closed_form_heights(spec, e).height
                    _bracket_check(report, f"bracket {spec.label} e={e}", spec, e, h + 1, h)


def soundness_sweep(report: SuiteReport, specs_levels: Iterable[tuple[RdpSpec, int, int]]) -> None:
    """No height may be both refuted by a certificate and witnessed at one level."""
    for spec, e, n_max in specs_levels:
        f = equation_of(spec)
        for n in range(1, n_max + 1):
            if not non_split_certificate(f, e, n, spec.p).accepted:
                continue
            pool = []
            try:
                pool.append(witness_for(spec, SplitAt(n, e)))
            except ValueError:
                pass
            pool.append(WitnessSpec(f, spec.p, e, n, Polynomial.constant(1)))
            clash = [w for w in pool if verify_split_witness(w).accepted]
            report.add(f"p={spec.p} {spec.label} e={e} n={n}", not clash,
                       f"refuted and witnessed by {clash[0].describe()}" if clash else "")


def run_table1(d0_range: Iterable[int] = range(2, 9)) -> SuiteReport:
    def body(r: SuiteReport) -> None:
        table1_rows(r, d0_range)
        d_grid(r)
    return _timed("table1", body)


# regular witness rows ------------------------------------------------------------

def table2_rows(report: SuiteReport) -> None:
    for row in reference_tables().table2:
        spec = RdpSpec(row.p, row.family, None, row.coindex)
        w = witness_for(spec, RegularAt(row.sht_reg))
        outcome = verify_regular_witness(w)
        failed = [c for c in outcome.conditions if not c.passed]
        report.add(f"p={row.p} {spec.label} n={row.sht_reg} e={row.e}", outcome.accepted,
                   "; ".join(f"{c.label}: {c.offender}" for c in failed))


def run_table2() -> SuiteReport:
    return _timed("table2", table2_rows)


# lemmas and identities ----------------------------------------------------------

E7_3 = "z^2+x^3+x*y^3+x*y*z"
E8_4 = "z^2+x^3+y^5+x*y*z"


def e0_checks(report: SuiteReport, limit: int = 1000, extra: int = 10) -> None:
    for nr in range(3, limit + 1):
        if is_power_of_two(nr):
            continue
        e0 = e0_of(nr)
        before = all(e0_inequality(nr, e) >= 0 for e in range(2, e0))
        after = all(e0_inequality(nr, e) < 0 for e in range(e0, e0 + extra + 1))
        report.add(f"e0 n-r={nr}", before and after, f"e0={e0}")


def e0_jump(report: SuiteReport, n_range: Iterable[int] = range(2, 9)) -> None:
    """At e0 the certified height jumps from ceil(log2(n-r))+1 to the stable value."""
    for fam in D_FAMILIES:
        for n in n_range:
            for r in range(1, n):
                nr = n - r
                if nr < 2 or is_power_of_two(nr):
                    continue
                spec = RdpSpec(2, fam, n, r)
                e0 = e0_of(nr)
                high = min(ceil_log2(nr) + 2, ceil_log2(n) + 1)
                _bracket_check(report, f"{spec.label} e0={e0}", spec, e0, high + 1, high)
                if e0 > 1:
                    low = ceil_log2(nr) + 1
                    _bracket_check(report, f"{spec.label} e0-1={e0 - 1}", spec, e0 - 1, low + 1, low)


def alpha_checks(report: SuiteReport, m_max: int = 20, limit: int = 1000) -> None:
    bad = []
    for m in range(2, m_max + 1):
        for nr in range(2, limit + 1):
            try:
                alpha_sequence(m, nr)
            except AssertionError as exc:
                bad.append(str(exc))
    report.add(f"alpha recursion = closed form (m<={m_max}, n-r<={limit})", not bad,
               "; ".join(bad[:3]))


def j_checks(report: SuiteReport, e_list=(2, 3, 4), n_range: Iterable[int] = range(2, 9),
             box: int = 64) -> None:
    for fam in D_FAMILIES:
        for n in n_range:
            for r in range(0, n - 1):
                f = equation_of(RdpSpec(2, fam, n, r))
                for e in e_list:
                    gens = j_generators(f, e, 2)
                    ok = monomial_ideal_equal(gens, j_closed_form(n, r, e), box)
                    report.add(f"J_{e} {fam} n={n} r={r}", ok, ", ".join(map(str, gens)))


def _random_poly(rng: np.random.Generator, max_terms: int, max_degree: int, coeff: int = 5,
                 nvars: int = 3) -> Polynomial:
    terms = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        while True:
            exps = tuple(int(v) for v in rng.integers(0, max_degree + 1, size=nvars))
            if sum(exps) <= max_degree:
                break
        terms[exps] = terms.get(exps, 0) + int(rng.integers(-coeff, coeff + 1))
    return Polynomial.from_dict(terms, nvars=nvars)


def identity_checks(report: SuiteReport, seed: int = DEFAULT_SEED) -> None:
    rng = np.random.default_rng(seed)

    bad = 0
    for _ in range(60):
        a = _random_poly(rng, 4, 4)
        for p in (2, 3):
            for m in (1, 2):
                rhs = Polynomial.zero(nvars=3)
                for l in range(m + 1):
                    rhs = rhs + phi(delta(a, l, p).value, m - l, p).scale(p**l)
                bad += pow_poly(a, p**m) != rhs
    report.add("Witt expansion a^(p^m) = sum p^l phi^(m-l)(Delta_l(a))", bad == 0, f"{bad} failures")

    bad = 0
    for _ in range(100):
        a = _random_poly(rng, 4, 4)
        p = int(rng.choice([2, 3, 5]))
        bad += delta1(a, p).scale(p) != pow_poly(a, p) - phi(a, 1, p)
    report.add("p*Delta_1(a) = a^p - phi(a)", bad == 0, f"{bad} failures")

    bad = 0
    for i in range(200):
        p = (2, 3)[i % 2]
        ctx = PrimeContext(p, 3)
        c = _random_poly(rng, 4, 5).reduce(ctx)
        b = _random_poly(rng, 6, 5).reduce(ctx)
        bad += cartier_u(phi(c) * b, 1) != c * cartier_u(b, 1)
    report.add("projection formula u(phi(c) b) = c u(b)", bad == 0, f"{bad} failures")

    bad = 0
    for i in range(200):
        p = (2, 3)[i % 2]
        P = _random_poly(rng, 8, 40).reduce(PrimeContext(p, 2))
        a, b = (int(v) for v in rng.integers(0, 4, size=2))
        bad += cartier_u(P, a + b) != cartier_u(cartier_u(P, b), a)
    report.add("u^(a+b) = u^a u^b", bad == 0, f"{bad} failures")

    bad = 0
    for _ in range(500):
        p = int(rng.choice([2, 3, 5]))
        parts = [int(v) for v in rng.integers(0, 200, size=int(rng.integers(1, 5)))]
        try:
            vp_multinomial(sum(parts), parts, p)
        except AssertionError:
            bad += 1
    report.add("Kummer carries = Legendre difference", bad == 0, f"{bad} failures")


def congruence_checks(report: SuiteReport, e_range: Iterable[int] = range(1, 7)) -> None:
    for label, text in (("E7^3", E7_3), ("E8^4", E8_4)):
        f = parse_polynomial(text)
        ctx = PrimeContext(2, 2)
        xyz = Polynomial.monomial((1, 1, 1), 1, ctx)
        for e in e_range:
            q1, q0 = 2 ** (e + 1), 2**e
            top = check_congruence(pow_poly(f.reduce(ctx), q1 - 1), pow_poly(xyz, q1 - 1), q1, 4)
            low = check_congruence(pow_poly(f.reduce(ctx), q0 - 1), pow_poly(xyz, q0 - 1), q0, 2)
            report.add(f"{label} f^(2^{e + 1}-1) = (xyz)^(2^{e + 1}-1) mod (m^[2^{e + 1}], 4)", top)
            report.add(f"{label} f^(2^{e}-1) = (xyz)^(2^{e}-1) mod (m^[2^{e}], 2)", low)


def kummer_triples(e: int, h: int) -> dict[str, tuple[int, ...]]:
    """Exponent triples of the surviving terms in the D-type witness arguments."""
    total = 2 ** (e + h - 1) - 1
    big, half = 2 ** (e + h - 2), 2 ** (e - 1)
    return {
        "case1": (big - half, 2**e - 1, big - half),
        "case2": (big - half, half, big - 1),
        "total": (total,),
    }


def kummer_checks(report: SuiteReport) -> None:
    for e in (2, 3):
        for h in (3, 4):
            t = kummer_triples(e, h)
            for case in ("case1", "case2"):
                parts = t[case]
                v = vp_multinomial(t["total"][0], parts, 2).valuation
                report.add(f"v2({t['total'][0]}; {', '.join(map(str, parts))}) = {h - 1} ({case})",
                           v == h - 1, f"got {v}")


def run_lemmas(seed: int = DEFAULT_SEED) -> SuiteReport:
    def body(r: SuiteReport) -> None:
        e0_checks(r)
        e0_jump(r)
        alpha_checks(r)
        j_checks(r)
        identity_checks(r, seed)
        congruence_checks(r)
        kummer_checks(r)
    return _timed("lemmas", body)


SUITES = {"table1": run_table1, "table2": run_table2, "lemmas": run_lemmas}
