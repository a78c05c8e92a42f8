"""Non-taut rational double points: equations, closed-form heights, reference
data and witness constructors.

D families live in characteristic 2 with parameters ``n >= 2`` and
``0 <= r <= n-1``; E families are the (p, type, coindex) rows of the
embedded reference table.  All logarithms are integer bit-length
computations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from types import MappingProxyType
from typing import Mapping

from .certify import COROLLARY_FORM, WitnessSpec
from .poly import Polynomial, parse_polynomial

D_FAMILIES = ("D2n", "D2n1")
E_FAMILIES = ("E6", "E7", "E8")
FAMILIES = D_FAMILIES + E_FAMILIES


def floor_log2(n: int) -> int:
    if n < 1:
        raise ValueError("log2 of a non-positive integer")
    return n.bit_length() - 1


def ceil_log2(n: int) -> int:
    if n < 1:
        raise ValueError("log2 of a non-positive integer")
    return (n - 1).bit_length()


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


# reference data -----------------------------------------------------------------

@dataclass(frozen=True)
class Table1Row:
    p: int
    family: str
    coindex: int | str
    f: str
    sht: int | str
    sht_inf: int | str
    sht_reg: int | str


@dataclass(frozen=True)
class Table2Row:
    p: int
    family: str
    coindex: int
    f: str
    sht_reg: int
    e: int
    a: str
    c: str
    tau: tuple[str, ...]

    @property
    def tau4_root(self) -> str | None:
        """The generator t of the test ideal with c = t^4, if there is one."""
        c = parse_polynomial(self.c)
        for t in self.tau:
            if parse_polynomial(t) ** 4 == c:
                return t
        return None


@dataclass(frozen=True)
class ReferenceTables:
    version: str
    table1: tuple[Table1Row, ...]
    table2: tuple[Table2Row, ...]
    _t1: Mapping = field(repr=False, compare=False, default=MappingProxyType({}))
    _t2: Mapping = field(repr=False, compare=False, default=MappingProxyType({}))

    def heights(self, p: int, family: str, coindex: int) -> tuple[int, int, int]:
        """(sht, sht^inf, sht^reg) of an E row."""
        try:
            row = self._t1[(p, family, coindex)]
        except KeyError:
            raise KeyError(f"no reference row for p={p}, {family}^{coindex}") from None
        return row.sht, row.sht_inf, row.sht_reg

    def row1(self, p: int, family: str, coindex: int) -> Table1Row:
        try:
            return self._t1[(p, family, coindex)]
        except KeyError:
            raise KeyError(f"no reference row for p={p}, {family}^{coindex}") from None

    def witness_row(self, p: int, family: str, coindex: int) -> Table2Row:
        try:
            return self._t2[(p, family, coindex)]
        except KeyError:
            raise KeyError(f"no witness row for p={p}, {family}^{coindex}") from None

    def e_rows(self) -> list[Table1Row]:
        return [r for r in self.table1 if r.family in E_FAMILIES]


DATA_FILE = "reference_tables.json"


def reference_json() -> str:
    """The embedded data file, verbatim."""
    return resources.files("qfheight").joinpath("data", DATA_FILE).read_text()


@lru_cache(maxsize=1)
def reference_tables() -> ReferenceTables:
    raw = json.loads(reference_json())
    t1 = tuple(Table1Row(r["p"], r["type"], r["coindex"], r["f"], r["sht"], r["sht_inf"],
                         r["sht_reg"]) for r in raw["table1"])
    t2 = tuple(Table2Row(r["p"], r["type"], r["coindex"], r["f"], r["sht_reg"], r["e"],
                         r["a"], r["c"], tuple(r["tau"])) for r in raw["table2"])
    by1 = {(r.p, r.family, r.coindex): r for r in t1 if r.family in E_FAMILIES}
    by2 = {(r.p, r.family, r.coindex): r for r in t2}
    return ReferenceTables(raw["version"], t1, t2, MappingProxyType(by1), MappingProxyType(by2))


# specs and equations ------------------------------------------------------------

@dataclass(frozen=True)
class RdpSpec:
    """A classified singularity.  ``n_param`` is the n of D_{2n} / D_{2n+1}."""

    p: int
    family: str
    n_param: int | None = None
    r_param: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.is_d:
            if self.p != 2:
                raise ValueError("D families are only tabulated in characteristic 2")
            if self.n_param is None or self.n_param < 2:
                raise ValueError("D families need n >= 2")
            if not 0 <= self.r_param <= self.n_param - 1:
                raise ValueError(f"coindex r={self.r_param} outside 0..{self.n_param - 1}")
        else:
            if self.n_param is not None:
                raise ValueError("E families take no n parameter")
            reference_tables().row1(self.p, self.family, self.r_param)

    @property
    def is_d(self) -> bool:
        return self.family in D_FAMILIES

    @property
    def n_minus_r(self) -> int:
        return self.n_param - self.r_param

    @property
    def label(self) -> str:
        if self.is_d:
            index = 2 * self.n_param + (self.family == "D2n1")
            return f"D{index}^{self.r_param}"
        return f"{self.family}^{self.r_param}"

    def describe(self) -> dict:
        out = {"p": self.p, "family": self.family, "coindex": self.r_param}
        if self.is_d:
            out["n"] = self.n_param
        return out


def equation_of(spec: RdpSpec) -> Polynomial:
    """The defining polynomial over the integers."""
    if not spec.is_d:
        return parse_polynomial(reference_tables().row1(spec.p, spec.family, spec.r_param).f)
    n, r = spec.n_param, spec.r_param
    text = f"z^2 + x^2*y + x*y^{n}" if spec.family == "D2n" else f"z^2 + x^2*y + y^{n}*z"
    if r:
        text += f" + x*y^{n - r}*z"
    return parse_polynomial(text)


# closed forms -------------------------------------------------------------------

def e0_inequality(n_minus_r: int, e: int) -> int:
    """2^(floor(log2(n-r)) + e) - (2^e - 1)(n-r) + (2^(e-1) - 1); e0 is where it turns negative."""
    return (1 << (floor_log2(n_minus_r) + e)) - ((1 << e) - 1) * n_minus_r + (1 << (e - 1)) - 1


def e0_of(n_minus_r: int, max_scan: int = 10_000) -> int:
    if n_minus_r < 2 or is_power_of_two(n_minus_r):
        raise ValueError("e0 is defined only when n-r > 1 is not a power of 2")
    for e in range(2, max_scan):
        if e0_inequality(n_minus_r, e) < 0:
            return e
    raise RuntimeError(f"e0 scan did not terminate below {max_scan}")


@dataclass(frozen=True)
class ClosedForm:
    height: int
    case: str  # table | D0 | fpure | e1 | pow2 | below-e0 | from-e0
    e0: int | None = None


def closed_form_heights(spec: RdpSpec, e: int) -> ClosedForm:
    """sht^e from the closed formulas (E families: reference lookup)."""
    if e < 1:
        raise ValueError("e must be positive")
    if not spec.is_d:
        sht, sht_inf, _ = reference_tables().heights(spec.p, spec.family, spec.r_param)
        return ClosedForm(sht if e == 1 else sht_inf, "table")
    n, nr = spec.n_param, spec.n_minus_r
    if spec.r_param == 0:
        return ClosedForm(ceil_log2(n) + 1, "D0")
    if nr == 1:
        return ClosedForm(1, "fpure")
    if e == 1:
        return ClosedForm(ceil_log2(nr) + 1, "e1")
    if is_power_of_two(nr):
        return ClosedForm(floor_log2(nr) + 2, "pow2")
    e0 = e0_of(nr)
    if e < e0:
        return ClosedForm(ceil_log2(nr) + 1, "below-e0", e0)
    return ClosedForm(min(ceil_log2(nr) + 2, ceil_log2(n) + 1), "from-e0", e0)


def stable_heights(spec: RdpSpec) -> tuple[int, int]:
    """(sht^inf, sht^reg)."""
    if not spec.is_d:
        _, sht_inf, sht_reg = reference_tables().heights(spec.p, spec.family, spec.r_param)
        return sht_inf, sht_reg
    n, nr = spec.n_param, spec.n_minus_r
    if spec.r_param == 0:
        h = ceil_log2(n) + 1
    elif nr == 1:
        h = 1
    elif is_power_of_two(nr):
        h = floor_log2(nr) + 2
    else:
        h = min(ceil_log2(nr) + 2, ceil_log2(n) + 1)
    return h, h


@dataclass(frozen=True)
class HeightRecord:
    sht_by_e: Mapping[int, int]
    sht_inf: int
    sht_reg: int
    provenance: str  # formula | table | certified

    def __post_init__(self) -> None:
        values = [self.sht_by_e[e] for e in sorted(self.sht_by_e)]
        if any(a > b for a, b in zip(values, values[1:])):
            raise ValueError("sht^e must be non-decreasing in e")
        if values and values[-1] > self.sht_inf:
            raise ValueError("sht^e exceeds sht^inf")
        if self.sht_inf > self.sht_reg:
            raise ValueError("sht^inf exceeds sht^reg")


def height_record(spec: RdpSpec, e_max: int = 4) -> HeightRecord:
    by_e = {e: closed_form_heights(spec, e).height for e in range(1, e_max + 1)}
    sht_inf, sht_reg = stable_heights(spec)
    return HeightRecord(MappingProxyType(by_e), sht_inf, sht_reg,
                        "formula" if spec.is_d else "table")


@dataclass(frozen=True)
class AlphaPair:
    recursion: int
    closed: int


def alpha_sequence(m: int, n_minus_r: int) -> AlphaPair:
    """alpha_m for the J-ideal exponent: by recursion and by the binary closed form."""
    if m < 2:
        raise ValueError("alpha is defined for m >= 2")
    alpha = n_minus_r // 2
    for _ in range(m - 2):
        alpha = (n_minus_r + alpha) // 2
    big, small = divmod(n_minus_r, 1 << (m - 1))
    closed = ((1 << (m - 1)) - 1) * big + (0 if small <= 1 else small - 1)
    if alpha != closed:
        raise AssertionError(f"alpha_{m}({n_minus_r}): recursion {alpha} != closed form {closed}")
    return AlphaPair(alpha, closed)


def j_closed_form(n: int, r: int, m: int) -> list[tuple[int, int, int]]:
    """Exponent vectors of the generators x, y^min(alpha_m, n//2), z of J_m."""
    if m < 2 or n - r < 2:
        raise ValueError("need m >= 2 and n - r >= 2")
    k = min(alpha_sequence(m, n - r).recursion, n // 2)
    return [(1, 0, 0), (0, k, 0), (0, 0, 1)]


# witnesses ----------------------------------------------------------------------

@dataclass(frozen=True)
class SplitAt:
    n: int
    e: int


@dataclass(frozen=True)
class RegularAt:
    n: int


def _mono(x: int = 0, y: int = 0, z: int = 0) -> Polynomial:
    if min(x, y, z) < 0:
        raise ValueError("negative exponent in witness multiplier")
    return Polynomial.monomial((x, y, z))


def _d_case(spec: RdpSpec, e: int) -> tuple[str, int]:
    """The witness construction and the height it certifies at level e."""
    n, nr = spec.n_param, spec.n_minus_r
    if spec.r_param == 0:
        # the xy^(n-r)z term plays no part in the case-2 construction
        return "case2", ceil_log2(n) + 1
    if nr == 1:
        return "base", 1
    if is_power_of_two(nr):
        return ("base", floor_log2(nr) + 1) if e == 1 else ("case1", floor_log2(nr) + 2)
    if e < e0_of(nr):
        return "case1", floor_log2(nr) + 2
    h2, h3 = ceil_log2(n) + 1, ceil_log2(nr) + 2
    return ("case2", h2) if h2 <= h3 else ("case3", h3)


def d_multiplier(spec: RdpSpec, e: int, case: str, height: int | None = None) -> Polynomial:
    """The monomial a with g = a * f^(2^(e+h-1)-1) for the named construction.

    Every construction is a formula in the height h it certifies; ``height``
    defaults to the construction's own height, and a larger value gives the
    same construction one step up (its f-power grows with h).  ``base``,
    ``case1`` and ``case3`` are all the y-power
    y^(2^(h+e-2) - (2^e-1)(n-r) + 2^(e-1)-1), evaluated at their own h.
    """
    n, nr = spec.n_param, spec.n_minus_r
    half = 1 << (e - 1)
    own = {"base": lambda: 1 if nr == 1 else floor_log2(nr) + 1, "case1": lambda: floor_log2(nr) + 2,
           "case3": lambda: floor_log2(nr) + 3, "case2": lambda: ceil_log2(n) + 1,
           "GD0": lambda: ceil_log2(n) + 1}
    if case not in own:
        raise ValueError(f"unknown construction {case!r}")
    h = own[case]() if height is None else height
    if case in ("base", "case1", "case3"):
        return _mono(y=(1 << (h + e - 2)) - ((1 << e) - 1) * nr + half - 1)
    slack = (1 << (h - 1)) - n
    if case == "GD0":
        y = (1 << (h + e - 2)) - n
        return _mono(z=1, y=y) if spec.family == "D2n" else _mono(x=1, y=y)
    if spec.family == "D2n":
        return _mono(half - 1, slack * half + half - 1, 1)
    return _mono(1, slack * half, half - 1)


def witness_for(spec: RdpSpec, target: SplitAt | RegularAt, case: str | None = None) -> WitnessSpec:
    """Catalog witness for an upper bound.

    ``SplitAt(n, e)``: D families use the construction matching the height
    formula at level e, evaluated at height ``n`` (which may exceed it).  E families use the
    reference witness row with its scalar folded into the multiplier; that
    witness sits at its own (larger) level, which bounds sht^e for every
    smaller e.  ``RegularAt(n)``: E rows come straight from the reference
    data; D families divide a level-e construction by c^(2^n - 1) with
    c = y^(4n), choosing the least e at which that is a polynomial.
    """
    f = equation_of(spec)
    if isinstance(target, SplitAt):
        if not spec.is_d:
            return _e_split(spec, f, target)
        chosen, h = _d_case(spec, target.e)
        case = case or chosen
        if target.n < h:
            raise ValueError(f"{spec.label}: level {target.e} construction certifies {h}, "
                             f"not {target.n}")
        a = d_multiplier(spec, target.e, case, target.n)
        return WitnessSpec(f, 2, target.e, target.n, a, COROLLARY_FORM, note=case)
    if isinstance(target, RegularAt):
        if not spec.is_d:
            row = reference_tables().witness_row(spec.p, spec.family, spec.r_param)
            if target.n != row.sht_reg:
                raise ValueError(f"reference witness is for n={row.sht_reg}")
            t = row.tau4_root
            return WitnessSpec(f, spec.p, row.e, row.sht_reg, parse_polynomial(row.a),
                               COROLLARY_FORM, parse_polynomial(row.c),
                               parse_polynomial(t) if t else None, note="table")
        return _d_regular(spec, f, target.n)
    raise TypeError(f"unknown target {target!r}")


def _e_split(spec: RdpSpec, f: Polynomial, target: SplitAt) -> WitnessSpec:
    row = reference_tables().witness_row(spec.p, spec.family, spec.r_param)
    if target.n != row.sht_reg or target.e > row.e:
        raise ValueError(f"reference witness covers n={row.sht_reg} at e<={row.e}")
    c = parse_polynomial(row.c)
    a = parse_polynomial(row.a) * c ** (spec.p**row.sht_reg - 1)
    return WitnessSpec(f, spec.p, row.e, row.sht_reg, a, COROLLARY_FORM, note="table-split")


def _d_regular(spec: RdpSpec, f: Polynomial, n: int, e_max: int = 20) -> WitnessSpec:
    if spec.n_minus_r == 1:
        raise ValueError(f"{spec.label}: n-r = 1 is F-regular by Fedder's criterion; "
                         "no witness construction is needed or provided")
    h = stable_heights(spec)[1]
    if n < h:
        raise ValueError(f"{spec.label}: sht^reg is {h}")
    if spec.family == "D2n1" and is_power_of_two(spec.n_param) and _d_case(spec, e_max)[0] == "case2":
        # the case-2 multiplier x*z^(2^(e-1)-1) carries no power of y at any level
        raise ValueError(f"{spec.label}: the level-e construction has no y-power to absorb c = y^{4 * spec.n_param}")
    c_y = 4 * spec.n_param
    need = c_y * ((1 << n) - 1)
    for e in range(2, e_max):
        case, height = _d_case(spec, e)
        if height != h:
            continue
        a = d_multiplier(spec, e, case)
        (x, y, z), _ = a.terms()[0]
        if y >= need:
            return WitnessSpec(f, 2, e, n, _mono(x, y - need, z), COROLLARY_FORM,
                               _mono(y=c_y), _mono(y=spec.n_param), note=f"{case}/c")
    raise ValueError(f"no level below {e_max} makes the multiplier divisible by c^(2^n-1)")
