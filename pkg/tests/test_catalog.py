import json
import math

import pytest
from hypothesis import given, strategies as st

from qfheight.bracket import height_bracket
from qfheight.catalog import (RdpSpec, RegularAt, SplitAt, alpha_sequence, ceil_log2, closed_form_heights,
                              e0_inequality, e0_of, equation_of, floor_log2, height_record, is_power_of_two,
                              j_closed_form, reference_json, reference_tables, witness_for)
from qfheight.certify import SoundnessError, verify_regular_witness, verify_split_witness
from qfheight.bracket import HeightBracket
from qfheight.poly import parse_polynomial


def D(n, r, family="D2n"):
    return RdpSpec(2, family, n, r)


def d_specs(n_max=16):
    return [D(n, r, fam) for fam in ("D2n", "D2n1") for n in range(2, n_max + 1) for r in range(n)]


# integer logarithms ---------------------------------------------------------------

@given(st.integers(1, 10**6))
def test_log2_helpers_match_math(n):
    assert floor_log2(n) == math.floor(math.log2(n))
    assert ceil_log2(n) == math.ceil(math.log2(n))
    assert is_power_of_two(n) == (2 ** floor_log2(n) == n)


def test_log2_exact_at_large_powers():
    assert ceil_log2(2**200) == 200 and ceil_log2(2**200 + 1) == 201


# specs and equations ----------------------------------------------------------------

@pytest.mark.parametrize("spec,text", [
    (RdpSpec(2, "E7", None, 3), "z^2+x^3+x*y^3+x*y*z"),
    (D(4, 1), "z^2+x^2*y+x*y^4+x*y^3*z"),
    (RdpSpec(5, "E8", None, 0), "z^2+x^3+y^5"),
    (D(3, 0, "D2n1"), "z^2+x^2*y+y^3*z"),
])
def test_equation_of(spec, text):
    assert equation_of(spec) == parse_polynomial(text)


@pytest.mark.parametrize("args", [(3, "D2n", 4, 1), (2, "D2n", 1, 0), (2, "D2n", 4, 4), (2, "E7", None, 9),
                                  (7, "E8", None, 0), (2, "A1", None, 0), (2, "E6", 3, 0)])
def test_invalid_specs(args):
    with pytest.raises((ValueError, KeyError)):
        RdpSpec(*args)


def test_labels():
    assert D(5, 2).label == "D10^2" and D(5, 2, "D2n1").label == "D11^2"
    assert RdpSpec(3, "E8", None, 0).label == "E8^0"


# reference tables -------------------------------------------------------------------

def test_reference_lookups():
    t = reference_tables()
    assert t.heights(2, "E7", 2) == (2, 3, 3)
    assert t.heights(5, "E8", 1) == (1, 1, 2)
    row = t.witness_row(3, "E8", 0)
    assert (row.sht_reg, row.e, row.a, row.c, row.tau) == (3, 5, "x^2*y^57*z^80", "y^4", ("x", "y", "z"))
    with pytest.raises(KeyError):
        t.heights(2, "E6", 5)


def test_reference_counts():
    t = reference_tables()
    assert len(t.e_rows()) == 20 and len(t.table2) == 20
    assert sum(1 for r in t.table1 if r.coindex == "0") == 2


def test_reference_internal_consistency():
    for r in reference_tables().e_rows():
        assert 1 <= r.sht <= r.sht_inf <= r.sht_reg


def test_reference_json_is_stable():
    raw = reference_json()
    data = json.loads(raw)
    assert data["version"] == "1.0.0"
    assert json.loads(json.dumps(data)) == data


def test_table2_c_is_fourth_power_of_tau_generator():
    for row in reference_tables().table2:
        assert row.tau4_root is not None, row


# closed forms --------------------------------------------------------------------

@pytest.mark.parametrize("spec,e,height", [
    (D(5, 2), 2, 3), (D(5, 2), 3, 4), (D(6, 2), 2, 4), (D(6, 2), 7, 4),
    (D(3, 0), 1, 3), (D(3, 0), 5, 3), (D(4, 3), 3, 1),
])
def test_closed_form_examples(spec, e, height):
    assert closed_form_heights(spec, e).height == height


def test_e0_of_d10_coindex2():
    assert e0_inequality(3, 2) == 0 and e0_inequality(3, 3) == -2
    assert e0_of(3) == 3 and closed_form_heights(D(5, 2), 3).e0 == 3


def test_e0_undefined_for_powers_of_two():
    with pytest.raises(ValueError):
        e0_of(8)


@pytest.mark.parametrize("spec", d_specs(), ids=lambda s: s.label)
def test_closed_form_monotone_dichotomy(spec):
    nr = spec.n_minus_r
    last = 0 if nr < 2 or is_power_of_two(nr) else e0_of(nr) + 1
    base = 1 if nr == 1 else math.ceil(math.log2(nr)) + 1
    heights = [closed_form_heights(spec, e).height for e in range(1, max(last, 3) + 1)]
    assert heights == sorted(heights)
    if spec.r_param:
        assert all(h in (base, base + 1) for h in heights)


def test_e0_scan_bounds():
    for nr in range(3, 1001):
        if is_power_of_two(nr):
            continue
        e0 = e0_of(nr)
        assert all(e0_inequality(nr, e) >= 0 for e in range(2, e0))
        assert all(e0_inequality(nr, e) < 0 for e in range(e0, e0 + 11))


def test_height_record_chain():
    rec = height_record(D(5, 2), 5)
    assert dict(rec.sht_by_e) == {1: 3, 2: 3, 3: 4, 4: 4, 5: 4}
    assert (rec.sht_inf, rec.sht_reg, rec.provenance) == (4, 4, "formula")
    assert height_record(RdpSpec(2, "E7", None, 2), 2).provenance == "table"


# alpha and J --------------------------------------------------------------------

@pytest.mark.parametrize("m,nr,expected", [(2, 5, 2), (3, 5, 3), (2, 4, 2)])
def test_alpha_examples(m, nr, expected):
    assert alpha_sequence(m, nr) == (expected, expected) or alpha_sequence(m, nr).recursion == expected


@given(st.integers(2, 20), st.integers(2, 1000))
def test_alpha_recursion_equals_closed_form(m, nr):
    pair = alpha_sequence(m, nr)
    assert pair.recursion == pair.closed


@pytest.mark.parametrize("n,r,m,y", [(5, 1, 2, 2), (4, 1, 3, 2), (2, 0, 2, 1)])
def test_j_closed_form(n, r, m, y):
    assert j_closed_form(n, r, m) == [(1, 0, 0), (0, y, 0), (0, 0, 1)]


# witnesses ----------------------------------------------------------------------

def test_case1_witness_d10_coindex2():
    w = witness_for(D(5, 2), SplitAt(3, 2))
    assert w.note == "case1" and w.a == parse_polynomial("1") and w.f_exponent == 15
    assert verify_split_witness(w).accepted


def test_gd0_witness_d10_coindex0():
    w = witness_for(D(5, 0), SplitAt(4, 2), case="GD0")
    assert w.a == parse_polynomial("z*y^11") and w.f_exponent == 31


def test_e8_regular_witness_data():
    w = witness_for(RdpSpec(2, "E8", None, 4), RegularAt(3))
    assert (w.e, w.a, w.c) == (8, parse_polynomial("x^31*y^3*z"), parse_polynomial("y^4"))


def test_no_regular_witness_when_n_minus_r_is_one():
    with pytest.raises(ValueError, match="Fedder"):
        witness_for(D(4, 3), RegularAt(1))


def test_witness_below_formula_height_is_rejected():
    with pytest.raises(ValueError):
        witness_for(D(5, 2), SplitAt(2, 2))


def test_case1_exponent_nonnegative_exactly_in_valid_range():
    for nr in range(2, 200):
        if is_power_of_two(nr):
            assert all(e0_inequality(nr, e) >= 0 for e in range(1, 12))
        else:
            e0 = e0_of(nr)
            assert all((e0_inequality(nr, e) >= 0) == (e < e0) for e in range(2, e0 + 5))


@pytest.mark.parametrize("spec", [D(n, r, fam) for fam in ("D2n", "D2n1") for n in range(2, 7)
                                  for r in range(n) if n - r >= 2], ids=lambda s: s.label)
def test_d_regular_witness(spec):
    h = height_record(spec, 1).sht_reg
    n, nr = spec.n_param, spec.n_minus_r
    case2_stable = spec.r_param == 0 or not is_power_of_two(nr) and math.ceil(math.log2(n)) <= math.ceil(math.log2(nr)) + 1
    if spec.family == "D2n1" and is_power_of_two(n) and case2_stable:
        with pytest.raises(ValueError, match="no y-power"):
            witness_for(spec, RegularAt(h))
        return
    w = witness_for(spec, RegularAt(h))
    assert w.tau4 ** 4 == w.c
    assert verify_regular_witness(w).accepted


@pytest.mark.parametrize("spec", [D(n, r, fam) for fam in ("D2n", "D2n1") for n in range(2, 9)
                                  for r in range(n)], ids=lambda s: s.label)
@pytest.mark.parametrize("e", [1, 2, 3])
def test_witness_monotone_in_n(spec, e):
    h = closed_form_heights(spec, e).height
    assert verify_split_witness(witness_for(spec, SplitAt(h, e))).accepted
    assert verify_split_witness(witness_for(spec, SplitAt(h + 1, e))).accepted


# brackets -----------------------------------------------------------------------

@pytest.mark.parametrize("spec,e,n_max,expected", [
    (RdpSpec(2, "E6", None, 0), 1, 4, 2),
    (RdpSpec(2, "E7", None, 2), 2, 5, 3),
    (D(5, 2), 3, 6, 4),
])
def test_bracket_examples(spec, e, n_max, expected):
    b = height_bracket(None, e, n_max, spec=spec)
    assert (b.lower, b.upper, b.exact) == (expected, expected, True)


def test_bracket_monotone_chain():
    spec = D(5, 2)
    values = [height_bracket(None, e, 6, spec=spec).lower for e in (1, 2, 3)]
    assert values == sorted(values) == [3, 3, 4]


def test_bracket_without_witness_is_partial():
    b = height_bracket(parse_polynomial("z^2+x^3+y^5"), 1, 2, 2)
    assert not b.exact and b.upper is None and b.lower == 3


def test_bracket_soundness_guard():
    with pytest.raises(SoundnessError):
        HeightBracket(1, 3, 2)
