import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fleetcap import panel_data as pdata
from fleetcap.errors import DataError

from published import NATIONAL_TABLE

HEADER = "province,year,vessels,tonnage,power,labor,catch\n"


def test_tianjin_1994_row(panels_by_year):
    r = panels_by_year[1994].get("Tianjin")
    assert (r.vessels, r.tonnage, r.power, r.labor, r.catch) == (919, 30092, 49365, 2594, 17143)


def test_fractional_vessels_kept(panels_by_year):
    assert panels_by_year[1993].get("Liaoning").vessels == 27259.5


def test_bundled_panel_shape(panels):
    assert [p.year for p in panels] == list(range(1993, 2006))
    for p in panels:
        assert len(p) == 11
        assert list(p.provinces) == sorted(p.provinces)


def test_empty_file_is_empty_sequence():
    assert pdata.load_panel(io.StringIO("")) == []
    assert pdata.load_panel(io.StringIO(HEADER)) == []


def test_negative_catch_names_field():
    src = HEADER + "A,2000,1,1,1,1,-5\n"
    with pytest.raises(DataError) as exc:
        pdata.load_panel(io.StringIO(src))
    assert exc.value.field == "catch"
    assert exc.value.line == 2


def test_malformed_row_reports_line():
    src = HEADER + "A,2000,1,1,1,1,5\nB,2000,1,x,1,1,5\n"
    with pytest.raises(DataError) as exc:
        pdata.load_panel(io.StringIO(src))
    assert exc.value.line == 3
    assert exc.value.field == "tonnage"


def test_short_row():
    with pytest.raises(DataError, match="columns"):
        pdata.load_panel(io.StringIO(HEADER + "A,2000,1,1\n"))


def test_duplicate_province_year():
    src = HEADER + "A,2000,1,1,1,1,5\nA,2000,2,2,2,2,6\n"
    with pytest.raises(DataError, match="duplicate"):
        pdata.load_panel(io.StringIO(src))


def test_bad_header():
    with pytest.raises(DataError, match="header"):
        pdata.load_panel(io.StringIO("a,b,c\n1,2,3\n"))


def test_catch_without_inputs_rejected():
    with pytest.raises(DataError, match="inputs zero"):
        pdata.load_panel(io.StringIO(HEADER + "A,2000,0,0,0,0,5\n"))


def test_round_trip_bundled():
    text = pdata.bundled("panel").read_text(encoding="utf-8")
    assert pdata.dump_panel(pdata.load_panel(io.StringIO(text))) == text


decimal_text = st.one_of(
    st.integers(min_value=0, max_value=10 ** 9).map(str),
    st.builds(lambda a, b: f"{a}.{b}", st.integers(0, 10 ** 7), st.integers(1, 999).filter(lambda b: b % 10)),
)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(*[decimal_text] * 5), min_size=1, max_size=6))
def test_round_trip_decimal_text(rows):
    lines = [HEADER]
    for i, vals in enumerate(rows):
        vals = list(vals)
        vals[0] = str(int(float(vals[0])) + 1)  # keep one input positive
        lines.append(f"P{i:02d},2001," + ",".join(vals) + "\n")
    text = "".join(lines)
    assert pdata.dump_panel(pdata.load_panel(io.StringIO(text))) == text


# --- national series ---------------------------------------------------------

def _table_columns(years):
    a = [NATIONAL_TABLE[y][0] for y in years]
    b = [NATIONAL_TABLE[y][1] for y in years]
    d = [NATIONAL_TABLE[y][3] for y in years]
    return a, b, d


def test_national_1994_row():
    s = pdata.derive_national_series([1994], [8270574], [10304461], [6826772241])
    assert s.income_per_capacity_ton[0] == pytest.approx(662.5, abs=0.05)
    assert s.income_per_catch_ton[0] == pytest.approx(825.4, abs=0.05)
    assert s.utilization[0] == pytest.approx(0.803, abs=0.001)
    assert s.capacity_increment[0] is None and s.utilization_increment[0] is None


def test_national_1996_increment():
    a, b, d = _table_columns([1995, 1996])
    s = pdata.derive_national_series([1995, 1996], a, b, d)
    assert s.capacity_increment[1] == pytest.approx(4445794, abs=1)


def test_identity_case():
    s = pdata.derive_national_series([2000, 2001], [5.0, 5.0], [5.0, 5.0], [1.0, 1.0])
    assert s.utilization == (1.0, 1.0)
    assert s.utilization_increment[1] == 0.0


# 2004 income per capacity ton prints 849.7 although D/B = 855.4; no other cell disagrees
MISPRINTED = {(2004, "E")}


def test_printed_columns_reproduced():
    years = sorted(NATIONAL_TABLE)
    a, b, d = _table_columns(years)
    s = pdata.derive_national_series(years, a, b, d)
    for i, y in enumerate(years):
        _, _, c, _, e, f, g, h = NATIONAL_TABLE[y]
        assert s.utilization[i] == pytest.approx(g, abs=0.0005 + 1e-9)
        if (y, "E") in MISPRINTED:
            assert s.income_per_capacity_ton[i] != pytest.approx(e, abs=0.05)
            assert s.income_per_catch_ton[i] == pytest.approx(f, abs=0.05 + 1e-9)
        elif e is not None:
            assert s.income_per_capacity_ton[i] == pytest.approx(e, abs=0.05 + 1e-9)
            assert s.income_per_catch_ton[i] == pytest.approx(f, abs=0.05 + 1e-9)
        if c is not None:
            # printed B is rounded to the ton, so increments agree to about a ton
            assert s.capacity_increment[i] == pytest.approx(c, abs=1.0)
            assert s.utilization_increment[i] == pytest.approx(h, abs=0.0015)


def test_bundled_national_consistent_with_table(national):
    for i, y in enumerate(national.years):
        a, b, c, d = NATIONAL_TABLE[y][:4]
        assert national.catch[i] == a
        assert national.capacity[i] == pytest.approx(b, abs=0.5)
        if c is not None:
            # capacities carry the sub-ton precision implied by the printed increments
            assert national.capacity_increment[i] == pytest.approx(c, abs=1e-3)
        assert national.income[i] == d


def test_non_consecutive_years():
    with pytest.raises(DataError, match="consecutive"):
        pdata.derive_national_series([2000, 2002], [1, 1], [2, 2], [1, 1])


def test_zero_divisor():
    with pytest.raises(DataError):
        pdata.derive_national_series([2000], [1], [0], [1])
    with pytest.raises(DataError):
        pdata.derive_national_series([2000], [0], [1], [1])


def test_utilization_above_one_flagged():
    s = pdata.derive_national_series([2000], [1.1], [1.0], [None])
    assert s.warnings and "exceeds 1" in s.warnings[0]
    assert s.income_per_capacity_ton == (None,)


def test_load_national_csv():
    src = "year,catch_t,capacity_t,income_yuan\n2000,1,2,\n2001,2,2,10\n"
    s = pdata.load_national(io.StringIO(src))
    assert s.income == (None, 10.0)
    assert s.utilization == (0.5, 1.0)
    assert s.utilization_increment == (None, 0.5)


# --- validation --------------------------------------------------------------

def test_validate_flags_2003_hainan(panels, reference):
    findings = pdata.validate_panel(panels, reference)
    keys = {(f.year, f.province, f.rule) for f in findings}
    assert (2003, "Hainan", "cu_inconsistent") in keys
    assert (2003, "Shandong", "cu_inconsistent") in keys


def test_validate_flags_1994_labor_jump(panels):
    findings = pdata.validate_panel(panels)
    jiangsu = [f for f in findings if (f.year, f.province, f.rule) == (1994, "Jiangsu", "scale_jump")]
    assert len(jiangsu) == 1 and jiangsu[0].detail.startswith("labor 942812 -> 74993")


def test_validate_only_2003_inconsistencies(panels, reference):
    cu = [f for f in pdata.validate_panel(panels, reference) if f.rule == "cu_inconsistent"]
    assert {f.year for f in cu} == {2003}


def test_validate_clean_panel_empty():
    src = HEADER + "A,2000,1,2,3,4,5\nB,2000,2,2,3,4,6\nA,2001,1,2,3,4,5\nB,2001,2,3,3,4,7\n"
    panels = pdata.load_panel(io.StringIO(src))
    ref = {(2000, "A"): (1.0, 5.0), (2000, "B"): (0.5, 12.0)}
    assert pdata.validate_panel(panels, ref) == []


def test_validate_pure(panels, reference):
    before = pdata.dump_panel(panels)
    a = pdata.validate_panel(panels, reference)
    b = pdata.validate_panel(panels, reference)
    assert a == b
    assert pdata.dump_panel(panels) == before


def test_findings_json_lines(panels, reference):
    import json

    text = pdata.format_findings(pdata.validate_panel(panels, reference), "json")
    rows = [json.loads(line) for line in text.splitlines()]
    assert all(set(r) == {"year", "province", "rule", "detail"} for r in rows)
