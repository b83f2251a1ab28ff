import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from fleetcap import dea_capacity as dea
from fleetcap.errors import DataError
from fleetcap.panel_data import FleetRecord, YearPanel

from oracles import dea_phi_by_enumeration

N_RANDOM_PANELS = 200


def make_panel(inputs, catch, year=2000, names=None):
    inputs = np.asarray(inputs, dtype=float)
    names = names or [f"P{i:02d}" for i in range(len(catch))]
    recs = tuple(
        FleetRecord(nm, year, *map(float, x), float(y)) for nm, x, y in zip(names, inputs, catch)
    )
    return YearPanel(year, recs)


def random_panel(rng, n=None):
    n = n or int(rng.integers(2, 7))
    inputs = rng.uniform(1.0, 100.0, size=(n, 4)) * rng.choice([1.0, 1e3, 1e5], size=4)
    catch = rng.uniform(10.0, 1e4, size=n)
    return inputs, catch


def phis(panel):
    return np.array([r.phi for r in dea.measure_year(panel).results])


def test_tianjin_1993(panels_by_year):
    r = dea.measure_dmu(panels_by_year[1993], "Tianjin")
    assert r.capacity_utilization == pytest.approx(0.334, abs=0.005)
    assert r.capacity_output == pytest.approx(49156, rel=0.01)


def test_shanghai_1994_on_frontier(panels_by_year):
    r = dea.measure_dmu(panels_by_year[1994], "Shanghai")
    assert r.capacity_utilization == pytest.approx(1.0, abs=1e-9)
    assert r.capacity_output == pytest.approx(83177, abs=1e-3)


def test_single_dmu():
    r = dea.measure_dmu(make_panel([[1, 2, 3, 4]], [5.0]), "P00")
    assert r.phi == 1.0 and r.capacity_utilization == 1.0


def test_two_dmus_hand_solution():
    t = dea.measure_year(make_panel([[1, 1, 1, 1], [1, 1, 1, 1]], [2.0, 1.0]))
    assert t.get("P01").phi == pytest.approx(2.0, abs=1e-12)
    assert t.get("P01").capacity_utilization == pytest.approx(0.5, abs=1e-12)
    assert t.get("P00").phi == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("year,expected", [(1994, 10304461), (2000, 18138509)])
def test_national_capacity(panels_by_year, year, expected):
    t = dea.measure_year(panels_by_year[year])
    assert t.national_capacity == pytest.approx(expected, rel=0.005)


def test_crs_ray_all_efficient():
    base = np.array([3.0, 40.0, 500.0, 7.0])
    scales = [0.5, 1.0, 2.5, 10.0]
    t = dea.measure_year(make_panel([base * s for s in scales], [6.0 * s for s in scales]))
    for r in t.results:
        assert r.capacity_utilization == pytest.approx(1.0, abs=1e-12)


def test_zero_catch_rejected():
    with pytest.raises(DataError) as exc:
        dea.measure_dmu(make_panel([[1, 1, 1, 1], [2, 2, 2, 2]], [1.0, 0.0]), "P01")
    assert exc.value.field == "catch"


def test_unknown_target():
    with pytest.raises(DataError):
        dea.measure_dmu(make_panel([[1, 1, 1, 1]], [1.0]), "nowhere")


def test_zero_input_is_not_special_cased():
    t = dea.measure_year(make_panel([[0, 1, 1, 1], [1, 1, 1, 1]], [1.0, 1.0]))
    assert t.get("P00").phi == pytest.approx(1.0)
    assert t.get("P01").phi == pytest.approx(1.0)


def test_single_year_series(panels_by_year):
    s = dea.capacity_series([dea.measure_year(panels_by_year[1995])])
    assert len(s) == 1 and s[0]["year"] == 1995


def test_series_utilization_is_division(panels):
    for row in dea.capacity_series(dea.measure_all(panels)):
        assert row["utilization"] == pytest.approx(row["catch_t"] / row["capacity_t"], rel=1e-15)


def test_matches_scipy_linprog(panels_by_year):
    panel = panels_by_year[1999]
    for prov in panel.provinces:
        lp = dea.envelopment_program(panel, prov)
        A = np.array([c.coefficients for c in lp.constraints])
        b = np.array([c.rhs for c in lp.constraints])
        ref = linprog(-np.array(lp.objective), A_ub=A, b_ub=b, bounds=(0, None), method="highs")
        assert dea.measure_dmu(panel, prov).phi == pytest.approx(-ref.fun, rel=1e-8)


def test_parallel_equals_serial(panels_by_year):
    p = panels_by_year[2001]
    assert dea.measure_year(p, workers=4) == dea.measure_year(p)


def test_full_pipeline_is_fast(panels):
    import time

    t0 = time.perf_counter()
    dea.measure_all(panels)
    assert time.perf_counter() - t0 < 1.0


# --- properties over random small panels -------------------------------------

def test_units_invariance():
    rng = np.random.default_rng(11)
    for _ in range(N_RANDOM_PANELS):
        inputs, catch = random_panel(rng)
        before = phis(make_panel(inputs, catch))
        col = int(rng.integers(4))
        scaled = inputs.copy()
        scaled[:, col] *= float(rng.choice([1e-3, 0.37, 12.5, 1e4]))
        after = phis(make_panel(scaled, catch))
        np.testing.assert_allclose(after, before, rtol=1e-9, atol=0)


def test_frontier_dominance():
    rng = np.random.default_rng(12)
    for _ in range(N_RANDOM_PANELS):
        inputs, catch = random_panel(rng)
        a, b = 0, 1
        # make b dominated by a: more of every input, less catch
        inputs[b] = inputs[a] * rng.uniform(1.0, 2.0, size=4)
        catch[b] = catch[a] * rng.uniform(0.3, 0.99)
        t = dea.measure_year(make_panel(inputs, catch))
        assert t.results[b].phi >= t.results[a].phi - 1e-12


def test_adding_dominated_dmu_changes_nothing():
    rng = np.random.default_rng(13)
    for _ in range(N_RANDOM_PANELS):
        inputs, catch = random_panel(rng)
        before = phis(make_panel(inputs, catch))
        k = int(rng.integers(len(catch)))
        extra_in = inputs[k] * rng.uniform(1.0, 3.0, size=4)
        extra_out = catch[k] * rng.uniform(0.1, 1.0)
        after = phis(make_panel(np.vstack([inputs, extra_in]), np.append(catch, extra_out)))
        np.testing.assert_allclose(after[:-1], before, rtol=1e-9, atol=0)


def test_small_panels_match_vertex_enumeration():
    rng = np.random.default_rng(14)
    for _ in range(N_RANDOM_PANELS):
        n = int(rng.integers(1, 5))
        inputs, catch = random_panel(rng, n)
        got = phis(make_panel(inputs, catch))
        for k in range(n):
            assert got[k] == pytest.approx(dea_phi_by_enumeration(inputs, catch, k), rel=1e-7, abs=1e-7)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_capacity_at_least_catch(seed):
    inputs, catch = random_panel(np.random.default_rng(seed))
    for r in dea.measure_year(make_panel(inputs, catch)).results:
        assert r.capacity_output >= r.catch
        assert (r.capacity_output == r.catch) == (r.capacity_utilization == 1.0)


def test_lambda_rows_reference_peers(panels_by_year):
    t = dea.measure_year(panels_by_year[1993])
    rows = dea.lambda_rows([t])
    assert rows and all(row[2] in panels_by_year[1993].provinces for row in rows)
    assert all(float(row[3]) > 0 for row in rows)
