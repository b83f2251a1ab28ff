import math

import numpy as np
import pytest

from fleetcap import econometrics as eco
from fleetcap import panel_data as pdata

# criterion -> list of (check label, passed, detail)
ACCEPTANCE = {}


def record_criterion(criterion, label, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[criterion]
        failed = [f"{label} ({detail})" if detail else label for label, ok, detail in checks if not ok]
        n_ok = len(checks) - len(failed)
        status = "FAIL" if failed else "PASS"
        line = f"[{status}] {criterion}: {n_ok}/{len(checks)} checks"
        if failed:
            line += "; failing: " + "; ".join(failed)
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def panels():
    return pdata.load_bundled_panel()


@pytest.fixture(scope="session")
def panels_by_year(panels):
    return {p.year: p for p in panels}


@pytest.fixture(scope="session")
def national():
    return pdata.load_bundled_national()


@pytest.fixture(scope="session")
def reference():
    return pdata.load_reference()


@pytest.fixture(scope="session")
def models(national):
    return eco.fit_models(national)


def assert_fit_identities(fit, X=None, y=None):
    """Algebraic identities every non-degenerate RegressionFit must satisfy."""
    n, k = fit.n_obs, fit.k
    np.testing.assert_allclose(fit.t_stats, fit.coefficients / fit.std_errors, rtol=1e-12)
    assert math.isclose(fit.se_regression ** 2 * (n - k), fit.sum_squared_resid, rel_tol=1e-10)
    ll = -(n / 2) * (1 + math.log(2 * math.pi) + math.log(fit.sum_squared_resid / n))
    assert math.isclose(fit.log_likelihood, ll, rel_tol=1e-12)
    assert math.isclose(fit.akaike, -2 * ll / n + 2 * k / n, rel_tol=1e-12)
    assert math.isclose(fit.schwarz, -2 * ll / n + k * math.log(n) / n, rel_tol=1e-12)
    e = fit.residuals
    assert math.isclose(fit.durbin_watson, np.sum(np.diff(e) ** 2) / np.sum(e ** 2), rel_tol=1e-12)
    assert math.isclose(fit.sum_squared_resid, float(e @ e), rel_tol=1e-12)
    if X is not None:
        X = np.asarray(X, dtype=float)
        # residuals orthogonal to each column, relative to column and residual size
        scale = np.linalg.norm(X, axis=0) * max(np.linalg.norm(e), 1e-300)
        assert np.all(np.abs(X.T @ e) <= 1e-6 * scale)
    if y is not None:
        np.testing.assert_allclose(fit.fitted + fit.residuals, y, rtol=1e-12, atol=1e-9 * np.max(np.abs(y)))
