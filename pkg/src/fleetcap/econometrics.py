"""OLS with a full diagnostic block, Almon distributed lags and the
differenced-capacity utilization model.

Least squares goes through a Householder QR factorisation of the design
matrix (``numpy.linalg.qr``); X'X is never formed or inverted.  Rank is
judged from the diagonal of R.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DataError, RankDeficientError

OUT_UNIT = 1e4  # capacity enters the utilization model in units of 10^4 t

RESTRICTIONS = ("none", "near", "far", "both")

# Coefficients as printed for the capacity/income and utilization/capacity models.
PRINTED_PDL = {"intercept": -4026971.665, "betas": (0.00185, 0.00006, -0.00085, -0.00087)}
PRINTED_COMPOUND = {"c": 0.00835, "b1": -0.00027, "b2": 0.00008}


@dataclass
class RegressionFit:
    names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    prob: np.ndarray
    r_squared: float
    adj_r_squared: float
    se_regression: float
    sum_squared_resid: float
    log_likelihood: float
    durbin_watson: float
    mean_dep: float
    sd_dep: float
    akaike: float
    schwarz: float
    f_statistic: float
    prob_f: float
    n_obs: int
    residuals: np.ndarray
    fitted: np.ndarray
    degenerate: bool = False

    @property
    def k(self) -> int:
        return len(self.coefficients)

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def summary(self) -> dict:
        return {
            "variables": [
                {"name": n, "coefficient": float(c), "std_error": float(s), "t_statistic": float(t),
                 "prob": float(p)}
                for n, c, s, t, p in zip(self.names, self.coefficients, self.std_errors, self.t_stats, self.prob)
            ],
            "r_squared": self.r_squared,
            "adj_r_squared": self.adj_r_squared,
            "se_regression": self.se_regression,
            "sum_squared_resid": self.sum_squared_resid,
            "log_likelihood": self.log_likelihood,
            "durbin_watson": self.durbin_watson,
            "mean_dep": self.mean_dep,
            "sd_dep": self.sd_dep,
            "akaike": self.akaike,
            "schwarz": self.schwarz,
            "f_statistic": self.f_statistic,
            "prob_f": self.prob_f,
            "n_obs": self.n_obs,
            "degenerate": self.degenerate,
        }


def ols(y, X, names: Sequence[str] | None = None) -> RegressionFit:
    """Least squares of ``y`` on ``X``; the first column of ``X`` must be the intercept.

    A perfect fit (SSR numerically zero) is flagged ``degenerate``: the log
    likelihood is +inf, AIC/Schwarz -inf, t-statistics and Durbin-Watson NaN.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DataError(f"shape mismatch: y {y.shape}, X {X.shape}")
    n, k = X.shape
    names = tuple(names) if names is not None else ("C",) + tuple(f"x{i}" for i in range(1, k))
    if len(names) != k:
        raise DataError("names do not match design columns")
    if n <= k:
        raise DataError(f"need more observations than parameters (n={n}, k={k})")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("non-finite values in regression data")

    # column equilibration keeps the rank test meaningful when scales differ wildly
    colscale = np.max(np.abs(X), axis=0)
    colscale[colscale == 0] = 1.0
    Q, R = np.linalg.qr(X / colscale)
    diag = np.abs(np.diag(R))
    tol = max(n, k) * np.finfo(float).eps * (diag.max() if diag.size else 0.0) * 1e3
    if diag.min() <= tol or np.linalg.cond(R) > 1e12:
        _, _, vt = np.linalg.svd(X / colscale)
        null = vt[-1]
        bad = [names[i] for i in range(k) if abs(null[i]) > 0.1]
        raise RankDeficientError(f"design is rank deficient; collinear columns: {', '.join(bad)}", columns=bad)
    qty = Q.T @ y
    beta = np.linalg.solve(R, qty) / colscale
    fitted = X @ beta
    resid = y - fitted
    ssr = float(resid @ resid)
    ybar = float(y.mean())
    tss = float(((y - ybar) ** 2).sum())
    df = n - k

    degenerate = ssr <= (1e3 * np.finfo(float).eps) ** 2 * max(float(y @ y), 1e-300)
    Rinv = np.linalg.solve(R, np.eye(k))
    diag_cov = np.sum(Rinv ** 2, axis=1) / colscale ** 2  # diag((X'X)^-1)
    sd_dep = math.sqrt(tss / (n - 1)) if n > 1 else float("nan")
    r2 = 1.0 - ssr / tss if tss > 0 else float("nan")
    adj = 1.0 - (1.0 - r2) * (n - 1) / df if tss > 0 else float("nan")

    if degenerate:
        se = np.zeros(k)
        t = np.full(k, np.nan)
        prob = np.full(k, np.nan)
        s = 0.0
        ll = math.inf
        aic = sc = -math.inf
        dw = float("nan")
        fstat = math.inf if k > 1 else float("nan")
        prob_f = 0.0 if k > 1 else float("nan")
        r2 = 1.0
        adj = 1.0
    else:
        s2 = ssr / df
        s = math.sqrt(s2)
        se = np.sqrt(s2 * diag_cov)
        t = beta / se
        prob = 2.0 * stats.t.sf(np.abs(t), df)
        ll = -0.5 * n * (1.0 + math.log(2.0 * math.pi) + math.log(ssr / n))
        aic = -2.0 * ll / n + 2.0 * k / n
        sc = -2.0 * ll / n + k * math.log(n) / n
        dw = float(np.sum(np.diff(resid) ** 2) / ssr)
        if k > 1:
            fstat = (r2 / (k - 1)) / ((1.0 - r2) / df)
            prob_f = float(stats.f.sf(fstat, k - 1, df))
        else:
            fstat = prob_f = float("nan")

    return RegressionFit(
        names=names, coefficients=beta, std_errors=se, t_stats=t, prob=prob, r_squared=r2,
        adj_r_squared=adj, se_regression=s, sum_squared_resid=ssr, log_likelihood=ll, durbin_watson=dw,
        mean_dep=ybar, sd_dep=sd_dep, akaike=aic, schwarz=sc, f_statistic=fstat, prob_f=prob_f,
        n_obs=n, residuals=resid, fitted=fitted, degenerate=bool(degenerate),
    )


# ---------------------------------------------------------------------------
# Almon polynomial distributed lag

def pdl_basis(lag_length: int, degree: int, restriction: str = "far") -> np.ndarray:
    """Matrix T with ``beta = T @ params`` for lags 0..L.

    The polynomial in the lag index i is multiplied by ``(i + 1)`` for the near
    restriction (beta(-1) = 0) and by ``(i - L - 1)`` for the far restriction
    (beta(L+1) = 0), which leaves ``degree + 1 - #restrictions`` free params.
    """
    if restriction not in RESTRICTIONS:
        raise DataError(f"unknown endpoint restriction {restriction!r}")
    n_restr = {"none": 0, "near": 1, "far": 1, "both": 2}[restriction]
    free = degree + 1 - n_restr
    if lag_length < 0 or degree < 0 or free <= 0:
        raise DataError(f"degree {degree} with restriction {restriction!r} leaves no free parameters")
    if degree > lag_length:
        raise DataError("polynomial degree cannot exceed the lag length")
    i = np.arange(lag_length + 1, dtype=float)
    factor = np.ones_like(i)
    if restriction in ("near", "both"):
        factor *= i + 1.0
    if restriction in ("far", "both"):
        factor *= i - lag_length - 1.0
    return np.column_stack([factor * i ** p for p in range(free)])


@dataclass
class PdlModel:
    lag_length: int
    poly_degree: int
    restriction: str
    intercept: float
    lag_coefficients: np.ndarray
    pdl_params: np.ndarray
    fit: RegressionFit | None
    sample_years: tuple[int, ...] = ()

    @classmethod
    def printed(cls) -> "PdlModel":
        return cls(3, 2, "far", PRINTED_PDL["intercept"], np.array(PRINTED_PDL["betas"]), np.empty(0), None)


def _lag_sample(y: Mapping[int, float], x: Mapping[int, float], lags: int) -> list[int]:
    return sorted(t for t in y if all((t - l) in x for l in range(lags + 1)))


def fit_pdl(czl: Mapping[int, float], income: Mapping[int, float], lag_length: int = 3,
            poly_degree: int = 2, restriction: str = "far") -> PdlModel:
    """Regress capacity increments on current and lagged income with Almon-restricted lags.

    The sample is every year of ``czl`` for which income is available at all
    lags 0..L.
    """
    T = pdl_basis(lag_length, poly_degree, restriction)
    years = _lag_sample(czl, income, lag_length)
    free = T.shape[1]
    if len(years) <= free + 1:
        raise DataError(f"only {len(years)} usable years for a lag model with {free + 1} parameters")
    lagmat = np.array([[income[t - l] for l in range(lag_length + 1)] for t in years])
    Z = lagmat @ T
    X = np.column_stack([np.ones(len(years)), Z])
    names = ("C",) + tuple(f"PDL{j + 1:02d}" for j in range(free))
    fit = ols([czl[t] for t in years], X, names)
    params = fit.coefficients[1:]
    return PdlModel(lag_length, poly_degree, restriction, float(fit.coefficients[0]), T @ params,
                    params.copy(), fit, tuple(years))


def predict_czl(model: PdlModel, incomes: Sequence[float]) -> float:
    """Capacity increment (t) from incomes ``D_t, D_{t-1}, ..., D_{t-L}`` (yuan)."""
    incomes = np.asarray(incomes, dtype=float)
    if incomes.shape != model.lag_coefficients.shape:
        raise DataError(f"expected {model.lag_coefficients.size} incomes, got {incomes.size}")
    return float(model.intercept + model.lag_coefficients @ incomes)


# ---------------------------------------------------------------------------
# utilization increments on capacity differences

@dataclass
class CompoundDiffModel:
    c: float
    b1: float
    b2: float
    fit: RegressionFit | None
    out_unit: float = OUT_UNIT
    sample_years: tuple[int, ...] = ()
    diff_correlation: float = float("nan")
    level_correlation: float = float("nan")

    @classmethod
    def printed(cls) -> "CompoundDiffModel":
        return cls(PRINTED_COMPOUND["c"], PRINTED_COMPOUND["b1"], PRINTED_COMPOUND["b2"], None)


def fit_compound_diff(utilization: Mapping[int, float], capacity: Mapping[int, float]) -> CompoundDiffModel:
    """Regress G_t - G_{t-1} on OUT_t - OUT_{t-1} and OUT_{t-1} - OUT_{t-2}.

    ``capacity`` is in tons; it is converted to 10^4 t here.
    """
    years = sorted(t for t in utilization
                   if (t - 1) in utilization and all((t - l) in capacity for l in range(3)))
    if len(years) < 4:
        raise DataError(f"only {len(years)} usable years for the utilization model (need 4)")
    out = {t: v / OUT_UNIT for t, v in capacity.items()}
    h = np.array([utilization[t] - utilization[t - 1] for t in years])
    d0 = np.array([out[t] - out[t - 1] for t in years])
    d1 = np.array([out[t - 1] - out[t - 2] for t in years])
    X = np.column_stack([np.ones(len(years)), d0, d1])
    fit = ols(h, X, ("C", "OUT-OUT(-1)", "OUT(-1)-OUT(-2)"))
    lvl = np.array([out[t] for t in years])
    lvl1 = np.array([out[t - 1] for t in years])
    c, b1, b2 = (float(v) for v in fit.coefficients)
    return CompoundDiffModel(c, b1, b2, fit, OUT_UNIT, tuple(years),
                             float(np.corrcoef(d0, d1)[0, 1]), float(np.corrcoef(lvl, lvl1)[0, 1]))


def predict_uzl(model: CompoundDiffModel, out_t: float, out_t1: float, out_t2: float) -> float:
    """Utilization increment from capacities (t) in years t, t-1, t-2."""
    return model.c + model.b1 * (out_t - out_t1) / model.out_unit + model.b2 * (out_t1 - out_t2) / model.out_unit


# ---------------------------------------------------------------------------
# fitting on the national series

def model_years(series) -> list[int]:
    """Years used for estimation: those with recorded income."""
    return [y for y, d in zip(series.years, series.income) if d is not None]


def fit_models(series) -> tuple[PdlModel, CompoundDiffModel]:
    """Fit both lag models on the income-bearing span of a NationalSeries."""
    years = model_years(series)
    if not years:
        raise DataError("national series has no income values")
    sub = series.restrict(range(years[0], years[-1] + 1))
    pdl = fit_pdl(sub.column("capacity_increment"), sub.column("income"))
    cd = fit_compound_diff(sub.column("utilization"), sub.column("capacity"))
    return pdl, cd


# ---------------------------------------------------------------------------
# reports

def _fmt(x: float) -> str:
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return f"{x:.6g}"


def format_fit(fit: RegressionFit, title: str = "", dependent: str = "") -> str:
    lines = []
    if title:
        lines.append(title)
    if dependent:
        lines.append(f"Dependent variable: {dependent}")
    lines.append(f"Included observations: {fit.n_obs}")
    lines.append(f"{'Variable':<18}{'Coefficient':>14}{'Std. Error':>14}{'t-Statistic':>14}{'Prob.':>10}")
    for n, c, s, t, p in zip(fit.names, fit.coefficients, fit.std_errors, fit.t_stats, fit.prob):
        lines.append(f"{n:<18}{_fmt(c):>14}{_fmt(s):>14}{_fmt(t):>14}{p:>10.4f}")
    pairs = [
        ("R-squared", fit.r_squared, "Mean dependent var", fit.mean_dep),
        ("Adjusted R-squared", fit.adj_r_squared, "S.D. dependent var", fit.sd_dep),
        ("S.E. of regression", fit.se_regression, "Akaike info criterion", fit.akaike),
        ("Sum squared resid", fit.sum_squared_resid, "Schwarz criterion", fit.schwarz),
        ("Log likelihood", fit.log_likelihood, "F-statistic", fit.f_statistic),
        ("Durbin-Watson stat", fit.durbin_watson, "Prob(F-statistic)", fit.prob_f),
    ]
    for a, av, b, bv in pairs:
        lines.append(f"{a:<22}{_fmt(av):>14}    {b:<24}{_fmt(bv):>14}")
    if fit.degenerate:
        lines.append("note: perfect fit, likelihood-based diagnostics are not finite")
    return "\n".join(lines) + "\n"


def pdl_report(model: PdlModel) -> dict:
    d = {
        "model": "capacity_increment ~ income distributed lag",
        "lag_length": model.lag_length,
        "poly_degree": model.poly_degree,
        "restriction": model.restriction,
        "intercept": model.intercept,
        "lag_coefficients": [float(b) for b in model.lag_coefficients],
        "sample_years": list(model.sample_years),
    }
    if model.fit is not None:
        d["fit"] = model.fit.summary()
    return d


def compound_report(model: CompoundDiffModel) -> dict:
    d = {
        "model": "utilization_increment ~ capacity differences (10^4 t)",
        "c": model.c, "b1": model.b1, "b2": model.b2,
        "sample_years": list(model.sample_years),
        "diff_correlation": model.diff_correlation,
        "level_correlation": model.level_correlation,
    }
    if model.fit is not None:
        d["fit"] = model.fit.summary()
    return d


def to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        raise TypeError(type(o))

    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return str(o)
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return o

    return json.dumps(clean(obj), indent=2, sort_keys=True, default=default) + "\n"
