"""Least-squares machinery for the flow-on-price equilibrium regression.

The headline estimator regresses flow deviations on price deviations with a
control-function correction: stage one projects the price deviations on the
instruments, stage two adds the stage-one residual as an extra regressor so
the slope on the price deviations is purged of simultaneity.  Reported
standard errors are conventional OLS standard errors; no generated-regressor
correction is applied (documented limitation).

AIC/BIC use the concentrated-Gaussian convention
``n*ln(SSR/n) + penalty*k`` with ``k`` the number of estimated mean
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels

__all__ = [
    "RegressionError",
    "FitResult",
    "ControlFunctionFit",
    "ResetResult",
    "NormalityResult",
    "ols",
    "control_function_fit",
    "t_confidence_interval",
    "reset_test",
    "jarque_bera",
    "tail_probability",
    "lagged_instruments",
    "fit_to_dict",
    "control_fit_to_dict",
    "render_control_fit_text",
]


class RegressionError(ValueError):
    """Raised for rank deficiency, insufficient sample or invalid inputs."""


@dataclass(frozen=True)
class FitResult:
    """Output of a single least-squares fit.

    Coefficient-aligned arrays follow the order of ``names``.  The design
    matrix and regressand are retained so diagnostic tests can re-fit
    augmented models.
    """

    names: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    conf_intervals: np.ndarray  # shape (k, 2)
    conf_level: float
    r_squared: float
    f_statistic: float
    f_p_value: float
    aic: float
    bic: float
    n: int
    df_residual: int
    residuals: np.ndarray
    fitted: np.ndarray
    regressand: np.ndarray
    design: np.ndarray

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def standard_error(self, name: str) -> float:
        return float(self.standard_errors[self.names.index(name)])


@dataclass(frozen=True)
class ResetResult:
    statistic: float
    p_value: float
    rejected: bool
    alpha: float
    powers: tuple[int, ...]


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    p_value: float
    rejected: bool
    alpha: float
    skewness: float
    kurtosis_excess: float


@dataclass(frozen=True)
class ControlFunctionFit:
    """Two-stage control-function output plus post-hoc diagnostics."""

    second_stage: FitResult
    first_stage: FitResult
    reset: ResetResult | None
    normality: NormalityResult | None

    @property
    def slope(self) -> float:
        return self.second_stage.coefficient("price_dev")

    @property
    def slope_se(self) -> float:
        return self.second_stage.standard_error("price_dev")


def tail_probability(statistic: float, distribution: tuple) -> float:
    """Tail p-value for a test statistic.

    ``distribution`` is one of ``("student_t", df)``, ``("f", d1, d2)``,
    ``("chi_square", k)`` or ``("normal",)``.  Student-t p-values are
    two-sided; F, chi-square and normal are upper-tail.
    """
    if not distribution:
        raise ValueError("empty distribution spec")
    kind, params = distribution[0], distribution[1:]
    statistic = float(statistic)
    if not np.isfinite(statistic):
        raise ValueError("non-finite test statistic")
    if kind == "student_t":
        (df,) = params
        if df < 1:
            raise ValueError(f"invalid df {df}")
        return float(kernels.student_t_two_sided(statistic, float(df)))
    if kind == "f":
        d1, d2 = params
        if d1 < 1 or d2 < 1:
            raise ValueError(f"invalid F dof ({d1}, {d2})")
        return float(kernels.f_upper_tail(statistic, float(d1), float(d2)))
    if kind == "chi_square":
        (k,) = params
        if k < 1:
            raise ValueError(f"invalid chi-square dof {k}")
        return float(kernels.chi_square_upper_tail(statistic, float(k)))
    if kind == "normal":
        if params:
            raise ValueError("normal takes no parameters")
        return float(kernels.normal_upper_tail(statistic))
    raise ValueError(f"unknown distribution {kind!r}")


def t_confidence_interval(coef: float, se: float, df: int, level: float) -> tuple[float, float]:
    """coef +/- t_{(1+level)/2, df} * se."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if se < 0:
        raise ValueError(f"standard error must be >= 0, got {se}")
    q = float(kernels.student_t_quantile(0.5 * (1.0 + level), float(df)))
    return (coef - q * se, coef + q * se)


def _as_design(regressors: Mapping[str, Sequence], include_constant: bool, n: int):
    names = list(regressors)
    cols = []
    for name in names:
        col = np.asarray(regressors[name], dtype=np.float64)
        if col.ndim != 1 or col.shape[0] != n:
            raise RegressionError(f"regressor '{name}' has wrong length")
        cols.append(col)
    if include_constant:
        names.append("constant")
        cols.append(np.ones(n))
    return tuple(names), np.column_stack(cols)


def ols(regressand, regressors: Mapping[str, Sequence], include_constant: bool = True,
        conf_level: float = 0.95) -> FitResult:
    """Ordinary least squares via QR decomposition.

    Parameters
    ----------
    regressand : sequence
        Dependent variable, length n.
    regressors : mapping name -> sequence
        Columns of the design, in report order.  A constant named
        ``"constant"`` is appended last when ``include_constant``.
    conf_level : float
        Level for the per-coefficient Student-t confidence intervals.

    Raises RegressionError on rank deficiency or when n does not exceed the
    number of coefficients.
    """
    y = np.asarray(regressand, dtype=np.float64)
    if y.ndim != 1:
        raise RegressionError("regressand must be 1-d")
    n = y.shape[0]
    names, X = _as_design(regressors, include_constant, n)
    k = X.shape[1]
    if n <= k:
        raise RegressionError(f"n={n} too small for {k} coefficients")

    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    scale = np.max(np.abs(X), axis=0)
    scale[scale == 0.0] = 1.0
    if np.any(diag <= 1e-12 * np.sqrt(n) * scale):
        raise RegressionError("rank-deficient design matrix")
    coef = np.linalg.solve(R, Q.T @ y)

    fitted = X @ coef
    resid = y - fitted
    ssr = float(resid @ resid)
    df_resid = n - k
    sigma2 = ssr / df_resid
    r_inv = np.linalg.solve(R, np.eye(k))
    xtx_inv = r_inv @ r_inv.T
    se = np.sqrt(np.maximum(sigma2 * np.diag(xtx_inv), 0.0))

    t_vals = np.empty(k)
    p_vals = np.empty(k)
    for i in range(k):
        if se[i] > 0.0:
            t_vals[i] = coef[i] / se[i]
            p_vals[i] = tail_probability(t_vals[i], ("student_t", df_resid))
        elif coef[i] == 0.0:
            t_vals[i], p_vals[i] = 0.0, 1.0
        else:
            t_vals[i] = np.inf if coef[i] > 0 else -np.inf
            p_vals[i] = 0.0
    q = float(kernels.student_t_quantile(0.5 * (1.0 + conf_level), float(df_resid)))
    ci = np.column_stack([coef - q * se, coef + q * se])

    if include_constant:
        sst = float(np.sum((y - y.mean()) ** 2))
        n_slopes = k - 1
    else:
        sst = float(y @ y)
        n_slopes = k
    if sst > 0.0:
        r2 = 1.0 - ssr / sst
    else:
        r2 = 0.0
    if n_slopes > 0 and sst > 0.0 and ssr > 0.0:
        f_stat = ((sst - ssr) / n_slopes) / (ssr / df_resid)
        f_p = tail_probability(f_stat, ("f", n_slopes, df_resid))
    elif n_slopes > 0 and sst > 0.0 and ssr == 0.0:
        f_stat, f_p = float("inf"), 0.0
    else:
        f_stat, f_p = 0.0, 1.0

    if ssr > 0.0:
        aic = n * np.log(ssr / n) + 2.0 * k
        bic = n * np.log(ssr / n) + k * np.log(n)
    else:
        aic = bic = float("-inf")

    return FitResult(
        names=names,
        coefficients=coef,
        standard_errors=se,
        t_values=t_vals,
        p_values=p_vals,
        conf_intervals=ci,
        conf_level=conf_level,
        r_squared=float(r2),
        f_statistic=float(f_stat),
        f_p_value=float(f_p),
        aic=float(aic),
        bic=float(bic),
        n=int(n),
        df_residual=int(df_resid),
        residuals=resid,
        fitted=fitted,
        regressand=y,
        design=X,
    )


def lagged_instruments(price_dev, n_lags: int = 4):
    """Default instruments: lags 1..n_lags of the price deviations.

    Returns (instruments dict, row offset).  The usable sample starts at
    ``offset`` (the first n_lags rows have no full lag history), so callers
    must trim every other series by the same offset.
    """
    y = np.asarray(price_dev, dtype=np.float64)
    if n_lags < 1:
        raise RegressionError("n_lags must be >= 1")
    n = y.shape[0]
    if n - n_lags < n_lags + 2:
        raise RegressionError(
            f"sample of {n} too small for {n_lags} price lags as instruments"
        )
    inst = {f"lag{j}": y[n_lags - j : n - j] for j in range(1, n_lags + 1)}
    return inst, n_lags


def control_function_fit(flow_dev, price_dev, instruments: Mapping[str, Sequence],
                         level: float = 0.95, alpha: float = 0.05) -> ControlFunctionFit:
    """Two-stage control-function regression of flow on price deviations.

    Stage 1 regresses the price deviations on the instruments (plus
    constant); stage 2 regresses the flow deviations on the price
    deviations, the stage-1 residual and a constant, in that report order.
    RESET and residual-normality diagnostics run on stage 2 when the sample
    admits them (otherwise the corresponding field is None).
    """
    if not instruments:
        raise RegressionError("instruments must be non-empty")
    x = np.asarray(flow_dev, dtype=np.float64)
    y = np.asarray(price_dev, dtype=np.float64)
    if x.shape != y.shape:
        raise RegressionError("flow and price series must have equal length")
    for name, col in instruments.items():
        if np.asarray(col).shape != y.shape:
            raise RegressionError(f"instrument '{name}' length mismatch")

    first = ols(y, dict(instruments), include_constant=True, conf_level=level)
    second = ols(
        x,
        {"price_dev": y, "control_fn": first.residuals},
        include_constant=True,
        conf_level=level,
    )

    reset: ResetResult | None = None
    normality: NormalityResult | None = None
    if second.n - (len(second.names) + 2) >= 1:
        try:
            reset = reset_test(second, alpha=alpha)
        except RegressionError:
            reset = None
    if second.n >= 8 and float(np.var(second.residuals)) > 0.0:
        normality = jarque_bera(second.residuals, alpha=alpha)
    return ControlFunctionFit(second_stage=second, first_stage=first,
                              reset=reset, normality=normality)


def reset_test(fit: FitResult, powers: Sequence[int] = (2, 3), alpha: float = 0.05) -> ResetResult:
    """Ramsey RESET: F-test of powers of the fitted values as added regressors."""
    powers = tuple(sorted(set(int(p) for p in powers)))
    if not powers or min(powers) < 2:
        raise RegressionError("RESET powers must be integers >= 2")
    n, k = fit.design.shape
    m = len(powers)
    if n - k - m < 1:
        raise RegressionError("sample too small for RESET augmentation")
    aug = {f"x{i}": fit.design[:, i] for i in range(k)}
    for p in powers:
        aug[f"fitted_pow{p}"] = fit.fitted**p
    try:
        full = ols(fit.regressand, aug, include_constant=False)
    except RegressionError as exc:
        raise RegressionError(f"RESET augmentation is rank deficient: {exc}") from exc
    ssr_restricted = float(fit.residuals @ fit.residuals)
    ssr_full = float(full.residuals @ full.residuals)
    df_full = n - k - m
    stat = ((ssr_restricted - ssr_full) / m) / (ssr_full / df_full)
    if not np.isfinite(stat):
        raise RegressionError("degenerate RESET statistic (zero residual variance)")
    stat = max(stat, 0.0)
    p_value = tail_probability(stat, ("f", m, df_full))
    return ResetResult(statistic=float(stat), p_value=float(p_value),
                       rejected=bool(p_value < alpha), alpha=alpha, powers=powers)


def jarque_bera(residuals, alpha: float = 0.05) -> NormalityResult:
    """Jarque-Bera normality test: JB = n/6 (skew^2 + kurtosis_excess^2/4)."""
    e = np.asarray(residuals, dtype=np.float64)
    n = e.shape[0]
    if n < 8:
        raise RegressionError(f"Jarque-Bera needs n >= 8, got {n}")
    e = e - e.mean()
    m2 = float(np.mean(e**2))
    if m2 <= 0.0:
        raise RegressionError("zero residual variance")
    skew = float(np.mean(e**3)) / m2**1.5
    kurt_excess = float(np.mean(e**4)) / m2**2 - 3.0
    stat = n / 6.0 * (skew**2 + 0.25 * kurt_excess**2)
    p_value = tail_probability(stat, ("chi_square", 2))
    return NormalityResult(statistic=float(stat), p_value=float(p_value),
                           rejected=bool(p_value < alpha), alpha=alpha,
                           skewness=skew, kurtosis_excess=kurt_excess)


# ---------------------------------------------------------------------------
# Renderings
# ---------------------------------------------------------------------------


def fit_to_dict(fit: FitResult) -> dict:
    """JSON-ready mapping with the fixed field names."""
    rows = {}
    for i, name in enumerate(fit.names):
        rows[name] = {
            "coef": float(fit.coefficients[i]),
            "std_err": float(fit.standard_errors[i]),
            "t_value": float(fit.t_values[i]),
            "p_value": float(fit.p_values[i]),
            "ci_low": float(fit.conf_intervals[i, 0]),
            "ci_high": float(fit.conf_intervals[i, 1]),
        }
    return {
        "coefficients": rows,
        "conf_level": fit.conf_level,
        "r_squared": fit.r_squared,
        "f_stat": fit.f_statistic,
        "f_p": fit.f_p_value,
        "aic": fit.aic,
        "bic": fit.bic,
        "n_obs": fit.n,
        "df_residual": fit.df_residual,
        "mean_dependent": float(fit.regressand.mean()),
        "sd_dependent": float(fit.regressand.std(ddof=1)) if fit.n > 1 else 0.0,
    }


def control_fit_to_dict(cf: ControlFunctionFit) -> dict:
    out = {
        "second_stage": fit_to_dict(cf.second_stage),
        "first_stage": fit_to_dict(cf.first_stage),
        "diagnostics": {},
    }
    if cf.reset is not None:
        out["diagnostics"]["reset"] = {
            "statistic": cf.reset.statistic,
            "p_value": cf.reset.p_value,
            "rejected": cf.reset.rejected,
            "alpha": cf.reset.alpha,
            "powers": list(cf.reset.powers),
        }
    if cf.normality is not None:
        out["diagnostics"]["jarque_bera"] = {
            "statistic": cf.normality.statistic,
            "p_value": cf.normality.p_value,
            "rejected": cf.normality.rejected,
            "alpha": cf.normality.alpha,
        }
    return out


_ROW_LABELS = {"price_dev": "y^(e)", "control_fn": "Control fn", "constant": "Constant"}


def _stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def _cell(x: float, width: int, prec: int) -> str:
    if not np.isfinite(x):
        return f"{x:>{width}}"
    text = f"{x:.{prec}f}"
    if len(text) > width - 1:
        text = f"{x:.3g}"
    return f"{text:>{width}}"


def render_control_fit_text(cf: ControlFunctionFit) -> str:
    """Plain-text regression table: coefficient rows then summary footer."""
    fit = cf.second_stage
    pct = int(round(fit.conf_level * 100))
    lines = [
        f"{'x^(e)':<12}{'Coef.':>10}{'St.Err.':>10}{'t-value':>10}"
        f"{'p-value':>10}  [{pct}% Conf Interval]   Sig"
    ]
    for i, name in enumerate(fit.names):
        label = _ROW_LABELS.get(name, name)
        lines.append(
            f"{label:<12}{_cell(fit.coefficients[i], 10, 3)}{_cell(fit.standard_errors[i], 10, 3)}"
            f"{_cell(fit.t_values[i], 10, 2)}{_cell(fit.p_values[i], 10, 3)}"
            f"   {_cell(fit.conf_intervals[i, 0], 8, 3)} {_cell(fit.conf_intervals[i, 1], 8, 3)}"
            f"   {_stars(fit.p_values[i])}"
        )
    mean_dep = float(fit.regressand.mean())
    sd_dep = float(fit.regressand.std(ddof=1)) if fit.n > 1 else 0.0
    lines += [
        f"Mean dependent var {_cell(mean_dep, 10, 3)}    SD dependent var  {_cell(sd_dep, 10, 3)}",
        f"R-squared          {_cell(fit.r_squared, 10, 3)}    Number of obs     {fit.n:>10d}",
        f"F-test             {_cell(fit.f_statistic, 10, 3)}    Prob > F          {_cell(fit.f_p_value, 10, 3)}",
        f"Akaike crit. (AIC) {_cell(fit.aic, 10, 3)}    Bayesian crit. (BIC) {_cell(fit.bic, 10, 3)}",
        "*** p<.01, ** p<.05, * p<.1",
    ]
    if cf.reset is not None:
        lines.append(
            f"RESET F = {cf.reset.statistic:.3f} (p = {cf.reset.p_value:.3f})"
            f"{' [reject]' if cf.reset.rejected else ''}"
        )
    if cf.normality is not None:
        lines.append(
            f"Jarque-Bera = {cf.normality.statistic:.3f} (p = {cf.normality.p_value:.3f})"
            f"{' [reject]' if cf.normality.rejected else ''}"
        )
    return "\n".join(lines) + "\n"
