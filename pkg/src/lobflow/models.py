"""Regression machinery: OLS, penalized-spline smoother, logistic fits,
scarce-liquidity labelling, and time-series diagnostics.

Everything here is a pure function of its inputs; fits never mutate the
flow series they were built from. Half-tick integer price changes become
floats at this boundary and nowhere earlier.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import BSpline

from .errors import (
    DegenerateAlpha1,
    DidNotConverge,
    DimensionMismatch,
    NonFiniteInput,
    RankDeficient,
    SeriesTooShort,
    SingleClass,
    TooFewPoints,
    ZeroVariance,
    ZeroVarianceResiduals,
)

__all__ = [
    "ModelFit",
    "ScarceLabels",
    "ols_fit",
    "spline_gam_fit",
    "netliq_beta",
    "netliq_series",
    "scarce_liquidity_labels",
    "logistic_fit",
    "acf",
    "r_squared",
    "CALIBRATION_CUTS",
]


@dataclass
class ModelFit:
    """A fitted model with residuals and goodness-of-fit.

    kind is OLS, SPLINE_GAM, or LOGISTIC. coef/names describe the linear
    coefficients (OLS, logistic) or the spline basis weights. For OLS r2
    and std_errors are populated; for the spline additionally the knot
    vector and selected penalty; for logistic the in-sample probabilities,
    deviance and the Low/Med/High calibration table.
    """

    kind: str
    coef: np.ndarray
    names: list[str]
    residuals: np.ndarray
    r2: float | None = None
    std_errors: np.ndarray | None = None
    # spline extras
    knots: np.ndarray | None = None
    penalty: float | None = None
    gcv: float | None = None
    # logistic extras
    probabilities: np.ndarray | None = None
    deviance: float | None = None
    calibration: dict | None = None
    n_iter: int | None = None
    _predict: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, repr=False)

    def predict(self, x: np.ndarray) -> np.ndarray:
        if self._predict is None:
            raise ValueError(f"{self.kind} fit carries no predictor")
        return self._predict(np.asarray(x, dtype=np.float64))

    def coefficient(self, name: str) -> float:
        try:
            return float(self.coef[self.names.index(name)])
        except ValueError:
            raise KeyError(name)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return X


def ols_fit(X, y, intercept: bool = True,
            names: Sequence[str] | None = None) -> ModelFit:
    """Ordinary least squares via QR, with standard errors and R^2.

    R^2 is always computed against the centered total sum of squares.
    Raises RankDeficient when the (augmented) design is singular and
    DimensionMismatch on incompatible shapes.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X {X.shape} vs y {y.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("design or response contains non-finite values")

    if names is None:
        names = [f"x{i}" for i in range(X.shape[1])]
    names = list(names)
    if intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
        names = ["intercept"] + names
    n, p = X.shape
    if n <= p:
        raise RankDeficient(f"{n} rows for {p} columns")

    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if np.any(diag <= 1e-10 * max(diag.max(), 1.0)):
        raise RankDeficient("design matrix is rank deficient")
    coef = np.linalg.solve(r, q.T @ y)
    fitted = X @ coef
    resid = y - fitted

    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else np.nan)

    sigma2 = rss / (n - p)
    rinv = np.linalg.solve(r, np.eye(p))
    se = np.sqrt(sigma2 * np.sum(rinv * rinv, axis=1))

    def predict(xnew: np.ndarray) -> np.ndarray:
        xnew = _as_matrix(xnew)
        if intercept:
            xnew = np.column_stack([np.ones(xnew.shape[0]), xnew])
        return xnew @ coef

    return ModelFit(kind="OLS", coef=coef, names=names, residuals=resid,
                    r2=r2, std_errors=se, _predict=predict)


DEFAULT_LAMBDA_GRID = np.logspace(-4, 4, 13)


def _uniform_bspline_knots(n_interior: int) -> np.ndarray:
    # evenly spaced knots over [-1, 1], extended by three spacings beyond
    # each end so the difference penalty's null space contains exact linears
    h = 2.0 / (n_interior + 1)
    return -1.0 + h * np.arange(-3, n_interior + 5)


def spline_gam_fit(x, y, knots: int = 10, lambda_grid=None) -> ModelFit:
    """Cubic penalized regression spline of y on x over [-1, 1].

    The basis is a cubic B-spline on `knots` equally spaced interior
    knots; the roughness penalty is the squared second difference of the
    basis coefficients, with the penalty weight chosen by generalized
    cross-validation over a logarithmic grid. Constants and straight lines
    lie in the penalty null space and are reproduced exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch(f"x {x.shape} vs y {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("x or y contains non-finite values")
    n = x.size
    if n < 10 * knots:
        raise TooFewPoints(f"{n} points for {knots} knots (need >= {10 * knots})")
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise NonFiniteInput("x must lie in [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    if lambda_grid is None:
        lambda_grid = DEFAULT_LAMBDA_GRID

    t = _uniform_bspline_knots(knots)
    m = len(t) - 4
    B = BSpline.design_matrix(x, t, 3).toarray()
    D2 = np.diff(np.eye(m), n=2, axis=0)
    P = D2.T @ D2
    BtB = B.T @ B
    Bty = B.T @ y

    best = None
    for lam in lambda_grid:
        A = BtB + lam * P
        try:
            coef = np.linalg.solve(A, Bty)
            edf = float(np.trace(np.linalg.solve(A, BtB)))
        except np.linalg.LinAlgError:
            continue
        resid = y - B @ coef
        rss = float(resid @ resid)
        denom = n - edf
        if denom <= 0:
            continue
        gcv = n * rss / denom ** 2
        if best is None or gcv < best[0]:
            best = (gcv, float(lam), coef, resid)
    if best is None:
        raise RankDeficient("spline system singular for every penalty")
    gcv, lam, coef, resid = best

    spline = BSpline(t, coef, 3, extrapolate=True)
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    return ModelFit(kind="SPLINE_GAM", coef=coef,
                    names=[f"b{i}" for i in range(m)],
                    residuals=resid,
                    r2=1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else np.nan),
                    knots=t, penalty=lam, gcv=gcv,
                    _predict=lambda xnew: spline(xnew))


def netliq_beta(fit: ModelFit, ti_name: str = "TI", nl_name: str = "NL") -> float:
    """Relative price impact of touch limit orders vs trades: the ratio of
    the net-limit-flow coefficient to the trade-imbalance coefficient."""
    try:
        a1 = fit.coefficient(ti_name)
        a2 = fit.coefficient(nl_name)
    except KeyError as exc:
        raise DimensionMismatch(f"fit lacks coefficient {exc}")
    if abs(a1) < 1e-12:
        raise DegenerateAlpha1("trade-imbalance coefficient is zero")
    return a2 / a1


def netliq_series(ti: np.ndarray, nl: np.ndarray, beta: float) -> np.ndarray:
    """Weighted flow combination TI + beta * normalized net limit flow."""
    return np.asarray(ti, dtype=np.float64) + beta * np.asarray(nl, dtype=np.float64)


@dataclass(frozen=True)
class ScarceLabels:
    """Per-bucket one-sided scarce-liquidity indicators.

    A bucket is scarce on the ask side when the price-change residual
    exceeds +threshold, on the bid side below -threshold; at most one side
    fires per bucket. threshold = multiplier * StDev(residuals).
    """

    sl_ask: np.ndarray
    sl_bid: np.ndarray
    threshold: float
    multiplier: float
    source: str

    @property
    def freq_ask(self) -> float:
        return float(np.mean(self.sl_ask))

    @property
    def freq_bid(self) -> float:
        return float(np.mean(self.sl_bid))


def scarce_liquidity_labels(residuals, multiplier: float = 1.5,
                            source: str = "") -> ScarceLabels:
    """Label buckets whose price move was abnormally large for their trade
    imbalance, per side, from fit residuals."""
    resid = np.asarray(residuals, dtype=np.float64)
    if not np.all(np.isfinite(resid)):
        raise NonFiniteInput("residuals contain non-finite values")
    if multiplier <= 0:
        raise ValueError("multiplier must be positive")
    sd = float(np.std(resid, ddof=1)) if resid.size > 1 else 0.0
    if sd == 0.0:
        raise ZeroVarianceResiduals("residuals have zero variance")
    thr = multiplier * sd
    return ScarceLabels(
        sl_ask=(resid >= thr).astype(np.int8),
        sl_bid=(resid <= -thr).astype(np.int8),
        threshold=thr,
        multiplier=multiplier,
        source=source,
    )


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    # exp overflow for very negative eta still yields the right limit (0)
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-eta))


CALIBRATION_CUTS = (0.1, 0.5)  # Low < 0.1 <= Med < 0.5 <= High


def _calibration_table(prob: np.ndarray, y: np.ndarray) -> dict:
    lo, hi = CALIBRATION_CUTS
    bins = {"low": prob < lo, "med": (prob >= lo) & (prob < hi),
            "high": prob >= hi}
    n = len(y)
    table = {}
    for name, mask in bins.items():
        table[f"no_sl_{name}"] = 100.0 * float(np.sum(mask & (y == 0))) / n
        table[f"sl_{name}"] = 100.0 * float(np.sum(mask & (y == 1))) / n
    return table


def logistic_fit(X, y, ridge: float = 1e-6, intercept: bool = True,
                 names: Sequence[str] | None = None,
                 max_iter: int = 100, tol: float = 1e-8) -> ModelFit:
    """Logistic regression by iteratively reweighted least squares.

    A small ridge penalty (default 1e-6) keeps the problem strictly convex
    so perfectly separable data still converges to a finite optimum; pass
    ridge=0 for the pure MLE (which raises DidNotConverge under
    separation). Convergence requires the largest coefficient step to drop
    below `tol` within `max_iter` Newton iterations; steps are halved when
    they fail to decrease the penalized deviance.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X {X.shape} vs y {y.shape}")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    if y.min() == y.max():
        raise SingleClass("labels contain a single class")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("design contains non-finite values")

    if names is None:
        names = [f"x{i}" for i in range(X.shape[1])]
    names = list(names)
    if intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
        names = ["intercept"] + names
    n, p = X.shape

    def penalized_deviance(w: np.ndarray) -> float:
        eta = X @ w
        # -2 log-likelihood, numerically stable via logaddexp
        nll = float(np.sum(np.logaddexp(0.0, eta) - y * eta))
        return 2.0 * nll + ridge * float(w @ w)

    w = np.zeros(p)
    obj = penalized_deviance(w)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = X @ w
        prob = _sigmoid(eta)
        grad = X.T @ (y - prob) - ridge * w
        weights = prob * (1.0 - prob)
        H = (X.T * weights) @ X + ridge * np.eye(p)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            raise DidNotConverge("IRLS system became singular")
        # step halving keeps the penalized deviance monotone
        scale = 1.0
        for _ in range(30):
            cand = w + scale * step
            cand_obj = penalized_deviance(cand)
            if cand_obj <= obj + 1e-12:
                break
            scale *= 0.5
        w = w + scale * step
        obj = penalized_deviance(w)
        if np.max(np.abs(scale * step)) < tol:
            converged = True
            break
    if not converged:
        raise DidNotConverge(f"IRLS did not converge in {max_iter} iterations")

    eta = X @ w
    prob = _sigmoid(eta)
    weights = prob * (1.0 - prob)
    H = (X.T * weights) @ X + ridge * np.eye(p)
    try:
        se = np.sqrt(np.diag(np.linalg.inv(H)))
    except np.linalg.LinAlgError:
        se = np.full(p, np.nan)
    p_clip = np.clip(prob, 1e-12, 1.0 - 1e-12)
    deviance = -2.0 * float(np.sum(y * np.log(p_clip)
                                   + (1.0 - y) * np.log(1.0 - p_clip)))

    def predict(xnew: np.ndarray) -> np.ndarray:
        xnew = _as_matrix(xnew)
        if intercept:
            xnew = np.column_stack([np.ones(xnew.shape[0]), xnew])
        return _sigmoid(xnew @ w)

    return ModelFit(kind="LOGISTIC", coef=w, names=names,
                    residuals=y - prob, std_errors=se,
                    probabilities=prob, deviance=deviance,
                    calibration=_calibration_table(prob, y), n_iter=it,
                    _predict=predict)


def acf(x, max_lag: int = 20) -> tuple[np.ndarray, np.ndarray, float]:
    """Sample autocorrelations r_1..r_max_lag with the +-1.96/sqrt(n) band.

    Returns (lags, values, band). Raises SeriesTooShort when n <= max_lag+1
    and ZeroVariance for constant series.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if n <= max_lag + 1:
        raise SeriesTooShort(f"n={n} too short for {max_lag} lags")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("series contains non-finite values")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise ZeroVariance("series is constant")
    vals = np.empty(max_lag)
    for h in range(1, max_lag + 1):
        vals[h - 1] = float(xc[:-h] @ xc[h:]) / denom
    band = 1.96 / float(np.sqrt(n))
    return np.arange(1, max_lag + 1), vals, band


def r_squared(y, y_hat) -> float:
    """1 - SS_res / SS_tot with the centered total sum of squares."""
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise DimensionMismatch(f"y {y.shape} vs y_hat {y_hat.shape}")
    tss = float(np.sum((y - y.mean()) ** 2))
    if tss == 0.0:
        raise ZeroVariance("response is constant")
    rss = float(np.sum((y - y_hat) ** 2))
    return 1.0 - rss / tss
