"""Regression-ready covariates from a bucketed session.

Each row pairs the response (the bucket's mid-price change, half-ticks)
with contemporaneous flows, static book metrics captured at the bucket
open, and lagged history. Rows are dropped when any referenced lag is
unavailable, when the bucket has zero duration (a single trade filled it
whole), or when a covariate is undefined (e.g. cancellation proportion
with no additions). Limit flows enter normalized by the bucket volume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .buckets import BucketRecord, FlowSeries, vpin
from .errors import TooFewBuckets
from .models import (
    ModelFit,
    ScarceLabels,
    netliq_beta,
    ols_fit,
    scarce_liquidity_labels,
    spline_gam_fit,
)

__all__ = [
    "FeatureMatrix",
    "build_feature_matrix",
    "write_features_csv",
    "read_features_csv",
    "fit_ti_response",
    "fit_netliq_model",
    "scarce_from_series",
    "netliq_from_series",
    "DEFAULT_LAGS",
]

DEFAULT_LAGS = (1, 5, 10, 20)
SHORT_WINDOW = 3    # trailing averages of TI and BI

NS_PER_SEC = 1_000_000_000


@dataclass
class FeatureMatrix:
    """Dense covariate matrix plus the response and row provenance."""

    X: np.ndarray
    y: np.ndarray
    columns: list[str]
    bucket_index: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.columns.index(name)]


def _static_columns(rec: BucketRecord) -> dict[str, float] | None:
    m = rec.open_metrics
    if m is None:
        return None
    return {
        "bi": m.bi,
        "d1_bid": float(m.depth_bid[0]),
        "d1_ask": float(m.depth_ask[0]),
        "d2_bid": float(m.depth_bid[1]),
        "d2_ask": float(m.depth_ask[1]),
        "pi_bid": float(m.pi_bid),
        "pi_ask": float(m.pi_ask),
        "slope_bid": m.slope_bid,
        "slope_ask": m.slope_ask,
    }


def build_feature_matrix(
    series: FlowSeries,
    lags: Sequence[int] = DEFAULT_LAGS,
    vpin_window: int | None = 20,
) -> FeatureMatrix:
    """Assemble the covariate matrix for response delta_p.

    Static metrics are the ones captured at each bucket's open; when the
    series carries no open metrics (bucket-level synthetic data) those
    columns are omitted rather than dropping every row. Lags are aligned
    by bucket index; the open-to-open mid trend spans the longest lag (20
    with the default lag set). vpin_window=None omits the VPIN column (it
    otherwise forces rows to start at max(lags, vpin_window))."""
    records = series.records
    lags = sorted(set(int(l) for l in lags))
    if not lags or lags[0] < 1:
        raise ValueError("lags must be positive")
    has_static = any(r.open_metrics is not None for r in records)
    trend_span = max(lags)
    start = max(max(lags), SHORT_WINDOW)
    if vpin_window is not None:
        start = max(start, vpin_window)
    if len(records) <= start:
        raise TooFewBuckets(
            f"{len(records)} buckets, need more than {start}")

    V = float(series.session.bucket_volume)
    ti = np.array([r.ti for r in records])
    vl_bid = np.array([r.vl_bid for r in records]) / V
    vl_ask = np.array([r.vl_ask for r in records]) / V
    dp = np.array([float(r.delta_p) for r in records])
    vpin_trace = vpin(series, vpin_window) if vpin_window is not None else None

    columns: list[str] | None = None
    rows: list[list[float]] = []
    y: list[float] = []
    kept: list[int] = []

    for k in range(start, len(records)):
        rec = records[k]
        if rec.zero_duration:
            continue
        if rec.pc_bid is None or rec.pc_ask is None:
            continue

        feats: dict[str, float] = {
            "ti": ti[k],
            "vl_bid": vl_bid[k],
            "vl_ask": vl_ask[k],
            "pc_bid": rec.pc_bid,
            "pc_ask": rec.pc_ask,
        }
        if has_static:
            static = _static_columns(rec)
            opens = [records[j].open_metrics
                     for j in range(k - SHORT_WINDOW, k + 1)]
            trend_from = records[k - trend_span].open_metrics
            if static is None or any(m is None for m in opens) \
                    or trend_from is None:
                continue
            feats.update(static)
            feats["bi_ma3"] = float(np.mean([m.bi for m in opens]))
            feats[f"mid_trend{trend_span}"] = float(
                rec.open_metrics.mid - trend_from.mid)
        feats["tod"] = rec.t_open / NS_PER_SEC / 3600.0
        feats["duration"] = rec.duration / NS_PER_SEC
        for lag in lags:
            feats[f"ti_lag{lag}"] = ti[k - lag]
            feats[f"vl_bid_lag{lag}"] = vl_bid[k - lag]
            feats[f"vl_ask_lag{lag}"] = vl_ask[k - lag]
            feats[f"dp_lag{lag}"] = dp[k - lag]
        feats["ti_ma3"] = float(np.mean(ti[k - SHORT_WINDOW:k]))
        feats["tima"] = rec.tima
        if vpin_trace is not None:
            feats["vpin"] = float(vpin_trace[k])

        vals = list(feats.values())
        if not all(math.isfinite(v) for v in vals):
            continue
        if columns is None:
            columns = list(feats.keys())
        rows.append(vals)
        y.append(dp[k])
        kept.append(k)

    if not rows:
        raise TooFewBuckets("no usable rows after alignment and exclusions")
    return FeatureMatrix(
        X=np.array(rows, dtype=np.float64),
        y=np.array(y, dtype=np.float64),
        columns=columns,
        bucket_index=np.array(kept, dtype=np.int64),
    )


def write_features_csv(fm: FeatureMatrix, out) -> None:
    out.write("# response dp is the bucket mid change in half-ticks; "
              "vl_* normalized by bucket volume\n")
    out.write(",".join(["bucket_index", "dp"] + fm.columns) + "\n")
    for i in range(len(fm.y)):
        vals = [str(int(fm.bucket_index[i])), repr(float(fm.y[i]))]
        vals += [repr(float(v)) for v in fm.X[i]]
        out.write(",".join(vals) + "\n")


def read_features_csv(text: str) -> FeatureMatrix:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise TooFewBuckets("empty feature file")
    header = lines[0].split(",")
    if header[:2] != ["bucket_index", "dp"]:
        raise TooFewBuckets("not a feature CSV (missing bucket_index,dp header)")
    columns = header[2:]
    idx, y, rows = [], [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        idx.append(int(parts[0]))
        y.append(float(parts[1]))
        rows.append([float(v) for v in parts[2:]])
    return FeatureMatrix(X=np.array(rows), y=np.array(y), columns=columns,
                         bucket_index=np.array(idx, dtype=np.int64))


def _eligible(series: FlowSeries) -> list[BucketRecord]:
    # zero-duration buckets are excluded from every fit
    recs = [r for r in series.records if not r.zero_duration]
    if len(recs) < 3:
        raise TooFewBuckets(f"{len(recs)} usable buckets")
    return recs


def fit_ti_response(series: FlowSeries, y_column: str = "dp",
                    knots: int = 10) -> tuple[ModelFit, np.ndarray]:
    """Penalized-spline fit of a bucket quantity against trade imbalance.

    y_column is "dp" for the price-change link or "vl_bid"/"vl_ask" for
    the one-sided limit-flow response curves (normalized by V). Returns
    the fit and the bucket indices behind each residual.
    """
    recs = _eligible(series)
    x = np.array([r.ti for r in recs])
    V = float(series.session.bucket_volume)
    if y_column == "dp":
        y = np.array([float(r.delta_p) for r in recs])
    elif y_column == "vl_bid":
        y = np.array([r.vl_bid for r in recs]) / V
    elif y_column == "vl_ask":
        y = np.array([r.vl_ask for r in recs]) / V
    else:
        raise ValueError(f"unknown response {y_column!r}")
    fit = spline_gam_fit(x, y, knots=knots)
    return fit, np.array([r.index for r in recs], dtype=np.int64)


def fit_netliq_model(series: FlowSeries) -> ModelFit:
    """Linear price-change model on trade imbalance and net limit flow:
    dp ~ intercept + TI + NL with NL = (VL_bid - VL_ask) / V."""
    recs = _eligible(series)
    V = float(series.session.bucket_volume)
    ti = np.array([r.ti for r in recs])
    nl = np.array([(r.vl_bid - r.vl_ask) for r in recs]) / V
    dp = np.array([float(r.delta_p) for r in recs])
    return ols_fit(np.column_stack([ti, nl]), dp, intercept=True,
                   names=["TI", "NL"])


def scarce_from_series(series: FlowSeries, multiplier: float = 1.5,
                       knots: int = 10) -> tuple[ScarceLabels, np.ndarray, ModelFit]:
    """Scarce-liquidity labels from the TI-response residuals.

    Returns (labels, bucket indices, the underlying spline fit). The
    labels align with the returned indices, one entry per non-degenerate
    bucket.
    """
    fit, indices = fit_ti_response(series, "dp", knots=knots)
    labels = scarce_liquidity_labels(fit.residuals, multiplier,
                                     source="spline dp~g(ti)")
    return labels, indices, fit


def netliq_from_series(series: FlowSeries) -> tuple[float, ModelFit]:
    """Convenience: fit the linear model and return (beta, fit)."""
    fit = fit_netliq_model(series)
    return netliq_beta(fit), fit
