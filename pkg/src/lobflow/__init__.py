"""Limit order book replay, executed-volume bucketing, and meso-scale
liquidity statistics."""

from .book import BookState, Fill, Snapshot, replay, seed_book
from .buckets import (
    BucketRecord,
    FlowSeries,
    TimeFlowGrid,
    TradeTape,
    accumulate_touch_flow,
    bucketize,
    bucketize_session,
    read_bucket_csv,
    rolling_flow_correlation,
    tima_update,
    time_flow_grid,
    toxicity_correlation,
    vpin,
    write_bucket_csv,
)
from .errors import (
    ConfigError,
    DataError,
    LobflowError,
    NumericalError,
)
from .features import (
    FeatureMatrix,
    build_feature_matrix,
    fit_netliq_model,
    fit_ti_response,
    netliq_from_series,
    read_features_csv,
    scarce_from_series,
    write_features_csv,
)
from .messages import (
    Kind,
    Message,
    SessionConfig,
    SessionSlice,
    Side,
    filter_session,
    parse_stream,
    recombine_market_orders,
    sort_by_ts,
    write_csv,
    write_ndjson,
)
from .metrics import (
    StaticMetrics,
    book_imbalance,
    compute_static_metrics,
    cumulative_depth,
    execution_cost_PI,
    impact_slope,
    mid_and_spread,
)
from .models import (
    ModelFit,
    ScarceLabels,
    acf,
    logistic_fit,
    netliq_beta,
    netliq_series,
    ols_fit,
    r_squared,
    scarce_liquidity_labels,
    spline_gam_fit,
)
from .synth import SynthConfig, generate_session, sample_linear_buckets

__version__ = "0.1.0"
