"""Polynomial networks grown with a projection learning rule."""

from ._core import (
    DataError,
    DegenerateDesignError,
    Error,
    GrowthFailure,
    InputShapeError,
    InvalidArgument,
    ParseError,
    PolyNetwork,
    RunFailure,
    UndefinedMetric,
    band_power,
    band_preset,
    confusion,
    default_F,
    eval_transfer,
    exterior_criterion,
    extract_band_features,
    fit_least_squares,
    fit_projection,
    gen_dataset,
    grow,
    neuron_task,
    paper_alzheimer_model,
    paper_sleep_model,
    performance,
    run_cli,
    segment_count,
    sensitivity,
    specificity,
    summarize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
