"""Exact (min,plus) network calculus with window-flow-control feedback.

The package is organized bottom-up:

* :mod:`netcalc.upp` — exact arithmetic on ultimately pseudo-periodic
  piecewise-affine functions (the representation everything else uses);
* :mod:`netcalc.curves` — arrival/service curves with kind tracking and the
  per-flow residual constructions;
* :mod:`netcalc.oracle` — grid-sampled trajectory simulators used as an
  independent cross-check of the exact algebra;
* :mod:`netcalc.tandem` — tandem networks, cross-traffic-aware end-to-end
  service curves, delay/backlog bounds;
* :mod:`netcalc.feedback` — window flow control: structure classification,
  open-loop transformation, stability;
* :mod:`netcalc.netfile` — the text formats for networks and curves;
* :mod:`netcalc.cli` — the ``netcalc`` command.
"""

from netcalc.curves import (
    ARRIVAL,
    SERVICE,
    Curve,
    KindError,
    ResidualRefusal,
    concatenate,
    constant_rate,
    output_arrival,
    pure_delay,
    rate_latency,
    residual_strict,
    residual_subadditive,
    token_bucket,
    transmission_delay,
    wfc_curve,
    window_curve,
)
from netcalc.feedback import (
    FeedbackNetwork,
    FeedbackTriple,
    InstabilityReport,
    StructureClass,
    StructureRefused,
    classify_structure,
    feedback_analysis,
    instability_witness,
    is_stable,
    open_loop_transform,
    stability_check,
    throttle_curve,
    throttle_lower_bound,
    window_throttles,
)
from netcalc.tandem import (
    AnalysisRefused,
    AnalysisReport,
    FlowSpec,
    TandemNetwork,
    conventional_delay_closed_form,
    e2e_backlog_bound,
    e2e_delay_bound,
    homogeneous_tandem,
    pmoo_analysis,
    pmoo_closed_form,
    pmoo_curve_numeric,
    sequential_analysis,
    stability_margins,
    unconventional_delay_bound,
)
from netcalc.upp import (
    INF,
    DomainError,
    NetcalcError,
    ResourceError,
    Segment,
    UppFunction,
    add,
    affine,
    all_infinite,
    convolve,
    deconvolve,
    delta,
    horizontal_deviation,
    impulse,
    is_subadditive,
    minimum,
    monotone_minorant,
    monus,
    rate_latency_fn,
    rational,
    subadditive_closure,
    vertical_deviation,
    zero_function,
)

__version__ = "0.1.0"

__all__ = [
    "ARRIVAL",
    "AnalysisRefused",
    "AnalysisReport",
    "Curve",
    "DomainError",
    "FeedbackNetwork",
    "FeedbackTriple",
    "FlowSpec",
    "INF",
    "InstabilityReport",
    "KindError",
    "NetcalcError",
    "ResidualRefusal",
    "ResourceError",
    "SERVICE",
    "Segment",
    "StructureClass",
    "StructureRefused",
    "TandemNetwork",
    "UppFunction",
    "add",
    "affine",
    "all_infinite",
    "classify_structure",
    "concatenate",
    "constant_rate",
    "conventional_delay_closed_form",
    "convolve",
    "deconvolve",
    "delta",
    "e2e_backlog_bound",
    "e2e_delay_bound",
    "feedback_analysis",
    "homogeneous_tandem",
    "horizontal_deviation",
    "impulse",
    "instability_witness",
    "is_stable",
    "is_subadditive",
    "minimum",
    "monotone_minorant",
    "monus",
    "open_loop_transform",
    "output_arrival",
    "pmoo_analysis",
    "pmoo_closed_form",
    "pmoo_curve_numeric",
    "pure_delay",
    "rate_latency",
    "rate_latency_fn",
    "rational",
    "residual_strict",
    "residual_subadditive",
    "sequential_analysis",
    "stability_check",
    "stability_margins",
    "subadditive_closure",
    "throttle_curve",
    "throttle_lower_bound",
    "window_throttles",
    "token_bucket",
    "transmission_delay",
    "unconventional_delay_bound",
    "vertical_deviation",
    "wfc_curve",
    "window_curve",
    "zero_function",
    "__version__",
]
