"""Numerical engine for the fundamental exterior differential system on tangent sphere bundles."""

import jax

# Every identity is checked at 1e-7 or tighter; float32 cannot get there.
jax.config.update("jax_enable_x64", True)

from sbl.metric_chart import ChartMetric, CurvaturePack, christoffel, curvature_pack, sectional  # noqa: E402
from sbl.catalog import get_metric, METRICS  # noqa: E402

__all__ = [
    "ChartMetric",
    "CurvaturePack",
    "christoffel",
    "curvature_pack",
    "sectional",
    "get_metric",
    "METRICS",
]

__version__ = "0.1.0"
