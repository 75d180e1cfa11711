"""Jet and interval arithmetic kernel."""

from blenderlab.numerics.interval import Box2, Interval, interval_image
from blenderlab.numerics.jet import (
    Jet,
    coefficient_count,
    invert_series,
    jacobian,
    jet_arith,
    jet_compose,
    multi_indices,
    substitute,
)

__all__ = [
    "Box2",
    "Interval",
    "Jet",
    "coefficient_count",
    "interval_image",
    "invert_series",
    "jacobian",
    "jet_arith",
    "jet_compose",
    "multi_indices",
    "substitute",
]
