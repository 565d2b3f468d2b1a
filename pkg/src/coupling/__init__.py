"""Hybrid Pedestrian Simulator - Model Coupling"""

from .clock import AlignedSchedule, ContinuousStep, DiscreteStep, TransformNow, residual_gap, steps_in_frame
from .density import DensityField
from .transition import TransformReport, propagation_segment, transform, transform_velocity_to_discrete
from .zoom import ZoomController, ring_density, size_zone, zoom_in_scan, zoom_out_scan

__all__ = [
    "AlignedSchedule",
    "ContinuousStep",
    "DiscreteStep",
    "TransformNow",
    "residual_gap",
    "steps_in_frame",
    "DensityField",
    "TransformReport",
    "propagation_segment",
    "transform",
    "transform_velocity_to_discrete",
    "ZoomController",
    "ring_density",
    "size_zone",
    "zoom_in_scan",
    "zoom_out_scan",
]
