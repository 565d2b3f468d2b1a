"""Hybrid Pedestrian Simulator - Routing"""

from .destinations import Route, assign_destination, assign_destinations
from .visibility import VisibilityGraph, build_visibility_graph, path_length, shortest_path

__all__ = [
    "Route",
    "VisibilityGraph",
    "assign_destination",
    "assign_destinations",
    "build_visibility_graph",
    "path_length",
    "shortest_path",
]
