"""
Visibility Graph Routing
========================
Static visibility graph over the scenario layout and shortest waypoint paths.

Nodes are obstacle corners pushed outward by the inflation distance plus the
centroids of all origins and destinations. Two nodes are joined when the
segment between them keeps at least the inflation distance to every obstacle
and stays inside the scenario bounds.
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import shapely

from ..geometry import EPS, Vec2
from ..utils.errors import RoutingError
from ..utils.logger import get_logger

logger = get_logger(__name__)

# Extra outward offset of corner nodes so that node-to-node edges along an
# obstacle side keep the full inflation clearance
NODE_MARGIN = 1e-3


class VisibilityGraph:
    """Immutable visibility graph with cached shortest-path trees."""

    def __init__(
        self,
        positions: np.ndarray,
        labels: Sequence[str],
        graph: nx.Graph,
        obstacles: shapely.Geometry,
        bounds: shapely.Geometry,
        inflation: float,
    ):
        self.positions = positions
        self.labels = list(labels)
        self.graph = graph
        self.obstacles = obstacles
        self.bounds = bounds
        self.inflation = inflation
        self._trees: Dict[int, Tuple[Dict[int, float], Dict[int, List[int]]]] = {}

    @property
    def node_count(self) -> int:
        return len(self.positions)

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def node_of(self, label: str) -> int:
        return self.labels.index(label)

    def node_position(self, node: int) -> Vec2:
        return Vec2(float(self.positions[node, 0]), float(self.positions[node, 1]))

    def clear_segments(
        self, start: np.ndarray, ends: np.ndarray, clearance: Optional[Union[float, np.ndarray]] = None
    ) -> np.ndarray:
        """
        Which segments start -> ends[k] keep the clearance and stay in bounds.

        Args:
            start: (2,) start point
            ends: (k, 2) end points
            clearance: Required obstacle distance, scalar or per end (defaults to the inflation)

        Returns:
            Boolean array of length k
        """
        clearance = self.inflation if clearance is None else clearance
        ends = np.asarray(ends, dtype=float).reshape(-1, 2)
        if len(ends) == 0:
            return np.zeros(0, dtype=bool)
        coords = np.stack((np.broadcast_to(start, ends.shape), ends), axis=1)
        lines = shapely.linestrings(coords)
        ok = shapely.covers(self.bounds, lines)
        if not self.obstacles.is_empty:
            ok &= shapely.distance(lines, self.obstacles) >= clearance - 1e-9
        return ok

    def endpoint_clearance(self, p: Vec2) -> float:
        """Clearance used for segments leaving p (capped by p's own obstacle distance)."""
        if self.obstacles.is_empty:
            return self.inflation
        own = float(shapely.distance(shapely.Point(p.x, p.y), self.obstacles))
        return min(self.inflation, max(own - EPS, 0.0))

    def _tree(self, target: int) -> Tuple[Dict[int, float], Dict[int, List[int]]]:
        if target not in self._trees:
            self._trees[target] = nx.single_source_dijkstra(self.graph, target, weight="weight")
        return self._trees[target]

    def shortest_path(self, start: Vec2, end: Vec2) -> List[Vec2]:
        """
        Shortest waypoint path from start to end.

        Returns:
            Waypoints beginning with start and ending with end

        Raises:
            RoutingError: If end cannot be reached from start
        """
        if start.distance_to(end) < EPS:
            return [start]

        a, b = start.as_array(), end.as_array()
        clearance = min(self.endpoint_clearance(start), self.endpoint_clearance(end))
        if self.clear_segments(a, b[None, :], clearance)[0]:
            return [start, end]

        from_start = np.nonzero(
            self.clear_segments(a, self.positions, self.endpoint_clearance(start))
        )[0]
        on_node = np.nonzero(np.hypot(*(self.positions - b).T) < EPS)[0]
        if len(on_node):
            to_end = on_node[:1]
        else:
            to_end = np.nonzero(
                self.clear_segments(b, self.positions, self.endpoint_clearance(end))
            )[0]
        if len(from_start) == 0 or len(to_end) == 0:
            raise RoutingError(f"No visible graph node from {start.as_tuple()} or {end.as_tuple()}")

        best_length, best_nodes = np.inf, None
        for exit_node in to_end:
            distances, paths = self._tree(int(exit_node))
            tail = float(np.hypot(*(self.positions[exit_node] - b)))
            for entry in from_start:
                if int(entry) not in distances:
                    continue
                head = float(np.hypot(*(self.positions[entry] - a)))
                length = head + distances[int(entry)] + tail
                if length < best_length - 1e-12:
                    best_length = length
                    best_nodes = list(reversed(paths[int(entry)]))

        if best_nodes is None:
            raise RoutingError(f"Target {end.as_tuple()} unreachable from {start.as_tuple()}")
        middle = [self.node_position(n) for n in best_nodes]
        # start and end may themselves be nodes (region centroids)
        if middle and middle[0].distance_to(start) < EPS:
            middle = middle[1:]
        if middle and middle[-1].distance_to(end) < EPS:
            middle = middle[:-1]
        return [start] + middle + [end]


def _corner_nodes(obstacles: Sequence[shapely.Geometry], inflation: float) -> List[Tuple[float, float]]:
    corners = []
    for obstacle in obstacles:
        grown = obstacle.buffer(inflation + NODE_MARGIN, join_style="mitre")
        parts = getattr(grown, "geoms", [grown])
        for part in parts:
            corners.extend(part.exterior.coords[:-1])
    return corners


def build_visibility_graph(scenario, inflation: float) -> VisibilityGraph:
    """
    Build the static visibility graph of a scenario.

    Args:
        scenario: Validated Scenario
        inflation: Obstacle clearance of nodes and edges (≥ torso radius)

    Returns:
        VisibilityGraph

    Raises:
        RoutingError: If some origin/destination pair is not connected
    """
    if not inflation > 0:
        raise ValueError(f"inflation must be > 0, got {inflation}")
    obstacles = scenario.obstacle_union
    bounds = scenario.bounds.geometry

    # centroid nodes first so their labels keep stable indices
    labels, points = [], []
    for region in scenario.origins:
        labels.append(f"origin:{region.name}")
        points.append(region.polygon.centroid.as_tuple())
    for region in scenario.destinations:
        labels.append(f"destination:{region.name}")
        points.append(region.polygon.centroid.as_tuple())
    n_named = len(points)

    corners = np.array(_corner_nodes([o.geometry for o in scenario.obstacles], inflation)).reshape(-1, 2)
    if len(corners):
        keep = shapely.contains_xy(bounds, corners[:, 0], corners[:, 1])
        if not obstacles.is_empty:
            dist = shapely.distance(shapely.points(corners), obstacles)
            keep &= dist >= inflation - 1e-9
        corners = np.unique(np.round(corners[keep], 9), axis=0)
        for i, corner in enumerate(corners):
            labels.append(f"corner:{i}")
            points.append((float(corner[0]), float(corner[1])))

    positions = np.array(points, dtype=float).reshape(-1, 2)
    graph = VisibilityGraph(positions, labels, nx.Graph(), obstacles, bounds, inflation)
    graph.graph.add_nodes_from(range(len(positions)))

    # centroids close to a wall relax the clearance of their own edges
    node_clearance = np.full(len(positions), inflation)
    for i in range(n_named):
        node_clearance[i] = graph.endpoint_clearance(Vec2(*positions[i]))

    for i in range(len(positions) - 1):
        start = positions[i]
        others = np.arange(i + 1, len(positions))
        clearance = np.minimum(node_clearance[i], node_clearance[others])
        visible = graph.clear_segments(start, positions[others], clearance)
        for j in others[visible]:
            weight = float(np.hypot(*(positions[j] - start)))
            graph.graph.add_edge(i, int(j), weight=weight)

    named = list(range(n_named))
    component = nx.node_connected_component(graph.graph, named[0]) if named else set()
    missing = [labels[i] for i in named if i not in component]
    if missing:
        raise RoutingError(f"Visibility graph is disconnected; unreachable: {missing}")

    logger.info(
        f"Visibility graph built: {graph.node_count} nodes, {graph.edge_count} edges "
        f"(inflation {inflation} m)"
    )
    return graph


def shortest_path(g: VisibilityGraph, start: Vec2, end: Vec2) -> List[Vec2]:
    """Shortest waypoint path between two points on a built graph."""
    return g.shortest_path(start, end)


def path_length(waypoints: Sequence[Vec2]) -> float:
    return float(sum(a.distance_to(b) for a, b in zip(waypoints, waypoints[1:])))
