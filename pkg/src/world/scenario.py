"""
Scenario Loader
===============
Loads, validates and exposes the static world and all simulation parameters.

Scenario files are YAML documents (any JSON file is accepted too). Every
parameter is optional and falls back to the event defaults below; units are
part of the field names (dt_disc_s, cell_edge_m, ...). The format is
documented in docs/SCENARIO_FORMAT.md.
"""

import math
from dataclasses import asdict, dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
import yaml
from scipy.stats import truncnorm
from shapely.ops import unary_union

from ..geometry import Polygon, Vec2
from ..utils.errors import ScenarioParseError, ScenarioValidationError
from ..utils.logger import get_logger

logger = get_logger(__name__)

# Floor for the continuous time step (seconds)
MIN_DT_CONT = 0.01

# OD row-sum tolerance
OD_TOLERANCE = 1e-9

MODES = ("hybrid", "pure-continuous", "pure-discrete")

CELL_SHAPES = ("triangular", "quadratic", "hexagonal")

# Maximal densities of continuous torso shapes (ped/m^2). The packing factors
# behind these values are not derived here; they are reference constants only.
CONTINUOUS_MAX_DENSITY = {"circular": 5.46, "elliptical": 10.47}

# Average walking speed ranges by kind of traffic (m/s)
TRAFFIC_VELOCITY_RANGES: Dict[str, Tuple[float, float]] = {
    "commercial": (1.45, 1.61),
    "commuter": (1.34, 1.49),
    "shopping": (1.04, 1.16),
    "public_event": (0.99, 1.10),
}

# Desired speeds are never drawn below this value (m/s)
MIN_DESIRED_SPEED = 0.5


def to_microseconds(seconds: float, name: str = "time") -> int:
    """
    Convert a duration to whole microseconds.

    Args:
        seconds: Duration in seconds
        name: Parameter name used in the error message

    Returns:
        Duration in integer microseconds

    Raises:
        ValueError: If the value is not a whole number of microseconds
    """
    scaled = seconds * 1_000_000
    rounded = int(round(scaled))
    if abs(scaled - rounded) > 1e-3:
        raise ValueError(f"{name} must be a whole number of microseconds, got {seconds}")
    return rounded


@dataclass(frozen=True)
class SimParams:
    """All model and coupling parameters of a run."""

    dt_cont: float = 0.05
    dt_disc: float = 1.0
    v_max: float = 2.16
    v_desired_mean: float = 1.34
    v_desired_sigma: float = 0.1
    torso_radius: float = 0.23
    cell_edge: float = 0.46
    rho_thr: float = 1.5
    R: float = 2.0
    k_max: int = 5
    density_window: float = 2.0
    zoom_check_interval: float = 2.0
    relaxation_time: float = 0.5
    sf_A: float = 26.67
    sf_B: float = 0.06
    sf_kappa: float = 2.4e5
    sf_k: float = 1.2e5
    k_stock: float = 2.0
    mass: float = 75.0
    transit_width: Optional[float] = None
    neighbor_cutoff: float = 2.0
    route_inflation: Optional[float] = None
    mode: str = "hybrid"

    @property
    def r_place(self) -> float:
        """Maximal displacement admitted when placing a demoted agent."""
        return self.v_max * self.dt_disc

    @property
    def w_tr(self) -> float:
        """Transit annulus width (explicit value or 1.1 * v_max * dt_disc)."""
        if self.transit_width is not None:
            return self.transit_width
        return 1.1 * self.v_max * self.dt_disc

    @property
    def inflation(self) -> float:
        """Obstacle clearance of visibility-graph nodes."""
        if self.route_inflation is not None:
            return self.route_inflation
        return self.torso_radius

    @property
    def dt_cont_us(self) -> int:
        return to_microseconds(self.dt_cont, "dt_cont")

    @property
    def dt_disc_us(self) -> int:
        return to_microseconds(self.dt_disc, "dt_disc")

    @property
    def cell_area(self) -> float:
        return self.cell_edge * self.cell_edge

    def with_overrides(self, **overrides: Any) -> "SimParams":
        """Return a validated copy with the given fields replaced."""
        updated = replace(self, **{k: v for k, v in overrides.items() if v is not None})
        validate_params(updated)
        return updated


# File key -> SimParams attribute
PARAM_KEYS: Dict[str, str] = {
    "dt_cont_s": "dt_cont",
    "dt_disc_s": "dt_disc",
    "v_max_mps": "v_max",
    "v_desired_mean_mps": "v_desired_mean",
    "v_desired_sigma_mps": "v_desired_sigma",
    "torso_radius_m": "torso_radius",
    "cell_edge_m": "cell_edge",
    "rho_thr_ped_per_m2": "rho_thr",
    "zoom_radius_m": "R",
    "k_max": "k_max",
    "density_window_s": "density_window",
    "zoom_check_interval_s": "zoom_check_interval",
    "relaxation_time_s": "relaxation_time",
    "sf_A_mps2": "sf_A",
    "sf_B_m": "sf_B",
    "sf_kappa_kg_per_s2": "sf_kappa",
    "sf_k_kg_per_m_s": "sf_k",
    "k_stock": "k_stock",
    "mass_kg": "mass",
    "transit_width_m": "transit_width",
    "neighbor_cutoff_m": "neighbor_cutoff",
    "route_inflation_m": "route_inflation",
    "mode": "mode",
}


@dataclass(frozen=True)
class NamedRegion:
    name: str
    polygon: Polygon


@dataclass(frozen=True)
class SpawnEntry:
    origin: str
    rate: float
    count: int


@dataclass(frozen=True)
class PinnedZone:
    """A continuous zone fixed by the scenario author (e.g. over a bottleneck)."""

    center: Vec2
    radius: float


@dataclass(frozen=True)
class DensityRegion:
    """A polygon with its own Zoom-In density threshold."""

    name: str
    polygon: Polygon
    rho_thr: float


@dataclass(frozen=True)
class ODMatrix:
    """Row-stochastic origin -> destination choice probabilities."""

    origins: Tuple[str, ...]
    destinations: Tuple[str, ...]
    probabilities: Tuple[Tuple[float, ...], ...]

    def row(self, origin: str) -> np.ndarray:
        if origin not in self.origins:
            raise KeyError(origin)
        return np.asarray(self.probabilities[self.origins.index(origin)], dtype=float)


@dataclass(frozen=True)
class Scenario:
    """The static world of a run."""

    name: str
    bounds: Polygon
    obstacles: Tuple[Polygon, ...]
    origins: Tuple[NamedRegion, ...]
    destinations: Tuple[NamedRegion, ...]
    od_matrix: ODMatrix
    spawn_schedule: Tuple[SpawnEntry, ...]
    pinned_zones: Tuple[PinnedZone, ...] = ()
    density_regions: Tuple[DensityRegion, ...] = ()
    traffic_type: Optional[str] = None

    @cached_property
    def obstacle_union(self) -> shapely.Geometry:
        """Union of all obstacles (prepared for repeated point queries)."""
        union = unary_union([o.geometry for o in self.obstacles]) if self.obstacles else shapely.Polygon()
        shapely.prepare(union)
        return union

    @cached_property
    def walkable(self) -> shapely.Geometry:
        """Bounds minus obstacles."""
        area = self.bounds.geometry.difference(self.obstacle_union)
        shapely.prepare(area)
        return area

    def origin(self, name: str) -> NamedRegion:
        for region in self.origins:
            if region.name == name:
                return region
        raise KeyError(name)

    def destination(self, name: str) -> NamedRegion:
        for region in self.destinations:
            if region.name == name:
                return region
        raise KeyError(name)

    @property
    def total_agents(self) -> int:
        return sum(entry.count for entry in self.spawn_schedule)

    def with_spawn_count(self, count: int) -> "Scenario":
        """Copy of the scenario with the total spawn count redistributed over the schedule."""
        if not self.spawn_schedule:
            return self
        weights = np.array([max(e.count, 1) for e in self.spawn_schedule], dtype=float)
        shares = np.floor(count * weights / weights.sum()).astype(int)
        shares[0] += count - int(shares.sum())
        schedule = tuple(
            SpawnEntry(e.origin, e.rate, int(n)) for e, n in zip(self.spawn_schedule, shares)
        )
        return replace(self, spawn_schedule=schedule)


def max_discrete_density(cell_shape: str, edge: float) -> float:
    """
    Maximal density a cell lattice can represent (one pedestrian per cell).

    Args:
        cell_shape: 'triangular', 'quadratic' or 'hexagonal'
        edge: Cell edge length in meters

    Returns:
        1/A for the unit cell, in ped/m^2
    """
    if not edge > 0:
        raise ValueError(f"edge must be > 0, got {edge}")
    if cell_shape == "quadratic":
        return 1.0 / (edge * edge)
    if cell_shape == "triangular":
        return 4.0 * math.sqrt(3.0) / (3.0 * edge * edge)
    if cell_shape == "hexagonal":
        return 2.0 * math.sqrt(3.0) / (9.0 * edge * edge)
    raise ValueError(f"Unknown cell shape: {cell_shape}")


def minimal_cell_edge(cell_shape: str, torso_radius: float) -> float:
    """Smallest cell edge that still contains a circular torso of the given radius."""
    if cell_shape == "quadratic":
        return 2.0 * torso_radius
    if cell_shape == "triangular":
        return 2.0 * math.sqrt(3.0) * torso_radius
    if cell_shape == "hexagonal":
        return 2.0 * math.sqrt(3.0) / 3.0 * torso_radius
    raise ValueError(f"Unknown cell shape: {cell_shape}")


def cfl_time_step(resolution: float, v_max: float) -> float:
    """Time step at which the fastest pedestrian covers one resolution length."""
    if not (resolution > 0 and v_max > 0):
        raise ValueError("resolution and v_max must be > 0")
    return resolution / v_max


def draw_desired_speeds(params: SimParams, rng: np.random.Generator, n: int) -> np.ndarray:
    """Desired speeds from a normal around the mean, truncated to [0.5, v_max]."""
    if n <= 0:
        return np.empty(0)
    mean, sigma = params.v_desired_mean, params.v_desired_sigma
    low = min(MIN_DESIRED_SPEED, params.v_max)
    if sigma <= 0:
        return np.full(n, float(np.clip(mean, low, params.v_max)))
    a, b = (low - mean) / sigma, (params.v_max - mean) / sigma
    return truncnorm.rvs(a, b, loc=mean, scale=sigma, size=n, random_state=rng)


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


def validate_params(params: SimParams) -> None:
    """
    Check every SimParams invariant.

    Raises:
        ScenarioValidationError: Naming the first failed invariant
    """
    for name in ("dt_cont", "dt_disc", "density_window", "zoom_check_interval"):
        value = getattr(params, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ScenarioValidationError(f"{name} > 0", value)
        try:
            to_microseconds(value, name)
        except ValueError:
            raise ScenarioValidationError(f"{name} in whole microseconds", value) from None

    if params.dt_cont_us > params.dt_disc_us:
        raise ScenarioValidationError("dt_cont ≤ dt_disc", (params.dt_cont, params.dt_disc))
    if params.dt_cont_us < to_microseconds(MIN_DT_CONT):
        raise ScenarioValidationError("dt_cont ≥ 0.01 s", params.dt_cont)

    positives = (
        "v_max", "v_desired_mean", "torso_radius", "cell_edge", "R",
        "relaxation_time", "sf_A", "sf_B", "mass", "neighbor_cutoff",
    )
    for name in positives:
        value = getattr(params, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ScenarioValidationError(f"{name} > 0", value)
    if not params.rho_thr > 0:
        raise ScenarioValidationError("rho_thr > 0", params.rho_thr)
    if params.sf_kappa < 0 or params.sf_k < 0 or params.v_desired_sigma < 0:
        raise ScenarioValidationError(
            "contact coefficients ≥ 0", (params.sf_kappa, params.sf_k, params.v_desired_sigma)
        )
    if params.cell_edge < 2.0 * params.torso_radius - 1e-12:
        raise ScenarioValidationError(
            "cell_edge ≥ 2·torso_radius", (params.cell_edge, params.torso_radius)
        )
    if params.R > params.v_max * params.dt_disc + 1e-12:
        raise ScenarioValidationError(
            "R ≤ v_max·dt_disc", (params.R, params.v_max * params.dt_disc)
        )
    if params.v_desired_mean > params.v_max:
        raise ScenarioValidationError("v_desired_mean ≤ v_max", params.v_desired_mean)
    if not (isinstance(params.k_max, int) and params.k_max >= 1):
        raise ScenarioValidationError("k_max ≥ 1 integer", params.k_max)
    if not params.k_stock > 1:
        raise ScenarioValidationError("k_stock > 1", params.k_stock)
    if params.transit_width is not None and not params.transit_width > params.v_max * params.dt_disc:
        raise ScenarioValidationError(
            "w_Tr > v_max·dt_disc", (params.transit_width, params.v_max * params.dt_disc)
        )
    if params.route_inflation is not None and params.route_inflation < params.torso_radius:
        raise ScenarioValidationError("route_inflation ≥ torso_radius", params.route_inflation)
    if params.mode not in MODES:
        raise ScenarioValidationError("mode in {hybrid, pure-continuous, pure-discrete}", params.mode)

    cfl = cfl_time_step(params.cell_edge, params.v_max)
    if params.dt_disc < cfl:
        logger.warning(
            f"dt_disc={params.dt_disc}s is below the lattice CFL step {cfl:.3f}s; "
            "the fastest pedestrians are limited by the cell size"
        )


def _overlaps(a: shapely.Geometry, b: shapely.Geometry) -> bool:
    """Interior overlap (touching boundaries do not count)."""
    return bool(a.intersects(b) and not a.touches(b))


def validate_scenario(scenario: Scenario) -> None:
    """
    Check every Scenario invariant.

    Raises:
        ScenarioValidationError: Naming the first failed invariant
    """
    bounds = scenario.bounds.geometry
    for i, obstacle in enumerate(scenario.obstacles):
        if not bounds.buffer(1e-9).covers(obstacle.geometry):
            raise ScenarioValidationError("obstacles lie within bounds", i)

    names = [r.name for r in scenario.origins] + [r.name for r in scenario.destinations]
    if len(set(names)) != len(names):
        raise ScenarioValidationError("unique region names", names)
    if not scenario.origins or not scenario.destinations:
        raise ScenarioValidationError("at least one origin and one destination", len(names))

    for region in scenario.origins + scenario.destinations:
        if _overlaps(region.polygon.geometry, scenario.obstacle_union):
            raise ScenarioValidationError(
                "origins/destinations do not intersect obstacles", region.name
            )
        if not _overlaps(region.polygon.geometry, bounds):
            raise ScenarioValidationError("origins/destinations within bounds", region.name)

    od = scenario.od_matrix
    if od.origins != tuple(r.name for r in scenario.origins):
        raise ScenarioValidationError("OD rows match origins", od.origins)
    if od.destinations != tuple(r.name for r in scenario.destinations):
        raise ScenarioValidationError("OD columns match destinations", od.destinations)
    for name, row in zip(od.origins, od.probabilities):
        if len(row) != len(od.destinations):
            raise ScenarioValidationError("OD row length", name)
        if any(p < 0 or not math.isfinite(p) for p in row):
            raise ScenarioValidationError("OD probabilities ≥ 0", name)
        if abs(sum(row) - 1.0) > OD_TOLERANCE:
            raise ScenarioValidationError("OD row sums to 1", (name, sum(row)))

    for entry in scenario.spawn_schedule:
        if entry.origin not in od.origins:
            raise ScenarioValidationError("spawn origin exists", entry.origin)
        if not entry.rate > 0:
            raise ScenarioValidationError("spawn rate > 0", entry.rate)
        if entry.count < 0:
            raise ScenarioValidationError("spawn count ≥ 0", entry.count)

    for zone in scenario.pinned_zones:
        if not zone.radius > 0:
            raise ScenarioValidationError("pinned zone radius > 0", zone.radius)
        if not bounds.covers(shapely.Point(zone.center.x, zone.center.y)):
            raise ScenarioValidationError("pinned zone center within bounds", zone.center)

    for region in scenario.density_regions:
        if not region.rho_thr > 0:
            raise ScenarioValidationError("regional rho_thr > 0", (region.name, region.rho_thr))

    if scenario.traffic_type is not None and scenario.traffic_type not in TRAFFIC_VELOCITY_RANGES:
        raise ScenarioValidationError("known traffic_type", scenario.traffic_type)


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def _polygon(points: Any, what: str) -> Polygon:
    if not isinstance(points, (list, tuple)) or not all(
        isinstance(p, (list, tuple)) and len(p) == 2 for p in points
    ):
        raise ScenarioParseError(f"{what}: expected a list of [x, y] vertices")
    try:
        return Polygon.from_points([(float(x), float(y)) for x, y in points])
    except ValueError as e:
        raise ScenarioValidationError("simple polygon with ≥ 3 finite vertices", what, str(e)) from None


def _named_regions(items: Any, what: str) -> Tuple[NamedRegion, ...]:
    if not isinstance(items, list):
        raise ScenarioParseError(f"{what}: expected a list")
    regions = []
    for i, item in enumerate(items):
        if not isinstance(item, dict) or "name" not in item or "polygon" not in item:
            raise ScenarioParseError(f"{what}[{i}]: expected {{name, polygon}}")
        regions.append(NamedRegion(str(item["name"]), _polygon(item["polygon"], f"{what}[{i}]")))
    return tuple(regions)


def coerce_param_values(raw: Dict[str, Any]) -> Dict[str, Any]:
    """
    Map file keys (e.g. 'dt_cont_s') to SimParams attributes with checked types.

    Raises:
        ScenarioParseError: Unknown key or value of the wrong type
    """
    if not isinstance(raw, dict):
        raise ScenarioParseError("params: expected a mapping")
    unknown = set(raw) - set(PARAM_KEYS)
    if unknown:
        raise ScenarioParseError(f"params: unknown keys {sorted(unknown)}")

    values: Dict[str, Any] = {}
    for key, attr in PARAM_KEYS.items():
        if key not in raw or raw[key] is None:
            continue
        value = raw[key]
        if attr == "mode":
            values[attr] = str(value)
        elif attr == "k_max":
            if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
                raise ScenarioValidationError("k_max ≥ 1 integer", value)
            values[attr] = int(value)
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ScenarioParseError(f"params.{key}: expected a number, got {value!r}")
            values[attr] = float(value)
    return values


def _params_from_dict(raw: Optional[Dict[str, Any]], traffic_type: Optional[str]) -> SimParams:
    raw = raw or {}
    values = coerce_param_values(raw)
    if traffic_type in TRAFFIC_VELOCITY_RANGES and "v_desired_mean" not in values:
        low, high = TRAFFIC_VELOCITY_RANGES[traffic_type]
        values["v_desired_mean"] = round((low + high) / 2.0, 3)
    return SimParams(**values)


def load_scenario_dict(data: Any) -> Tuple[Scenario, SimParams]:
    """
    Build and validate a scenario from an already parsed document tree.

    Args:
        data: Mapping as produced by yaml.safe_load / json.load

    Returns:
        Tuple of (Scenario, SimParams)
    """
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario document must be a mapping")
    for key in ("bounds", "origins", "destinations", "od_matrix"):
        if key not in data:
            raise ScenarioParseError(f"missing required key '{key}'")

    bounds = _polygon(data["bounds"], "bounds")
    obstacles_raw = data.get("obstacles") or []
    if not isinstance(obstacles_raw, list):
        raise ScenarioParseError("obstacles: expected a list of polygons")
    obstacles = tuple(_polygon(o, f"obstacles[{i}]") for i, o in enumerate(obstacles_raw))
    origins = _named_regions(data["origins"], "origins")
    destinations = _named_regions(data["destinations"], "destinations")

    matrix = data["od_matrix"]
    if not isinstance(matrix, list) or not all(isinstance(r, list) for r in matrix):
        raise ScenarioParseError("od_matrix: expected nested arrays")
    if len(matrix) != len(origins):
        raise ScenarioValidationError("OD rows match origins", len(matrix))
    try:
        probabilities = tuple(tuple(float(p) for p in row) for row in matrix)
    except (TypeError, ValueError):
        raise ScenarioParseError("od_matrix: entries must be numbers") from None
    od = ODMatrix(
        tuple(r.name for r in origins), tuple(r.name for r in destinations), probabilities
    )

    schedule = []
    for i, item in enumerate(data.get("spawn_schedule") or []):
        try:
            schedule.append(
                SpawnEntry(str(item["origin"]), float(item["rate_per_s"]), int(item["count"]))
            )
        except (KeyError, TypeError, ValueError):
            raise ScenarioParseError(f"spawn_schedule[{i}]: expected {{origin, rate_per_s, count}}") from None

    pinned = []
    for i, item in enumerate(data.get("pinned_zones") or []):
        try:
            pinned.append(PinnedZone(Vec2.from_iterable(item["center"]), float(item["radius_m"])))
        except (KeyError, TypeError, ValueError):
            raise ScenarioParseError(f"pinned_zones[{i}]: expected {{center, radius_m}}") from None

    density_regions = []
    for i, item in enumerate(data.get("density_regions") or []):
        try:
            density_regions.append(
                DensityRegion(
                    str(item["name"]),
                    _polygon(item["polygon"], f"density_regions[{i}]"),
                    float(item["rho_thr_ped_per_m2"]),
                )
            )
        except (KeyError, TypeError):
            raise ScenarioParseError(
                f"density_regions[{i}]: expected {{name, polygon, rho_thr_ped_per_m2}}"
            ) from None

    traffic_type = data.get("traffic_type")
    params = _params_from_dict(data.get("params"), traffic_type)

    scenario = Scenario(
        name=str(data.get("name", "scenario")),
        bounds=bounds,
        obstacles=obstacles,
        origins=origins,
        destinations=destinations,
        od_matrix=od,
        spawn_schedule=tuple(schedule),
        pinned_zones=tuple(pinned),
        density_regions=tuple(density_regions),
        traffic_type=traffic_type,
    )

    validate_params(params)
    validate_scenario(scenario)
    return scenario, params


def load_scenario(path: Union[str, Path]) -> Tuple[Scenario, SimParams]:
    """
    Load and validate a scenario file.

    Args:
        path: Path to a YAML or JSON scenario document

    Returns:
        Tuple of (Scenario, SimParams)

    Raises:
        ScenarioParseError: Malformed file
        ScenarioValidationError: Invariant violated (name + offending value)
    """
    path = Path(path)
    logger.info(f"Loading scenario from {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot read scenario file: {str(e)}")
        raise

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ScenarioParseError(f"{path}: {str(e)}") from None

    scenario, params = load_scenario_dict(data)
    logger.info(
        f"Loaded scenario '{scenario.name}': {len(scenario.obstacles)} obstacles, "
        f"{len(scenario.origins)} origins, {len(scenario.destinations)} destinations, "
        f"{scenario.total_agents} agents scheduled"
    )
    return scenario, params


def scenario_to_dict(scenario: Scenario, params: SimParams) -> Dict[str, Any]:
    """Document tree that load_scenario_dict parses back to equal objects."""
    # every value is written out, so a traffic preset never overrides the stored mean
    raw_params = {
        key: getattr(params, attr)
        for key, attr in PARAM_KEYS.items()
        if getattr(params, attr) is not None
    }

    data: Dict[str, Any] = {
        "name": scenario.name,
        "bounds": scenario.bounds.to_points(),
        "obstacles": [o.to_points() for o in scenario.obstacles],
        "origins": [{"name": r.name, "polygon": r.polygon.to_points()} for r in scenario.origins],
        "destinations": [
            {"name": r.name, "polygon": r.polygon.to_points()} for r in scenario.destinations
        ],
        "od_matrix": [list(row) for row in scenario.od_matrix.probabilities],
        "spawn_schedule": [
            {"origin": e.origin, "rate_per_s": e.rate, "count": e.count}
            for e in scenario.spawn_schedule
        ],
        "params": raw_params,
    }
    if scenario.pinned_zones:
        data["pinned_zones"] = [
            {"center": [z.center.x, z.center.y], "radius_m": z.radius} for z in scenario.pinned_zones
        ]
    if scenario.density_regions:
        data["density_regions"] = [
            {"name": r.name, "polygon": r.polygon.to_points(), "rho_thr_ped_per_m2": r.rho_thr}
            for r in scenario.density_regions
        ]
    if scenario.traffic_type is not None:
        data["traffic_type"] = scenario.traffic_type
    return data


def serialize_scenario(scenario: Scenario, params: SimParams) -> str:
    """Serialize a scenario and its parameters to YAML text."""
    return yaml.safe_dump(scenario_to_dict(scenario, params), sort_keys=False)


def params_as_dict(params: SimParams) -> Dict[str, Any]:
    """Plain mapping of all parameter values (for run summaries)."""
    data = asdict(params)
    data["r_place"] = params.r_place
    data["w_tr"] = params.w_tr
    return data


def param_field_names() -> List[str]:
    return [f.name for f in fields(SimParams)]
