"""
Run Renderer
============
Static PNG frames of a finished run (zones, transit annuli and agents by
model) and a mean-density heatmap.
"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.patches import Circle as CirclePatch  # noqa: E402
from matplotlib.patches import Polygon as PolygonPatch  # noqa: E402

from ..utils.logger import get_logger  # noqa: E402
from ..world.scenario import load_scenario  # noqa: E402
from .writers import DENSITY_DIR, SCENARIO_FILE, TRAJECTORIES_FILE, ZONES_FILE  # noqa: E402

logger = get_logger(__name__)

MODEL_STYLE = {"C": {"color": "tab:blue", "marker": "o"}, "D": {"color": "tab:red", "marker": "s"}}
CORE_COLOR = "#cfe3f7"
TRANSIT_COLOR = "#f9dcb4"


def replay_zones(events: List[Dict]) -> Dict[int, Dict[int, Dict]]:
    """
    Active zones after each frame that changed them.

    Returns:
        {frame: {zone_id: zone record}} for every frame with an event
    """
    active: Dict[int, Dict] = {}
    history: Dict[int, Dict[int, Dict]] = {}
    for event in events:
        kind = event["event"]
        if kind in ("pinned", "created"):
            active[event["zone_id"]] = event
        elif kind in ("merged", "grown"):
            for zone_id in event.get("absorbed", []):
                active.pop(zone_id, None)
            active[event["zone_id"]] = event
        elif kind == "shrunk":
            active[event["zone_id"]] = event
        elif kind == "dissolved":
            active.pop(event["zone_id"], None)
        history[event["frame"]] = dict(active)
    return history


def zones_at(history: Dict[int, Dict[int, Dict]], frame: int) -> List[Dict]:
    frames = [f for f in history if f <= frame]
    if not frames:
        return []
    return list(history[max(frames)].values())


def _read_events(run_dir: Path) -> List[Dict]:
    path = run_dir / ZONES_FILE
    if not path.exists():
        return []
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def draw_world(ax, scenario) -> None:
    x0, y0, x1, y1 = scenario.bounds.bounds
    ax.add_patch(PolygonPatch(scenario.bounds.to_points(), closed=True, fill=False, edgecolor="black"))
    for obstacle in scenario.obstacles:
        ax.add_patch(PolygonPatch(obstacle.to_points(), closed=True, facecolor="dimgray"))
    for region in scenario.origins:
        ax.add_patch(PolygonPatch(region.polygon.to_points(), closed=True, facecolor="palegreen", alpha=0.5))
    for region in scenario.destinations:
        ax.add_patch(PolygonPatch(region.polygon.to_points(), closed=True, facecolor="khaki", alpha=0.5))
    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")


def draw_zones(ax, zones: List[Dict]) -> None:
    """Transit annulus first, the core disk on top of it."""
    for zone in zones:
        center = tuple(zone["center"])
        outer = zone["radius_m"] + zone["transit_width_m"]
        ax.add_patch(CirclePatch(center, outer, facecolor=TRANSIT_COLOR, edgecolor="darkorange", lw=0.8))
        ax.add_patch(CirclePatch(center, zone["radius_m"], facecolor=CORE_COLOR, edgecolor="steelblue", lw=0.8))


def render_frames(run_dir: Union[str, Path], out_dir: Optional[Union[str, Path]] = None,
                  stride: int = 1) -> List[Path]:
    """
    Render every stride-th trajectory sample of a run to PNG.

    Args:
        run_dir: Run directory written by RunWriter
        out_dir: Image directory (run_dir/frames by default)
        stride: Render every stride-th sampled frame

    Returns:
        Paths of the written images
    """
    run_dir = Path(run_dir)
    for required in (SCENARIO_FILE, TRAJECTORIES_FILE):
        if not (run_dir / required).exists():
            raise FileNotFoundError(f"{run_dir / required} not found")
    if stride < 1:
        raise ValueError(f"stride must be ≥ 1, got {stride}")

    scenario, params = load_scenario(run_dir / SCENARIO_FILE)
    trajectories = pd.read_csv(run_dir / TRAJECTORIES_FILE)
    history = replay_zones(_read_events(run_dir))
    out_dir = Path(out_dir) if out_dir is not None else run_dir / "frames"
    out_dir.mkdir(parents=True, exist_ok=True)

    times = sorted(trajectories["time_s"].unique())
    samples = [(int(round(t / params.dt_disc)), t) for t in times[::stride]] or [(0, 0.0)]
    logger.info(f"Rendering {len(samples)} frames of {run_dir}")

    written = []
    for frame, t in samples:
        fig, ax = plt.subplots(figsize=(8, 6))
        draw_world(ax, scenario)
        draw_zones(ax, zones_at(history, frame))
        rows = trajectories[trajectories["time_s"] == t]
        for model, style in MODEL_STYLE.items():
            agents = rows[rows["model"] == model]
            if len(agents):
                ax.scatter(agents["x_m"], agents["y_m"], s=12, label=model, **style)
        if len(rows):
            ax.legend(loc="upper right")
        ax.set_title(f"{scenario.name}  t = {t:.2f} s")
        ax.set_xlabel("x (m)")
        ax.set_ylabel("y (m)")
        path = out_dir / f"frame_{frame:06d}.png"
        fig.savefig(path, dpi=100)
        plt.close(fig)
        written.append(path)

    logger.info(f"Rendering complete: {len(written)} images in {out_dir}")
    return written


def render_density_heatmap(run_dir: Union[str, Path], out_path: Optional[Union[str, Path]] = None) -> Path:
    """Mean density over all written density frames as a heatmap."""
    run_dir = Path(run_dir)
    frames = sorted((run_dir / DENSITY_DIR).glob("frame_*.txt"))
    if not frames:
        raise FileNotFoundError(f"No density frames in {run_dir / DENSITY_DIR}")
    scenario, params = load_scenario(run_dir / SCENARIO_FILE)
    mean = np.mean([np.loadtxt(p, ndmin=2) for p in frames], axis=0)
    x0, y0, _, _ = scenario.bounds.bounds
    rows, cols = mean.shape
    extent = (x0, x0 + cols * params.cell_edge, y0, y0 + rows * params.cell_edge)

    fig, ax = plt.subplots(figsize=(8, 6))
    image = ax.imshow(mean, origin="lower", extent=extent, cmap="viridis")
    fig.colorbar(image, ax=ax, label="density (ped/m²)")
    ax.set_title(f"{scenario.name}  mean density over {len(frames)} frames")
    out_path = Path(out_path) if out_path is not None else run_dir / "density_heatmap.png"
    fig.savefig(out_path, dpi=100)
    plt.close(fig)
    return out_path
