"""
Local Scenario Check Script
Run a scenario in all three model mixes and check the outputs before a benchmark.

Usage:
    python scripts/check_scenario.py
    python scripts/check_scenario.py --scenario scenarios/narrow_gap.yaml --t-end 120
"""

import sys
import tempfile
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

# flake8: noqa: E402 (module level import not at top - intentional)
from src.io.schemas import validate_run_dir
from src.io.writers import RunWriter
from src.simulation.driver import run
from src.utils.logger import get_logger
from src.world.scenario import load_scenario

logger = get_logger(__name__)

MODES = ("pure-continuous", "pure-discrete", "hybrid")


def check_loading(scenario_path):
    print("\n" + "=" * 80)
    print("STEP 1: SCENARIO LOADING")
    print("=" * 80)

    try:
        scenario, params = load_scenario(scenario_path)
        print(f"Loaded '{scenario.name}': {len(scenario.obstacles)} obstacles, "
              f"{len(scenario.origins)} origins, {len(scenario.destinations)} destinations")
        print(f"dt_cont {params.dt_cont} s, dt_disc {params.dt_disc} s, R {params.R} m, rho_thr {params.rho_thr}")
        return scenario, params

    except Exception as e:
        print(f"ERROR: Loading failed: {str(e)}")
        raise


def check_modes(scenario, params, seed, t_end):
    print("\n" + "=" * 80)
    print("STEP 2: MODEL MIXES")
    print("=" * 80)

    results = {}
    for mode in MODES:
        try:
            result = run(scenario, params.with_overrides(mode=mode), seed=seed, t_end=t_end,
                         record_trajectories=False)
        except Exception as e:
            print(f"ERROR: {mode} run failed: {str(e)}")
            import traceback

            traceback.print_exc()
            return None

        exited = len(result.exit_times)
        status = "truncated" if result.truncated else f"escape {max(result.exit_times.values(), default=0.0):.2f} s"
        print(f"{mode:16s} {exited}/{len(result.agents)} exited, {status}, wall {result.wall_seconds:.2f} s, "
              f"{result.invariant_failures} invariant failures")
        results[mode] = result

    if results["hybrid"].invariant_failures:
        print("WARNING: Hybrid run reported invariant failures")
    return results


def check_outputs(scenario, params, seed, t_end):
    print("\n" + "=" * 80)
    print("STEP 3: OUTPUT SCHEMAS")
    print("=" * 80)

    with tempfile.TemporaryDirectory() as tmp:
        out_dir = Path(tmp) / "run"
        try:
            with RunWriter(out_dir, scenario, params, density_stride=10) as writer:
                run(scenario, params, seed=seed, t_end=t_end, writer=writer, record_trajectories=False)
            results = validate_run_dir(out_dir)
        except Exception as e:
            print(f"ERROR: Output check failed: {str(e)}")
            return False

    failed = {name: r["errors"] for name, r in results.items() if not r["passed"]}
    if failed:
        print("\nERROR: Outputs do not match their schemas:")
        for name, errors in failed.items():
            print(f"  - {name}: {errors[:3]}")
        return False

    print("All output files match their schemas")
    return True


def run_scenario_check(scenario_path, seed=7, t_end=300.0):
    print("\n" + "=" * 80)
    print("HYBRID SIMULATOR SCENARIO CHECK")
    print("=" * 80)
    print(f"Scenario: {scenario_path}")
    print("=" * 80)

    try:
        scenario, params = check_loading(scenario_path)

        if check_modes(scenario, params, seed, t_end) is None:
            return False

        if not check_outputs(scenario, params, seed, t_end):
            return False

        print("\n" + "=" * 80)
        print("SUCCESS: ALL CHECKS PASSED")
        print("=" * 80)
        return True

    except Exception as e:
        print("\n" + "=" * 80)
        print("FAILURE: SCENARIO CHECK FAILED")
        print("=" * 80)
        print(f"\nError: {str(e)}")
        return False


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Check a scenario in every model mix")
    parser.add_argument("--scenario", default=str(project_root / "scenarios" / "corridor.yaml"), help="Scenario file")
    parser.add_argument("--seed", type=int, default=7, help="Random seed")
    parser.add_argument("--t-end", type=float, default=300.0, help="Simulated time limit (s)")

    args = parser.parse_args()

    success = run_scenario_check(args.scenario, args.seed, args.t_end)
    sys.exit(0 if success else 1)
