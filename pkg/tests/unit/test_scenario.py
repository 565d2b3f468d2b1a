"""
Unit tests for scenario loading, validation and serialization
"""

import math

import numpy as np
import pytest
import yaml

from src.utils.errors import ScenarioParseError, ScenarioValidationError
from src.world.scenario import (
    SimParams,
    cfl_time_step,
    coerce_param_values,
    draw_desired_speeds,
    load_scenario,
    load_scenario_dict,
    max_discrete_density,
    minimal_cell_edge,
    serialize_scenario,
    to_microseconds,
)
from tests.fixtures.sample_scenarios import (
    get_corridor_dict,
    get_gap_dict,
    get_two_exit_dict,
    get_two_wall_corridor_dict,
)


class TestLoadScenario:
    """Test suite for load_scenario and its validation"""

    def test_two_wall_corridor(self, tmp_path):
        """Test the minimal corridor file with two wall polygons"""
        path = tmp_path / "corridor.yaml"
        path.write_text(yaml.safe_dump(get_two_wall_corridor_dict()))

        scenario, params = load_scenario(path)

        assert len(scenario.obstacles) == 2
        assert scenario.origins[0].name == "west"
        assert scenario.total_agents == 10

    def test_json_file_accepted(self, tmp_path):
        """Test that a JSON document parses as well"""
        import json

        path = tmp_path / "corridor.json"
        path.write_text(json.dumps(get_corridor_dict()))

        scenario, _ = load_scenario(path)

        assert scenario.name == "test_corridor"

    def test_dt_cont_above_dt_disc(self):
        """Test the dt_cont ≤ dt_disc invariant"""
        data = get_corridor_dict(dt_cont_s=0.4, dt_disc_s=0.3)

        with pytest.raises(ScenarioValidationError) as exc:
            load_scenario_dict(data)

        assert exc.value.invariant == "dt_cont ≤ dt_disc"

    def test_event_defaults_loaded_verbatim(self):
        """Test that the event parameter values load unchanged"""
        data = get_corridor_dict(
            v_desired_mean_mps=1.34,
            cell_edge_m=0.46,
            rho_thr_ped_per_m2=1.5,
            relaxation_time_s=0.5,
            sf_A_mps2=26.67,
            sf_B_m=0.06,
            sf_kappa_kg_per_s2=2.4e5,
            sf_k_kg_per_m_s=1.2e5,
        )

        _, params = load_scenario_dict(data)

        assert params.v_desired_mean == 1.34
        assert params.cell_edge == 0.46
        assert params.rho_thr == 1.5
        assert params.relaxation_time == 0.5
        assert params.sf_A == 26.67
        assert params.sf_B == 0.06
        assert params.sf_kappa == 2.4e5
        assert params.sf_k == 1.2e5

    def test_missing_params_use_defaults(self):
        """Test that every omitted parameter falls back to its default"""
        data = get_corridor_dict()
        data.pop("params")

        _, params = load_scenario_dict(data)

        assert params == SimParams()

    @pytest.mark.parametrize(
        "params, invariant",
        [
            ({"dt_cont_s": 0.005, "dt_disc_s": 1.0}, "dt_cont ≥ 0.01 s"),
            ({"cell_edge_m": 0.40}, "cell_edge ≥ 2·torso_radius"),
            ({"zoom_radius_m": 2.5}, "R ≤ v_max·dt_disc"),
            ({"rho_thr_ped_per_m2": 0.0}, "rho_thr > 0"),
            ({"k_stock": 1.0}, "k_stock > 1"),
            ({"transit_width_m": 2.0}, "w_Tr > v_max·dt_disc"),
            ({"mode": "mesoscopic"}, "mode in {hybrid, pure-continuous, pure-discrete}"),
            ({"dt_disc_s": 0.3333333}, "dt_disc in whole microseconds"),
        ],
    )
    def test_parameter_invariants(self, params, invariant):
        """Test that each parameter invariant is named on violation"""
        with pytest.raises(ScenarioValidationError) as exc:
            load_scenario_dict(get_corridor_dict(**params))

        assert exc.value.invariant == invariant

    def test_od_row_must_sum_to_one(self):
        """Test the row-stochastic OD invariant"""
        data = get_two_exit_dict()
        data["od_matrix"] = [[0.5, 0.4], [1.0, 0.0]]

        with pytest.raises(ScenarioValidationError) as exc:
            load_scenario_dict(data)

        assert exc.value.invariant == "OD row sums to 1"

    def test_origin_overlapping_obstacle(self):
        """Test that origins may not intersect obstacles"""
        data = get_corridor_dict()
        data["obstacles"] = [[[1.0, 1.0], [3.0, 1.0], [3.0, 3.0], [1.0, 3.0]]]

        with pytest.raises(ScenarioValidationError):
            load_scenario_dict(data)

    def test_obstacle_outside_bounds(self):
        """Test that obstacles must lie within bounds"""
        data = get_corridor_dict()
        data["obstacles"] = [[[5.0, 3.0], [6.0, 3.0], [6.0, 5.0], [5.0, 5.0]]]

        with pytest.raises(ScenarioValidationError) as exc:
            load_scenario_dict(data)

        assert exc.value.invariant == "obstacles lie within bounds"

    def test_malformed_documents(self, tmp_path):
        """Test parse errors for broken files and trees"""
        path = tmp_path / "broken.yaml"
        path.write_text("bounds: [[0, 0], [1, 0]\n")

        with pytest.raises(ScenarioParseError):
            load_scenario(path)
        with pytest.raises(ScenarioParseError):
            load_scenario_dict([1, 2, 3])
        with pytest.raises(ScenarioParseError):
            load_scenario_dict({"bounds": [[0, 0], [1, 0], [1, 1]]})

    def test_unknown_parameter_key(self):
        """Test that misspelled parameters are rejected"""
        with pytest.raises(ScenarioParseError):
            load_scenario_dict(get_corridor_dict(dt_cont=0.05))

    def test_missing_file(self, tmp_path):
        """Test that a missing file surfaces as an OSError"""
        with pytest.raises(OSError):
            load_scenario(tmp_path / "nope.yaml")


class TestScenarioExtras:
    """Test suite for traffic presets, pinned zones and density regions"""

    def setup_method(self):
        """Setup before each test"""
        self.scenario, self.params = load_scenario_dict(get_two_exit_dict())

    def test_traffic_preset_sets_desired_speed(self):
        """Test that the shopping preset sets the range midpoint"""
        assert self.params.v_desired_mean == pytest.approx(1.10)

    def test_explicit_speed_beats_preset(self):
        """Test that an explicit desired speed wins over the preset"""
        data = get_two_exit_dict()
        data["params"] = {"v_desired_mean_mps": 1.3}

        _, params = load_scenario_dict(data)

        assert params.v_desired_mean == 1.3

    def test_pinned_zones_and_regions(self):
        """Test that pinned zones and density regions are parsed"""
        assert len(self.scenario.pinned_zones) == 1
        assert self.scenario.pinned_zones[0].radius == 1.0
        assert self.scenario.density_regions[0].rho_thr == 0.8

    def test_regional_threshold_must_be_positive(self):
        """Test the regional threshold invariant"""
        data = get_two_exit_dict()
        data["density_regions"][0]["rho_thr_ped_per_m2"] = 0.0

        with pytest.raises(ScenarioValidationError):
            load_scenario_dict(data)

    def test_od_row_lookup(self):
        """Test OD row access by origin name"""
        assert list(self.scenario.od_matrix.row("a")) == [0.25, 0.75]
        with pytest.raises(KeyError):
            self.scenario.od_matrix.row("nowhere")

    def test_with_spawn_count(self):
        """Test redistributing the spawn count over the schedule"""
        scaled = self.scenario.with_spawn_count(11)

        assert scaled.total_agents == 11
        assert [e.count for e in scaled.spawn_schedule] == [6, 5]


class TestRoundTrip:
    """Test suite for serialize_scenario"""

    @pytest.mark.parametrize(
        "builder", [get_corridor_dict, get_two_wall_corridor_dict, get_two_exit_dict, get_gap_dict]
    )
    def test_serialize_then_load(self, builder):
        """Test that serialization parses back to equal objects"""
        scenario, params = load_scenario_dict(builder())

        again, again_params = load_scenario_dict(yaml.safe_load(serialize_scenario(scenario, params)))

        assert again == scenario
        assert again_params == params


class TestDensityAndSpeedHelpers:
    """Test suite for lattice helpers and speed sampling"""

    def test_quadratic_max_density(self):
        """Test 1/A for the 0.46 m square cell"""
        assert max_discrete_density("quadratic", 0.46) == pytest.approx(4.73, abs=0.01)
        assert max_discrete_density("quadratic", 1.0) == 1.0

    def test_triangular_max_density(self):
        """Test 4√3/(3a²) for a 0.80 m triangle"""
        rho = max_discrete_density("triangular", 0.80)

        assert rho == pytest.approx(4.0 * math.sqrt(3.0) / (3.0 * 0.64), rel=1e-12)
        assert rho == pytest.approx(3.6084, abs=1e-4)
        # the equilateral cell area is sqrt(3)/4 * a^2
        assert rho * math.sqrt(3.0) / 4.0 * 0.64 == pytest.approx(1.0)

    def test_max_density_rejects_bad_input(self):
        """Test edge and shape validation"""
        with pytest.raises(ValueError):
            max_discrete_density("quadratic", 0.0)
        with pytest.raises(ValueError):
            max_discrete_density("pentagonal", 1.0)

    def test_minimal_cell_edge(self):
        """Test the smallest edge holding a 0.23 m torso"""
        assert minimal_cell_edge("quadratic", 0.23) == pytest.approx(0.46)
        assert minimal_cell_edge("triangular", 0.23) == pytest.approx(0.797, abs=1e-3)

    def test_cfl_time_step(self):
        """Test the lattice CFL step"""
        assert cfl_time_step(0.46, 2.16) == pytest.approx(0.213, abs=1e-3)

    def test_to_microseconds(self):
        """Test exact microsecond conversion"""
        assert to_microseconds(0.05) == 50_000
        with pytest.raises(ValueError):
            to_microseconds(1e-7)

    def test_desired_speeds_truncated(self):
        """Test that sampled speeds stay inside [0.5, v_max]"""
        params = SimParams(v_desired_sigma=1.0)

        speeds = draw_desired_speeds(params, np.random.default_rng(0), 2000)

        assert speeds.min() >= 0.5
        assert speeds.max() <= params.v_max
        assert len(draw_desired_speeds(params, np.random.default_rng(0), 0)) == 0

    def test_desired_speeds_reproducible(self):
        """Test that equal seeds give equal speeds"""
        params = SimParams()

        a = draw_desired_speeds(params, np.random.default_rng(5), 10)
        b = draw_desired_speeds(params, np.random.default_rng(5), 10)

        assert np.array_equal(a, b)

    def test_zero_sigma_is_constant(self):
        """Test a degenerate speed distribution"""
        speeds = draw_desired_speeds(SimParams(v_desired_sigma=0.0), np.random.default_rng(0), 3)

        assert np.all(speeds == 1.34)

    def test_coerce_param_values(self):
        """Test file key mapping and type checks"""
        values = coerce_param_values({"dt_cont_s": 0.04, "k_max": 3.0, "mode": "pure-discrete"})

        assert values == {"dt_cont": 0.04, "k_max": 3, "mode": "pure-discrete"}
        with pytest.raises(ScenarioParseError):
            coerce_param_values({"dt_cont_s": "fast"})

    def test_derived_params(self):
        """Test r_place, w_tr and the transit width default"""
        params = SimParams()

        assert params.r_place == pytest.approx(2.16)
        assert params.w_tr == pytest.approx(2.376)
        assert math.isclose(params.cell_area, 0.2116)
