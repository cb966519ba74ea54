import numpy as np
import pytest

from gatesim.harness import (
    DEPTH_LATENCY,
    EVENT_LATENCY,
    EpisodeConfig,
    GridCell,
    ablation_energy_ratio,
    ablation_matrix,
    crossing_success,
    default_success_grid,
    derive_run_config,
    energy_comparison,
    energy_suite_cells,
    load_episode_config,
    load_grid_csv,
    run_episode,
    success_rate_grid,
    write_ablation_csv,
    write_episode_config,
    write_grid_cells_csv,
    write_grid_csv,
)
from gatesim.motor import motor_power


class TestEpisodeConfig:
    def test_latency_defaults(self):
        assert EpisodeConfig(perception_mode="event-snn").latency == EVENT_LATENCY
        assert EpisodeConfig(perception_mode="depth-baseline").latency == DEPTH_LATENCY
        assert EpisodeConfig(perception_latency=0.5).latency == 0.5

    def test_depth_is_distance_to_gate_plane(self):
        assert EpisodeConfig(drone_x=2.0, gate_plane_x=-2.0).depth == 4.0

    def test_validation(self):
        with pytest.raises(ValueError):
            EpisodeConfig(perception_mode="sonar")
        with pytest.raises(ValueError):
            EpisodeConfig(planner_mode="oracle")
        with pytest.raises(ValueError):
            EpisodeConfig(drone_x=-3.0)
        with pytest.raises(ValueError):
            EpisodeConfig(runs_per_point=0)
        with pytest.raises(ValueError):
            EpisodeConfig(perception_latency=-0.1)


class TestCrossingSuccess:
    def test_threshold_contract(self):
        # clearance = 1.0 - 0.25 = 0.75
        assert crossing_success(0.74, 1.0, 0.25)
        assert not crossing_success(0.76, 1.0, 0.25)
        assert not crossing_success(0.75, 1.0, 0.25)


class TestRunEpisode:
    def test_event_mode_succeeds_at_center_start(self, quick_models):
        cfg = EpisodeConfig(drone_x=2.0, drone_y=0.0, gate_y0=2.0,
                            gate_speed=0.5, seed=7)
        res = run_episode(cfg, quick_models)
        assert res.success
        assert not res.tracking_lost
        assert res.miss_distance < 0.75
        assert res.timing["sensing"] == pytest.approx(0.2)
        assert res.timing["latency"] == EVENT_LATENCY

    def test_energy_accounting_identity(self, quick_models):
        cfg = EpisodeConfig(seed=3)
        res = run_episode(cfg, quick_models)
        assert res.energy_J == pytest.approx(
            res.hover_energy_J + res.flight_energy_J, rel=1e-12
        )
        hover_power = 4.0 * motor_power(
            quick_models.coeffs, quick_models.flight.hover_speed
        )
        expected = hover_power * (res.timing["sensing"] + res.timing["latency"])
        assert res.hover_energy_J == pytest.approx(expected, rel=1e-12)
        assert res.energy_J > 0

    def test_depth_baseline_pays_latency_surplus(self, quick_models):
        world = dict(drone_x=2.0, drone_y=0.0, gate_y0=2.0, gate_speed=0.5, seed=7)
        ev = run_episode(EpisodeConfig(**world, perception_mode="event-snn"),
                         quick_models)
        dp = run_episode(EpisodeConfig(**world, perception_mode="depth-baseline"),
                         quick_models)
        surplus = dp.energy_J - ev.energy_J
        # 2 s extra hover at ~124 W, give or take the different flight path
        assert surplus == pytest.approx(248.0, abs=25.0)

    def test_tracking_lost_when_gate_invisible(self, quick_models):
        cfg = EpisodeConfig(drone_x=0.0, drone_y=-2.0, gate_y0=1.95,
                            gate_speed=0.2, seed=1)
        res = run_episode(cfg, quick_models)
        assert res.tracking_lost
        assert not res.success
        assert res.flight_energy_J == 0.0
        assert res.miss_distance == float("inf")
        assert res.energy_J > 0  # hovered while trying

    def test_tracking_lost_when_bin_budget_runs_out(self, quick_models):
        # one charged bin can only ever yield one track
        cfg = EpisodeConfig(max_sensing_bins=1, seed=1)
        res = run_episode(cfg, quick_models)
        assert res.tracking_lost
        assert res.timing["sensing"] == pytest.approx(0.1)

    def test_same_seed_is_bit_identical(self, quick_models):
        cfg = EpisodeConfig(seed=11)
        a = run_episode(cfg, quick_models)
        b = run_episode(cfg, quick_models)
        assert a == b

    def test_trajectory_export(self, quick_models, tmp_path):
        path = tmp_path / "flight.csv"
        run_episode(EpisodeConfig(seed=5), quick_models, trajectory_out=path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,x,y,vx,vy,ax,ay"
        assert len(lines) > 100

    def test_vanilla_planner_runs(self, quick_models):
        res = run_episode(EpisodeConfig(planner_mode="vanilla-ann", seed=2),
                          quick_models)
        assert res.t_traj > 0


class TestRunDerivation:
    def test_modes_share_worlds(self):
        cell = GridCell(2.0, 1.0, -1.0)
        a = derive_run_config(cell, 3, base_seed=5, cell_idx=2)
        b = derive_run_config(cell, 3, base_seed=5, cell_idx=2)
        assert a == b

    def test_alternation_flips_sides(self):
        cell = GridCell(2.0, 1.0, -1.0, alternate=True)
        even = derive_run_config(cell, 0)
        odd = derive_run_config(cell, 1)
        assert even.drone_y == 1.0 and odd.drone_y == -1.0
        assert np.sign(even.gate_y0) != np.sign(odd.gate_y0)

    def test_jitter_stays_in_bounds(self):
        cell = GridCell(2.0, 0.0, 2.0)
        for run in range(20):
            cfg = derive_run_config(cell, run)
            assert abs(cfg.gate_y0) <= cfg.gate_bound - 0.049
            assert 0.5 * 0.74 <= abs(cfg.gate_speed) <= 0.5 * 1.26


class TestSuites:
    def test_success_rate_grid_shape(self, quick_models):
        cells = default_success_grid()[:2]
        results = success_rate_grid(cells, quick_models, runs=2)
        assert len(results) == 4  # 2 cells x 2 modes
        for r in results:
            assert 0.0 <= r.success_rate <= 1.0
            assert r.mean_energy_J > 0

    def test_grid_requires_cells(self, quick_models):
        with pytest.raises(ValueError):
            success_rate_grid([], quick_models)

    def test_default_grid_is_table_shaped(self):
        cells = default_success_grid()
        assert len(cells) == 15
        assert sorted({c.drone_x for c in cells}) == [0.0, 1.0, 2.0, 3.0, 4.0]
        assert len(energy_suite_cells()) == 25

    def test_energy_comparison_pairing(self, quick_models):
        comp = energy_comparison(
            quick_models, cells=[GridCell(2.0, 0.0, 2.0)], runs=3
        )
        assert comp.n_pairs <= 3
        assert comp.mean_depth_J > comp.mean_event_J

    def test_ablation_matrix_cells(self, quick_models):
        cells = ablation_matrix(quick_models, runs=3)
        assert len(cells) == 4
        combos = {(c.perception_mode, c.planner_mode) for c in cells}
        assert len(combos) == 4
        best = min(cells, key=lambda c: c.mean_energy_J)
        by_key = {(c.perception_mode, c.planner_mode): c for c in cells}
        ev_pgnn = by_key[("event-snn", "pgnn")]
        assert ev_pgnn.mean_energy_J <= best.mean_energy_J + 1e-9
        assert ablation_energy_ratio(cells) > 1.0


class TestCsvAndConfig:
    def test_grid_csv_deterministic(self, quick_models, tmp_path):
        cells = default_success_grid()[:2]
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            write_grid_csv(success_rate_grid(cells, quick_models, runs=2), p)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        header = paths[0].read_text().splitlines()[0]
        assert header == "drone_x,drone_y,gate_y0,gate_speed,mode,success_rate,mean_energy_J"

    def test_ablation_csv(self, quick_models, tmp_path):
        cells = ablation_matrix(quick_models, runs=2)
        path = tmp_path / "ablation.csv"
        write_ablation_csv(cells, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "perception_mode,planner_mode,mean_energy_J,success_rate"
        assert len(lines) == 5

    def test_episode_config_roundtrip(self, tmp_path):
        cfg = EpisodeConfig(
            drone_x=3.0, drone_y=-1.0, gate_y0=0.5, gate_speed=-0.4,
            perception_mode="depth-baseline", planner_mode="vanilla-ann",
            depth_noise_sigma=0.02, seed=17,
        )
        path = tmp_path / "episode.ini"
        write_episode_config(cfg, path)
        assert load_episode_config(path) == cfg

    def test_episode_config_default_latency_roundtrip(self, tmp_path):
        cfg = EpisodeConfig(perception_latency=None)
        path = tmp_path / "episode.ini"
        write_episode_config(cfg, path)
        loaded = load_episode_config(path)
        assert loaded.perception_latency is None
        cfg = EpisodeConfig(perception_latency=1.5)
        write_episode_config(cfg, path)
        assert load_episode_config(path).perception_latency == 1.5

    def test_grid_cells_csv_roundtrip(self, tmp_path):
        cells = default_success_grid()
        path = tmp_path / "grid.csv"
        write_grid_cells_csv(cells, path)
        loaded = load_grid_csv(path)
        assert loaded == cells
