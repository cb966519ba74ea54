from gatesim.cli import main
from gatesim.harness import EpisodeConfig, write_episode_config, write_grid_cells_csv
from gatesim.harness import GridCell
from gatesim.pgnn import load_params, mlp_forward


def test_profile_energy(tmp_path, capsys):
    out = tmp_path / "profile.csv"
    code = main(["profile-energy", "--depth", "4", "--depth", "6", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "depth,v,energy_J"
    assert len(lines) == 33  # two depths x 16 velocities
    assert "hover" in capsys.readouterr().out


def test_profile_energy_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["profile-energy", "--depth", "3", "--out", str(a)]) == 0
    assert main(["profile-energy", "--depth", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_train_pgnn(tmp_path):
    params_path = tmp_path / "params.npz"
    curve_path = tmp_path / "curve.csv"
    code = main([
        "train-pgnn", "--epochs", "30", "--seed", "1",
        "--out", str(params_path), "--loss-curve", str(curve_path),
    ])
    assert code == 0
    params = load_params(params_path)
    v = mlp_forward(params, 4.0)
    assert 0.5 <= v <= 20.0
    lines = curve_path.read_text().splitlines()
    assert lines[0] == "epoch,mse,physics_term,total"
    assert len(lines) == 31


def test_train_pgnn_from_csv_dataset(tmp_path, dataset):
    from gatesim.fitting import write_dataset_csv

    data_path = tmp_path / "dataset.csv"
    write_dataset_csv(dataset, data_path)
    out = tmp_path / "params.npz"
    code = main([
        "train-pgnn", "--dataset", str(data_path), "--epochs", "10",
        "--lambda", "0", "--out", str(out),
    ])
    assert code == 0
    assert out.exists()


def test_run_episode_command(tmp_path, capsys):
    cfg_path = tmp_path / "episode.ini"
    write_episode_config(EpisodeConfig(seed=7), cfg_path)
    traj_path = tmp_path / "traj.csv"
    code = main([
        "run", "--config", str(cfg_path), "--epochs", "50",
        "--trajectory-out", str(traj_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "success:" in out and "energy_J:" in out
    assert traj_path.read_text().startswith("t,x,y,vx,vy,ax,ay")


def test_benchmark_deterministic(tmp_path):
    grid_path = tmp_path / "grid.csv"
    write_grid_cells_csv([GridCell(2.0, 0.0, 2.0), GridCell(3.0, 1.0, 1.0)], grid_path)
    outs = [tmp_path / "r1.csv", tmp_path / "r2.csv"]
    for out in outs:
        code = main([
            "benchmark", "--grid", str(grid_path), "--out", str(out),
            "--runs", "2", "--epochs", "30", "--seed", "5",
        ])
        assert code == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()
    assert outs[0].read_text().splitlines()[0].startswith("drone_x,")


def test_ablation_command(tmp_path, capsys):
    out = tmp_path / "ablation.csv"
    code = main(["ablation", "--out", str(out), "--runs", "1", "--epochs", "30"])
    assert code == 0
    assert len(out.read_text().splitlines()) == 5
    assert "corner energy ratio" in capsys.readouterr().out


def test_errors_exit_nonzero(tmp_path, capsys):
    code = main(["run", "--config", str(tmp_path / "missing.ini")])
    assert code == 1
    assert "error:" in capsys.readouterr().err

    code = main(["profile-energy", "--depth", "-4", "--out", str(tmp_path / "x.csv")])
    assert code == 1
