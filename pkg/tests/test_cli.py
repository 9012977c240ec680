import dataclasses

import pytest

from vantagefly.cli import build_parser, main
from vantagefly.config import TrainParams, WorkbenchConfig, dump_config


@pytest.fixture()
def tiny_ini(tmp_path):
    cfg = dataclasses.replace(
        WorkbenchConfig(),
        ddpg=dataclasses.replace(WorkbenchConfig().ddpg, hidden=(16, 16), batch_size=8),
        train=dataclasses.replace(TrainParams(), warmup_transitions=32,
                                  checkpoint_every=0, episodes=4),
    )
    path = tmp_path / "tiny.ini"
    path.write_text(dump_config(cfg))
    return path


def test_parser_has_all_verbs():
    parser = build_parser()
    subactions = next(a for a in parser._actions if a.dest == "command")
    assert set(subactions.choices) == {"train", "evaluate", "scenarios", "curves",
                                       "export", "serve"}


def test_train_evaluate_export_curves(tmp_path, tiny_ini, capsys):
    run_dir = tmp_path / "run"
    assert main(["train", "--config", str(tiny_ini), "--seed", "3",
                 "--agent", "pid", "--episodes", "2", "--out", str(run_dir)]) == 0
    ckpt = run_dir / "ckpt_final.npz"
    assert ckpt.exists()

    metrics_csv = tmp_path / "metrics.csv"
    assert main(["evaluate", "--config", str(tiny_ini), "--checkpoint", str(ckpt),
                 "--scenario", "1", "--out", str(metrics_csv)]) == 0
    lines = metrics_csv.read_text().strip().split("\n")
    assert lines[0] == "scenario,success,steps,final_distance,vel_variance"
    assert lines[1].startswith("1,1,")  # pid succeeds on scenario 1

    traj_csv = tmp_path / "traj.csv"
    assert main(["export", "--config", str(tiny_ini), "--checkpoint", str(ckpt),
                 "--scenario", "1", "--out", str(traj_csv)]) == 0
    assert traj_csv.read_text().startswith("t,x,y,z,yaw_deg")

    assert main(["curves", str(run_dir), "--window", "2",
                 "--out", str(tmp_path / "curves.csv")]) == 0
    out = capsys.readouterr().out
    assert "final_success_rate" in out
    assert (tmp_path / "curves.csv").exists()


def test_scenarios_listing(capsys):
    assert main(["scenarios"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert len(out) == 5  # header + 4 canonical scenarios
    assert out[1].startswith("1,")
