import csv
import json

import pytest

from app.cli import main
from app.schemas.report import BenchmarkReport
from app.services.checkpoint_service import save_checkpoint
from app.services.instance_service import load_instances

TINY_TRAIN = [
    "train", "--n", "6", "--epochs", "1", "--batches", "1", "--batch-size", "2", "--total-steps", "2",
    "--schedule", "1:2", "--d", "8", "--layers", "1", "--val-size", "2", "--val-steps", "2",
]


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def test_gen(tmp_path):
    assert main(["--seed", "3", "--out", str(tmp_path), "gen", "--n", "6", "--count", "4"]) == 0
    instances, descriptor = load_instances(tmp_path / "instances_n6_s3.npz")
    assert len(instances) == 4
    assert descriptor.seed == 3


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "run.env"
    config.write_text(f"SEED=5\nOUT={tmp_path / 'from_file'}\n")
    assert main(["--config", str(config), "gen", "--n", "6", "--count", "2"]) == 0
    assert (tmp_path / "from_file" / "instances_n6_s5.npz").exists()

    assert main(["--config", str(config), "--seed", "9", "gen", "--n", "6", "--count", "2"]) == 0
    assert (tmp_path / "from_file" / "instances_n6_s9.npz").exists()


def test_missing_config_file(tmp_path):
    with pytest.raises(SystemExit):
        main(["--config", str(tmp_path / "nope.env"), "gen", "--n", "6", "--count", "2"])


@pytest.mark.parametrize("solver", ["held-karp", "brute-force"])
def test_oracle(tmp_path, solver):
    assert main(["--out", str(tmp_path), "oracle", "--n", "6", "--count", "3", "--solver", solver]) == 0
    rows = read_csv(tmp_path / "oracle.csv")
    assert [row["instance"] for row in rows] == ["0", "1", "2"]
    assert all(float(row["optimal_cost"]) > 0 for row in rows)
    if solver == "brute-force":
        assert rows[0]["tour"].split()[0] == "0"


def test_oracle_solvers_agree(tmp_path):
    main(["--out", str(tmp_path / "hk"), "oracle", "--n", "7", "--count", "4"])
    main(["--out", str(tmp_path / "bf"), "oracle", "--n", "7", "--count", "4", "--solver", "brute-force"])
    held_karp = [row["optimal_cost"] for row in read_csv(tmp_path / "hk" / "oracle.csv")]
    brute_force = [row["optimal_cost"] for row in read_csv(tmp_path / "bf" / "oracle.csv")]
    assert held_karp == brute_force


def test_bench_on_saved_instances(tmp_path, capsys):
    main(["--seed", "4", "--out", str(tmp_path), "gen", "--n", "7", "--count", "3"])
    code = main([
        "--seed", "4", "--out", str(tmp_path), "bench",
        "--instances", str(tmp_path / "instances_n7_s4.npz"), "--methods", "farthest,bi,held-karp", "--steps", "20",
    ])
    assert code == 0
    report = BenchmarkReport.from_csv((tmp_path / "bench.csv").read_text())
    assert [row.method for row in report.rows] == ["farthest", "bi", "held-karp"]
    assert report.instances.count == 3
    assert "held-karp" in capsys.readouterr().out


def test_bench_tsplib(tmp_path, fixtures_dir):
    code = main(["--out", str(tmp_path), "bench", "--tsplib", str(fixtures_dir / "square10.tsp"), "--methods", "bi"])
    assert code == 0
    report = BenchmarkReport.from_csv((tmp_path / "bench_square10.csv").read_text())
    assert report.row("bi").mean_cost == 100.0


def test_bench_unknown_method_fails(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "bench", "--n", "6", "--count", "2", "--methods", "magic"]) == 1
    assert "❌" in capsys.readouterr().err


def test_train_then_eval(tmp_path):
    run_dir = tmp_path / "run"
    assert main(["--seed", "2", "--out", str(run_dir)] + TINY_TRAIN) == 0
    assert len(read_csv(run_dir / "metrics.csv")) == 1
    checkpoint = run_dir / "checkpoints" / "last.o2rl"
    assert checkpoint.exists()

    code = main([
        "--out", str(tmp_path / "eval"), "eval", "--ckpt", str(checkpoint), "--n", "6", "--count", "4",
        "--steps", "5", "--report-steps", "2,3", "--random-baseline", "--trials", "2",
    ])
    assert code == 0
    rows = read_csv(tmp_path / "eval" / "eval.csv")
    assert [row["steps"] for row in rows] == ["2", "3", "5"]
    costs = [float(row["mean_cost"]) for row in rows]
    assert costs == sorted(costs, reverse=True)
    assert all(float(row["mean_gap_pct"]) >= 0.0 for row in rows)


def test_train_ablation_flags(tmp_path):
    run_dir = tmp_path / "ablation"
    assert main(["--out", str(run_dir)] + TINY_TRAIN + ["--no-lstm", "--share-encoders"]) == 0
    code = main(["inspect-ckpt", str(run_dir / "checkpoints" / "last.o2rl")])
    assert code == 0


def test_train_reads_values_from_config_file(tmp_path):
    config = tmp_path / "train.env"
    config.write_text("EPOCHS=2\nBATCHES_PER_EPOCH=1\n")
    flags = TINY_TRAIN[:]
    del flags[flags.index("--epochs"):flags.index("--epochs") + 2]
    del flags[flags.index("--batches"):flags.index("--batches") + 2]
    assert main(["--config", str(config), "--out", str(tmp_path / "run")] + flags) == 0
    assert len(read_csv(tmp_path / "run" / "metrics.csv")) == 2


def test_eval_tsplib(tmp_path, fixtures_dir, tiny_params, capsys):
    checkpoint = save_checkpoint(tiny_params, tmp_path / "policy.o2rl")
    code = main(["eval", "--ckpt", str(checkpoint), "--tsplib", str(fixtures_dir / "square10.tsp"), "--steps", "5"])
    assert code == 0
    assert "square10" in capsys.readouterr().out


def test_inspect_checkpoint(tmp_path, tiny_params, capsys):
    checkpoint = save_checkpoint(tiny_params, tmp_path / "policy.o2rl")
    assert main(["inspect-ckpt", str(checkpoint)]) == 0
    described = json.loads(capsys.readouterr().out)
    assert described["config"]["d"] == 8


def test_corrupt_checkpoint_exit_code(tmp_path, capsys):
    broken = tmp_path / "broken.o2rl"
    broken.write_bytes(b"nope")
    assert main(["inspect-ckpt", str(broken)]) == 1
    assert "❌" in capsys.readouterr().err


def test_invalid_size_exit_code(tmp_path):
    assert main(["--out", str(tmp_path), "gen", "--n", "2", "--count", "3"]) == 1
