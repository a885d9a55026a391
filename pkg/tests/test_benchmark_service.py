import logging

import pytest
from pydantic import ValidationError

from app.config.settings import settings
from app.schemas.config import BenchmarkConfig
from app.schemas.report import BenchmarkReport, InstanceSetDescriptor
from app.services.benchmark_service import BenchmarkRunner, run_benchmark, run_tsplib_benchmark
from app.services.checkpoint_service import save_checkpoint
from app.services.instance_service import generate_instances
from app.services.oracle_service import held_karp
from app.utils.errors import OracleInconsistencyError


def small_config(**overrides) -> BenchmarkConfig:
    values = dict(n=8, count=5, seed=3, steps=30,
                  methods=["nearest", "random", "farthest", "fi", "bi", "bi+restarts", "held-karp"])
    values.update(overrides)
    return BenchmarkConfig(**values)


def test_rows_follow_requested_methods():
    report = run_benchmark(small_config())
    assert [row.method for row in report.rows] == ["nearest", "random", "farthest", "fi", "bi", "bi+restarts", "held-karp"]
    assert report.instances == InstanceSetDescriptor(n=8, count=5, seed=3, name="uniform")


def test_no_method_beats_the_oracle():
    report = run_benchmark(small_config())
    oracle = report.row("held-karp")
    assert oracle.mean_gap_pct == pytest.approx(0.0, abs=1e-9)
    for row in report.rows:
        assert row.mean_cost >= oracle.mean_cost - 1e-9
        assert row.mean_gap_pct >= 0.0


def test_improvement_rows_report_steps():
    report = run_benchmark(small_config())
    assert report.row("bi+restarts").steps == 30
    assert 0 < report.row("bi").steps <= 30
    assert report.row("farthest").steps is None


def test_without_oracle_there_is_no_gap():
    report = run_benchmark(small_config(methods=["farthest", "bi"]))
    assert all(row.mean_gap_pct is None for row in report.rows)


def test_oracle_refused_above_cap(monkeypatch):
    monkeypatch.setattr(settings, "ORACLE_MAX_NODES", 6)
    report = run_benchmark(small_config(methods=["farthest", "held-karp"]))
    refused = report.row("held-karp")
    assert refused.refused
    assert "recusado" in refused.note
    assert report.row("farthest").mean_gap_pct is None


def test_large_uniform_sets_use_published_reference():
    report = run_benchmark(small_config(n=50, count=3, methods=["farthest"]))
    row = report.row("farthest")
    assert row.mean_gap_pct is not None
    assert "publicado" in row.note


def test_csv_is_deterministic_and_parses_back():
    first = run_benchmark(small_config()).to_csv()
    second = run_benchmark(small_config()).to_csv()
    assert first == second
    assert first.startswith("# n=8,count=5,seed=3,name=uniform\n")
    parsed = BenchmarkReport.from_csv(first)
    assert [row.method for row in parsed.rows] == [row.method for row in BenchmarkReport.from_csv(second).rows]
    assert parsed.row("held-karp").mean_gap_pct == pytest.approx(0.0, abs=1e-6)


def test_wallclock_only_when_requested():
    assert all(row.wallclock_s == 0.0 for row in run_benchmark(small_config(methods=["bi"])).rows)
    timed = run_benchmark(small_config(methods=["bi"], record_wallclock=True))
    assert timed.row("bi").wallclock_s > 0.0


def test_threads_do_not_change_results():
    serial = run_benchmark(small_config(methods=["random", "fi", "held-karp"]))
    threaded = run_benchmark(small_config(methods=["random", "fi", "held-karp"], threads=3))
    assert serial.to_csv() == threaded.to_csv()


def test_policy_method(tmp_path, tiny_params):
    path = save_checkpoint(tiny_params, tmp_path / "policy.o2rl")
    report = run_benchmark(small_config(methods=[f"policy:{path}", "held-karp"], steps=5))
    row = report.row(f"policy:{path}")
    assert row.steps == 5
    assert row.mean_cost >= report.row("held-karp").mean_cost - 1e-9


def test_supplied_instances():
    instances = generate_instances(7, 3, seed=5)
    report = run_benchmark(small_config(methods=["nearest"]), instances=instances)
    assert report.instances.n == 7
    assert report.instances.count == 3


def test_tsplib_benchmark(fixtures_dir):
    config = small_config(methods=["farthest", "bi"], steps=200)
    reports = run_tsplib_benchmark([fixtures_dir / "square10.tsp", fixtures_dir / "eil51.tsp"], config)
    square, eil51 = reports
    assert square.instances.name == "square10"
    assert square.row("farthest").mean_cost >= 100.0
    assert square.row("bi").mean_cost == 100.0
    assert square.row("farthest").mean_gap_pct is None
    assert eil51.instances.n == 51
    assert eil51.row("bi").mean_gap_pct >= 0.0
    assert float(eil51.row("bi").mean_cost).is_integer()


def test_cost_below_known_optimum_is_an_error():
    instances = generate_instances(7, 3, seed=5)
    descriptor = InstanceSetDescriptor(n=7, count=3, seed=5)
    optima = [held_karp(inst)[1] for inst in instances]
    optima[1] *= 1.05
    runner = BenchmarkRunner(small_config(methods=["held-karp"]))
    with pytest.raises(OracleInconsistencyError):
        runner.run(instances, descriptor, lambda tour, _: tour.length, optima)


@pytest.mark.parametrize("methods", [[], ["unknown"], ["policy:"]])
def test_config_rejects_bad_methods(methods):
    with pytest.raises(ValidationError):
        BenchmarkConfig(methods=methods)


def test_tour_seed_defaults_to_seed_plus_one():
    assert BenchmarkConfig(seed=10).start_seed == 11
    assert BenchmarkConfig(seed=10, tour_seed=4).start_seed == 4


def test_improvement_methods_share_initial_tours(caplog):
    with caplog.at_level(logging.DEBUG, logger="app.services.benchmark_service"):
        run_benchmark(small_config(methods=["fi", "bi+restarts"]))
    digests = {record.getMessage().split(": ")[-1] for record in caplog.records if "Tours iniciais" in record.getMessage()}
    assert len(digests) == 1
