import pytest

from zeus.bench import (
    CSV_HEADER,
    AckleyAudit,
    PlanError,
    RunRecord,
    ackley_audit,
    count_within,
    emit_results,
    euclidean_error,
    parse_plan,
    read_records,
    run_experiment,
    speedup_study,
)
from zeus.bfgs import BfgsOutcome
from zeus.driver import ZeusConfig
from zeus.objectives import rastrigin


def record(**overrides):
    base = dict(
        experiment="exp", objective="rastrigin", dim=2, N=10, iter_pso=1,
        iter_bfgs=50, required_c=10, seed=7, rep=0, wall_time_s=0.25,
        best_f=0.125, best_point=(0.1, -0.2), euclid_error=0.22360679,
        n_correct=3, converged=8, diverged=1, stopped=1, domain_error=0,
    )
    base.update(overrides)
    return RunRecord(**base)


PLAN_TEXT = """
[plan]
repetitions = 2

[scan]
objective = rastrigin
dim = 2, 3
N = 6
iter_pso = 1
iter_bfgs = 40
required_c = 2
"""


class TestRecords:
    def test_csv_header_exact(self):
        assert CSV_HEADER == (
            "experiment,objective,dim,N,iter_pso,iter_bfgs,required_c,"
            "seed,rep,wall_time_s,best_f,euclid_error,n_correct,"
            "converged,diverged,stopped,domain_error"
        )

    def test_csv_row_field_count(self):
        row = record().csv_row()
        assert len(row.split(",")) == len(CSV_HEADER.split(","))

    def test_json_round_trip_identical(self):
        original = record(wall_time_s=0.1234567891234, best_f=1e-17)
        assert RunRecord.from_json(original.to_json()) == original

    def test_euclidean_error(self):
        assert euclidean_error((3.0, 4.0), (0.0, 0.0)) == 5.0
        assert euclidean_error((1.0, 1.0), (1.0, 1.0)) == 0.0

    def test_count_within(self):
        outcomes = [
            BfgsOutcome((0.1, 0.0), 0.0, 0.0, 1, "converged"),
            BfgsOutcome((2.0, 2.0), 8.0, 0.0, 1, "converged"),
            BfgsOutcome((0.0, 0.49), 0.0, 0.0, 1, "stopped"),
        ]
        assert count_within(outcomes, (0.0, 0.0)) == 2
        assert count_within(outcomes, (0.0, 0.0), radius=1e-6) == 0


class TestEmit:
    def test_empty_records_give_header_only_csv(self, tmp_path):
        path = emit_results([], "csv", tmp_path / "empty.csv")
        assert path.read_text() == CSV_HEADER + "\n"

    def test_csv_rows(self, tmp_path):
        records = [record(rep=i) for i in range(3)]
        path = emit_results(records, "csv", tmp_path / "three.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 4
        assert all(len(line.split(",")) == 17 for line in lines[1:])

    def test_jsonl_round_trip(self, tmp_path):
        records = [record(rep=i, best_f=i * 0.1) for i in range(5)]
        path = emit_results(records, "jsonl", tmp_path / "r.jsonl")
        assert read_records(path) == records

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results([], "parquet", tmp_path / "x")

    def test_unwritable_path_fails_before_partial_write(self, tmp_path):
        target = tmp_path / "missing" / "out.csv"
        with pytest.raises(OSError):
            emit_results([record()], "csv", target)
        assert not target.exists()


class TestPlan:
    def test_grid_expansion(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text(PLAN_TEXT)
        plan = parse_plan(path, base_seed=5)
        assert plan.repetitions == 2
        assert [e.experiment for e in plan.entries] == [
            "scan[dim=2]", "scan[dim=3]",
        ]
        assert all(e.config.N == 6 for e in plan.entries)
        assert plan.entries[1].config.dim == 3

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text("[scan]\nobjective = rastrigin\nturbo = 9\n")
        with pytest.raises(PlanError, match="turbo"):
            parse_plan(path, base_seed=0)

    def test_unknown_plan_key_rejected(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text("[plan]\nseed = 3\n[s]\nobjective = rastrigin\n")
        with pytest.raises(PlanError, match="seed"):
            parse_plan(path, base_seed=0)

    def test_unknown_objective_rejected_before_any_run(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text("[scan]\nobjective = sphere\n")
        with pytest.raises(KeyError):
            parse_plan(path, base_seed=0)

    def test_missing_file_is_io_error(self, tmp_path):
        with pytest.raises(OSError):
            parse_plan(tmp_path / "nope.ini", base_seed=0)

    def test_boolean_and_hyperparameter_keys(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text(
            "[s]\nobjective = rastrigin\ndeterministic = true\n"
            "w = 0.4\nc1_armijo = 0.2\nlower = -3\nupper = 3\n"
        )
        plan = parse_plan(path, base_seed=0)
        cfg = plan.entries[0].config
        assert cfg.deterministic is True
        assert cfg.pso.w == 0.4
        assert cfg.ls.c1_armijo == 0.2
        assert cfg.range == (-3.0, 3.0)


class TestRunExperiment:
    def test_single_config_single_rep(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text(
            "[plan]\nrepetitions = 1\n"
            "[one]\nobjective = rastrigin\ndim = 2\nN = 5\niter_pso = 1\n"
            "iter_bfgs = 60\n"
        )
        plan = parse_plan(path, base_seed=3)
        records = run_experiment(plan)
        assert len(records) == 1
        assert records[0].seed == 3
        assert records[0].N == 5

    def test_streams_partial_results(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text(
            "[plan]\nrepetitions = 2\noutput = %s\n"
            "[one]\nobjective = rastrigin\ndim = 2\nN = 4\niter_pso = 0\n"
            "iter_bfgs = 60\n" % (tmp_path / "results")
        )
        plan = parse_plan(path, base_seed=1)
        records = run_experiment(plan)
        streamed = read_records(tmp_path / "results.jsonl")
        assert streamed == records

    def test_deterministic_reproducibility(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text(
            "[plan]\nrepetitions = 2\n"
            "[one]\nobjective = rastrigin\ndim = 2\nN = 8\niter_pso = 1\n"
            "iter_bfgs = 80\ndeterministic = true\n"
        )
        plan = parse_plan(path, base_seed=9)
        first = run_experiment(plan)
        second = run_experiment(parse_plan(path, base_seed=9))
        for a, b in zip(first, second):
            assert a.euclid_error == b.euclid_error
            assert a.best_f == b.best_f
            assert a.best_point == b.best_point

    def test_n_correct_at_most_n(self, tmp_path):
        path = tmp_path / "plan.ini"
        path.write_text(
            "[one]\nobjective = rastrigin\ndim = 2\nN = 10\niter_pso = 2\n"
            "iter_bfgs = 100\n"
        )
        plan = parse_plan(path, base_seed=2)
        for rec in run_experiment(plan):
            assert 0 <= rec.n_correct <= rec.N


class TestSpeedupStudy:
    def test_needs_five_reps(self):
        cfg = ZeusConfig(N=4, dim=2, range=(-1.0, 1.0))
        with pytest.raises(ValueError):
            speedup_study(rastrigin, cfg, [1, 2], repetitions=3)

    def test_baseline_row_is_one(self):
        cfg = ZeusConfig(N=40, dim=2, range=(-5.12, 5.12), iter_pso=0,
                         iter_bfgs=30, seed=3)
        rows = speedup_study(rastrigin, cfg, [1], repetitions=5)
        assert rows[0].workers == 1
        assert rows[0].speedup == 1.0


class TestAckleyAudit:
    def test_flags_both_populations(self):
        audit = ackley_audit(n=250, seed=1, workers=0)
        assert isinstance(audit, AckleyAudit)
        assert audit.flagged
        for index, distance in audit.diverged_near_origin:
            assert distance < 0.1
            assert audit.result.per_run[index].status == "diverged"
        for index, value in audit.converged_high:
            assert value > 1.0
            assert audit.result.per_run[index].status == "converged"
