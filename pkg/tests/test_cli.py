import json

import zeus.cli as cli
from zeus.driver import NoValidOptimumError


class TestRun:
    def test_json_output(self, capsys):
        code = cli.main([
            "run", "--objective", "rastrigin", "--dim", "2", "--N", "50",
            "--iter_pso", "1", "--iter_bfgs", "100", "--required_c", "5",
            "--seed", "3", "--json",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["objective"] == "rastrigin"
        assert payload["converged_count"] >= 5
        assert len(payload["best_x"]) == 2

    def test_range_override(self, capsys):
        code = cli.main([
            "run", "--objective", "rastrigin", "--dim", "2", "--N", "20",
            "--iter_pso", "0", "--iter_bfgs", "50", "--seed", "1",
            "--range", "-1.0", "1.0", "--json",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["best_f"] < 2.0  # narrow box keeps starts near 0

    def test_unknown_objective_is_config_error(self, capsys):
        code = cli.main(["run", "--objective", "sphere"])
        assert code == cli.EXIT_CONFIG

    def test_bad_config_is_config_error(self, capsys):
        code = cli.main([
            "run", "--objective", "rastrigin", "--N", "4",
            "--required_c", "9",
        ])
        assert code == cli.EXIT_CONFIG

    def test_all_runs_failed_maps_to_exit_2(self, monkeypatch, capsys):
        def explode(f, cfg):
            raise NoValidOptimumError("all runs ended in domain errors")

        monkeypatch.setattr(cli, "zeus_run", explode)
        code = cli.main(["run", "--objective", "rastrigin", "--N", "4"])
        assert code == cli.EXIT_ALL_FAILED


class TestBench:
    def test_plan_end_to_end(self, tmp_path, capsys):
        plan = tmp_path / "plan.ini"
        plan.write_text(
            "[plan]\nrepetitions = 1\n"
            "[tiny]\nobjective = rastrigin\ndim = 2\nN = 6\niter_pso = 1\n"
            "iter_bfgs = 60\n"
        )
        out_base = tmp_path / "results"
        code = cli.main([
            "bench", "--plan", str(plan), "--seed", "4",
            "--output", str(out_base),
        ])
        assert code == 0
        csv_lines = (tmp_path / "results.csv").read_text().splitlines()
        assert len(csv_lines) == 2
        assert (tmp_path / "results.jsonl").exists()

    def test_seed_required(self, capsys):
        code = cli.main(["bench", "--plan", "whatever.ini"])
        assert code == cli.EXIT_CONFIG

    def test_missing_plan_is_io_error(self, tmp_path, capsys):
        code = cli.main([
            "bench", "--plan", str(tmp_path / "nope.ini"), "--seed", "1",
        ])
        assert code == cli.EXIT_IO

    def test_bad_plan_key_is_config_error(self, tmp_path, capsys):
        plan = tmp_path / "plan.ini"
        plan.write_text("[tiny]\nobjective = rastrigin\nwarp = 9\n")
        code = cli.main([
            "bench", "--plan", str(plan), "--seed", "1",
            "--output", str(tmp_path / "r"),
        ])
        assert code == cli.EXIT_CONFIG


class TestFit:
    def test_demo_fit(self, tmp_path, capsys):
        report = tmp_path / "report.txt"
        code = cli.main([
            "fit", "--demo", "--seed", "2", "--report", str(report),
        ])
        assert code == 0
        assert "chi_square" in report.read_text()

    def test_data_file_fit(self, tmp_path, capsys):
        import numpy as np

        from zeus.fitting import (
            falling_spectrum,
            generate_spectrum_data,
            save_dataset,
        )

        model = falling_spectrum(scale=6000.0)
        edges = np.linspace(1200.0, 4800.0, 21)
        data = generate_spectrum_data(model, (50.0, 10.0, 5.0), edges)
        path = tmp_path / "data.txt"
        save_dataset(data, path)
        code = cli.main([
            "fit", "--data", str(path), "--scale", "6000", "--seed", "1",
        ])
        assert code == 0
        assert "pulls within +-2" in capsys.readouterr().out

    def test_needs_data_or_demo(self, capsys):
        assert cli.main(["fit"]) == cli.EXIT_CONFIG


class TestAudit:
    def test_audit_runs(self, capsys):
        code = cli.main(["ackley-audit", "--N", "200", "--seed", "1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "FLAGS both populations" in out
