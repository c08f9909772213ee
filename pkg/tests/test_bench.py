import numpy as np
import pytest

from postbench.bench import (
    BASELINE,
    AnfisSettings,
    EsnSettings,
    RunConfig,
    SvrSettings,
    emit_report,
    load_config,
    mse,
    run_experiment,
)


@pytest.fixture()
def quick_config(fixture_path):
    return RunConfig(data_path=fixture_path, models=("esn",),
                     targets=("shares",), seeds=(1,))


class TestMse:
    def test_perfect_prediction(self):
        assert mse([0.1, 0.5, 0.9], [0.1, 0.5, 0.9]) == 0.0

    def test_constant_offset(self):
        y = np.array([0.0, 1.0, 2.0])
        assert mse(y + 1.0, y) == 1.0

    def test_hand_evaluated(self):
        assert mse([0.0, 0.5], [0.5, 0.5]) == pytest.approx(0.125, abs=1e-15)

    def test_errors(self):
        with pytest.raises(ValueError):
            mse([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            mse([], [])


class TestRunConfig:
    def test_defaults_mirror_model_defaults(self, fixture_path):
        config = RunConfig(data_path=fixture_path)
        assert config.esn == EsnSettings(25, 0.5, 1.0, 10, 1e-6)
        assert config.svr == SvrSettings(1000.0, 0.1, 0.1, 1e-3, 10000)
        assert config.anfis == AnfisSettings(3, 0.01, 1e-6, 2)
        assert config.seeds == tuple(range(1, 11))

    def test_validation(self, fixture_path):
        with pytest.raises(ValueError):
            RunConfig(data_path=fixture_path, models=())
        with pytest.raises(ValueError):
            RunConfig(data_path=fixture_path, models=("mlp",))
        with pytest.raises(ValueError):
            RunConfig(data_path=fixture_path, targets=("retweets",))

    def test_digest_tracks_content(self, fixture_path):
        a = RunConfig(data_path=fixture_path)
        b = RunConfig(data_path=fixture_path)
        c = RunConfig(data_path=fixture_path, seeds=(1, 2))
        assert a.digest() == b.digest()
        assert a.digest() != c.digest()

    def test_ini_round_trip(self, fixture_path, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text(
            "[data]\n"
            f"path = {fixture_path}\n"
            "[split]\n"
            "n_train = 300\n"
            "shuffle = false\n"
            "[run]\n"
            "models = svr,anfis\n"
            "targets = likes\n"
            "seeds = 3,4\n"
            f"output_dir = {tmp_path / 'out'}\n"
            "[svr]\n"
            "C = 10\n"
            "epsilon = 0.05\n"
            "[anfis]\n"
            "epochs = 1\n"
        )
        config = load_config(ini)
        assert config.n_train == 300 and config.shuffle is False
        assert config.models == ("svr", "anfis")
        assert config.targets == ("likes",)
        assert config.seeds == (3, 4)
        assert config.svr.C == 10.0 and config.svr.epsilon == 0.05
        assert config.svr.gamma == 0.1  # untouched default
        assert config.anfis.epochs == 1

    def test_unknown_keys_rejected(self, fixture_path, tmp_path):
        ini = tmp_path / "bad.ini"
        ini.write_text(f"[data]\npath = {fixture_path}\n[esn]\nneurons = 10\n")
        with pytest.raises(ValueError, match="neurons"):
            load_config(ini)
        ini.write_text(f"[data]\npath = {fixture_path}\n[extra]\nx = 1\n")
        with pytest.raises(ValueError, match="extra"):
            load_config(ini)

    def test_data_path_required(self, tmp_path):
        ini = tmp_path / "nodata.ini"
        ini.write_text("[run]\nseeds = 1\n")
        with pytest.raises(ValueError, match="data"):
            load_config(ini)

    def test_output_dir_env_override(self, fixture_path, monkeypatch):
        config = RunConfig(data_path=fixture_path)
        monkeypatch.setenv("POSTBENCH_OUTPUT_DIR", "/tmp/elsewhere")
        assert str(config.effective_output_dir()) == "/tmp/elsewhere"


class TestRunExperiment:
    def test_single_cell_plus_baseline(self, quick_config):
        report = run_experiment(quick_config)
        assert set(report.cells) == {("esn", "shares"), (BASELINE, "shares")}
        cell = report.cells[("esn", "shares")]
        assert cell.ok and len(cell.test_mse) == 1
        assert all(v >= 0.0 for v in cell.test_mse + cell.train_mse)

    def test_full_grid_shape(self, fixture_path):
        config = RunConfig(data_path=fixture_path, seeds=(1,))
        report = run_experiment(config)
        model_cells = [c for k, c in report.cells.items() if k[0] != BASELINE]
        assert len(model_cells) == 9
        assert all(c.ok for c in report.cells.values())

    def test_models_beat_baseline_on_train(self, fixture_path):
        config = RunConfig(data_path=fixture_path, seeds=(1,))
        report = run_experiment(config)
        for target in config.targets:
            floor = report.cells[(BASELINE, target)].train_mse
            for model in config.models:
                cell = report.cells[(model, target)]
                for got, base in zip(cell.train_mse, floor):
                    assert got <= base + 1e-9

    def test_cell_failure_is_isolated(self, fixture_path):
        config = RunConfig(
            data_path=fixture_path, models=("esn", "svr"), targets=("shares",),
            seeds=(1,), esn=EsnSettings(washout=400),
            svr=SvrSettings(max_passes=1),
        )
        report = run_experiment(config)
        esn_cell = report.cells[("esn", "shares")]
        assert not esn_cell.ok
        assert "washout" in esn_cell.error
        assert report.cells[("svr", "shares")].ok
        assert report.cells[(BASELINE, "shares")].ok
        # grid stays fully populated, the failed cell is explicit
        assert set(report.cells) == {("esn", "shares"), ("svr", "shares"),
                                     (BASELINE, "shares")}

    def test_byte_identical_reports_for_identical_config(self, fixture_path):
        config = RunConfig(data_path=fixture_path, models=("esn",),
                           targets=("comments",), seeds=(1, 2))
        a = run_experiment(config)
        b = run_experiment(config)
        assert a.to_csv_text() == b.to_csv_text()
        assert a.to_markdown_text() == b.to_markdown_text()
        assert a.to_json_text() == b.to_json_text()


class TestEmitReport:
    def test_csv_header_and_determinism(self, quick_config, tmp_path):
        report = run_experiment(quick_config)
        p1 = emit_report(report, "csv", tmp_path / "a")
        p2 = emit_report(report, "csv", tmp_path / "b")
        text = p1.read_text()
        assert text.splitlines()[0] == \
            "model,target,train_mse,test_mse,seed_median,seed_min,seed_max"
        assert p1.read_bytes() == p2.read_bytes()

    def test_markdown_mirrors_benchmark_layout(self, fixture_path, tmp_path):
        config = RunConfig(data_path=fixture_path, seeds=(1,))
        report = run_experiment(config)
        md = emit_report(report, "markdown", tmp_path).read_text().splitlines()
        assert md[0] == "| Method | Comments | Likes | Shares |"
        assert [line.split("|")[1].strip() for line in md[2:]] == \
            ["SVR", "ESN", "ANFIS", "baseline"]

    def test_json_contains_cells_and_metadata(self, quick_config, tmp_path):
        import json
        report = run_experiment(quick_config)
        payload = json.loads(emit_report(report, "json", tmp_path).read_text())
        assert payload["metadata"]["config_digest"] == quick_config.digest()
        assert {c["model"] for c in payload["cells"]} == {"esn", BASELINE}

    def test_unknown_format(self, quick_config, tmp_path):
        report = run_experiment(quick_config)
        with pytest.raises(ValueError):
            emit_report(report, "xml", tmp_path)
