import pytest

from postbench.cli import main


def _write_config(tmp_path, fixture_path, **overrides):
    lines = ["[data]", f"path = {fixture_path}", "[run]",
             "models = esn", "targets = shares", "seeds = 1,2",
             f"output_dir = {tmp_path / 'out'}"]
    for section, body in overrides.items():
        lines.append(f"[{section}]")
        lines.extend(body)
    path = tmp_path / "run.ini"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_no_arguments_is_usage_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["validate-data", "--bogus"])
    assert excinfo.value.code == 2


def test_validate_data_passes_on_fixture(fixture_path, capsys):
    assert main(["validate-data", str(fixture_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("MATCH") == 18
    assert "MISMATCH" not in out


def test_validate_data_detects_mismatch(fixture_path, tmp_path, capsys):
    text = fixture_path.read_text().splitlines()
    header = text[0].split(";")
    like_col = header.index("like")
    row = text[1].split(";")
    row[like_col] = "99999"  # breaks the likes maximum
    tampered = tmp_path / "tampered.csv"
    tampered.write_text("\n".join([text[0], ";".join(row)] + text[2:]) + "\n")
    assert main(["validate-data", str(tampered)]) == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_validate_data_missing_file(tmp_path, capsys):
    assert main(["validate-data", str(tmp_path / "none.csv")]) == 1
    assert "error:" in capsys.readouterr().err


def test_stats_prints_all_targets(fixture_path, capsys):
    assert main(["stats", str(fixture_path)]) == 0
    out = capsys.readouterr().out
    for name in ("comments", "likes", "shares"):
        assert name in out


def test_train_writes_model_dump(fixture_path, tmp_path, capsys):
    out = tmp_path / "esn_model.json"
    code = main(["train", "--data", str(fixture_path), "--model", "esn",
                 "--target", "shares", "--seed", "3", "--out", str(out)])
    assert code == 0
    assert out.exists()
    assert "test MSE" in capsys.readouterr().out


def test_reproduce_emits_all_report_files(fixture_path, tmp_path, capsys):
    config = _write_config(tmp_path, fixture_path)
    assert main(["reproduce", "--config", str(config)]) == 0
    out_dir = tmp_path / "out"
    for name in ("report.csv", "report.md", "report.json"):
        assert (out_dir / name).exists()
    assert "| Method | Shares |" in capsys.readouterr().out


def test_dump_dataset_is_deterministic(fixture_path, tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(["dump-dataset", str(fixture_path), "--seed", "1",
                 "--out", str(out_a)]) == 0
    assert main(["dump-dataset", str(fixture_path), "--seed", "1",
                 "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
