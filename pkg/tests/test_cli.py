import json
import subprocess
import sys

import pytest

from mlgen.cli import main

from conftest import WEATHER_MAPPING, WEATHER_MODEL, WEATHER_TEMPLATES

BASE = ["--model", str(WEATHER_MODEL), "--mapping", str(WEATHER_MAPPING)]


def test_generate(tmp_path, capsys):
    out = tmp_path / "out.ipynb"
    assert main(["generate", *BASE, "--templates", str(WEATHER_TEMPLATES),
                 "--out", str(out)]) == 0
    assert out.exists()
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "6 contexts" in captured.err


def test_generate_env_templates(tmp_path, monkeypatch):
    monkeypatch.setenv("MLGEN_TEMPLATES", str(WEATHER_TEMPLATES))
    assert main(["generate", *BASE, "--out", str(tmp_path / "o.ipynb")]) == 0


def test_generate_without_templates_is_usage_error(tmp_path, monkeypatch):
    monkeypatch.delenv("MLGEN_TEMPLATES", raising=False)
    with pytest.raises(SystemExit) as exc:
        main(["generate", *BASE, "--out", str(tmp_path / "o.ipynb")])
    assert exc.value.code == 2


def test_missing_model_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--mapping", "m.json", "--out", "o.ipynb"])
    assert exc.value.code == 2
    assert "usage:" in capsys.readouterr().err


def test_generate_report_file_and_kernel(tmp_path):
    out, rep = tmp_path / "o.ipynb", tmp_path / "r.json"
    assert main(["generate", *BASE, "--templates", str(WEATHER_TEMPLATES), "--out", str(out),
                 "--report", str(rep), "--kernel", "python3"]) == 0
    report = json.loads(rep.read_text())
    assert report["contexts_processed"] == 6
    assert report["per_block"][0] == {"qualified_name": "Weather::Sensor_Log",
                                      "template": "io/read_csv", "provenance": "byStereotype"}
    assert json.loads(out.read_text())["metadata"]["kernelspec"]["name"] == "python3"


def test_generate_failure_exit_1(tmp_path, capsys):
    assert main(["generate", *BASE, "--templates", str(tmp_path),
                 "--out", str(tmp_path / "o.ipynb")]) == 1
    assert "Weather::Sensor_Log" in capsys.readouterr().err


def test_unreadable_model_exit_1(tmp_path, capsys):
    assert main(["inspect", "blocks", "--model", str(tmp_path / "none.json")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_check_clean(capsys):
    assert main(["check", *BASE, "--templates", str(WEATHER_TEMPLATES)]) == 0
    assert capsys.readouterr().err == ""


def test_check_dirty(tmp_path, capsys):
    assert main(["check", *BASE, "--templates", str(tmp_path)]) == 1
    assert "not found" in capsys.readouterr().err


def test_inspect_contexts(capsys):
    assert main(["inspect", "contexts", "--model", str(WEATHER_MODEL)]) == 0
    out = capsys.readouterr().out
    assert out.index("[0] Weather::Sensor_Log") < out.index("[5] Weather::Forecast_Model")
    assert "connected: Weather::Merge_DF" in out


def test_inspect_blocks(capsys):
    assert main(["inspect", "blocks", "--model", str(WEATHER_MODEL)]) == 0
    out = capsys.readouterr().out
    assert "Weather::Sensor_Log  stereotypes=[CSV]" in out
    assert "state Weather_Forecast::Load order=0 -> Weather::Sensor_Log" in out


def test_eval_name(capsys):
    assert main(["eval", "--model", str(WEATHER_MODEL), "--block", "Weather::TrainSplit",
                 "--command", "THIS.BLOCK.NAME"]) == 0
    assert capsys.readouterr().out == "TrainSplit\n"


def test_eval_output_needs_rendering(capsys):
    args = ["eval", "--model", str(WEATHER_MODEL), "--block", "Weather::TrainSplit",
            "--command", "CONNECTED[Nr=0].BLOCK.OUTPUT"]
    assert main(args) == 1
    assert "forward reference" in capsys.readouterr().err
    assert main(args + ["--mapping", str(WEATHER_MAPPING),
                        "--templates", str(WEATHER_TEMPLATES)]) == 0
    assert capsys.readouterr().out == "merged_df\n"


def test_eval_list(capsys):
    assert main(["eval", "--model", str(WEATHER_MODEL), "--block", "Weather::Sensor_Log",
                 "--command", "THIS.BLOCK.ATTRIBUTES"]) == 0
    assert capsys.readouterr().out == "date\nweather\n"


def test_eval_syntax_error(capsys):
    assert main(["eval", "--model", str(WEATHER_MODEL), "--block", "Weather::Sensor_Log",
                 "--command", "THIS.NAME"]) == 1
    assert "at least three keywords" in capsys.readouterr().err


def test_eval_unknown_block(capsys):
    assert main(["eval", "--model", str(WEATHER_MODEL), "--block", "Weather::Nope",
                 "--command", "THIS.BLOCK.NAME"]) == 1
    assert "Weather::Nope" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mlgen", "eval", "--model", str(WEATHER_MODEL),
                           "--block", "Weather::TrainSplit", "--command", "THIS.BLOCK.NAME"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "TrainSplit\n"
