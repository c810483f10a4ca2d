import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adamslab.harness.cli import main
from adamslab.harness.config import ConfigError, HarnessConfig, load_config, parse_config_text
from adamslab.harness.report import CaseRecord, VerificationReport, emit, parse, to_csv, to_json
from adamslab.harness.suites import run_suite


def test_config_text_and_overrides(tmp_path):
    text = "suite = annuli\n# comment\ntau-ladder = 1e-4, 1e-3\nseed = 3  # trailing\n"
    assert parse_config_text(text) == {"suite": "annuli", "tau_ladder": (1e-4, 1e-3), "seed": 3}
    path = tmp_path / "run.cfg"
    path.write_text(text)
    cfg = load_config(path, {"seed": 9, "tolerance": "1e-8", "grid_points": None})
    assert cfg.suite == "annuli" and cfg.seed == 9 and cfg.tolerance == 1e-8
    assert cfg.tau_ladder == (1e-4, 1e-3) and cfg.grid_points == 20


@pytest.mark.parametrize("text", ["bogus = 1", "seed = x", "no equals sign", "tau_ladder = 2.0"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        load_config(None, parse_config_text(text))


def test_config_validation():
    with pytest.raises(ConfigError):
        HarnessConfig(suite="nope")
    with pytest.raises(ConfigError):
        HarnessConfig(tolerance=0.0)


def test_empty_report_json():
    d = json.loads(to_json(VerificationReport("empty")))
    assert d["suite"] == "empty" and d["cases"] == [] and d["pass"] is True


def _sample_report():
    rep = VerificationReport("sample")
    rep.add(CaseRecord("a", {"n": 2}, {"value": 1.5, "vec": [1.0, math.inf]}, "x > 0", True, 1e-9, "DERIVED"))
    rep.add(CaseRecord("b", {}, {"value": -0.0}, "fails", False, 0.0, "TRIVIAL"))
    return rep


def test_round_trip(tmp_path):
    rep = _sample_report()
    path = tmp_path / "r.json"
    emit(rep, "json", path)
    back = parse(path)
    assert back == rep and not back.passed
    assert back.case("a").measured["vec"][1] == math.inf


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False), max_size=5), st.booleans())
def test_round_trip_property(values, ok):
    rep = VerificationReport("prop")
    rep.add(CaseRecord("c", {"v": values}, {"value": values}, "r", ok, 0.0, "TRIVIAL"))
    assert VerificationReport.from_dict(json.loads(to_json(rep))) == rep


def test_provenance_tag_required():
    with pytest.raises(ValueError):
        CaseRecord("x", {}, {}, "r", True, 0.0, "GUESS")


def test_constants_csv_rows():
    rep = run_suite("constants", HarnessConfig(suite="constants"))
    rows = list(csv.DictReader(io.StringIO(to_csv(rep))))
    assert len(rows) == len(rep.cases)
    first = rows[0]
    assert first["case"] == "gamma_2_1"
    assert float(first["value"]) == pytest.approx(4 * math.pi, abs=1e-12)
    assert float(first["tolerance"]) == 1e-12


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["verify", "constants", "--json", str(out), "--quiet"]) == 0
    assert parse(out).passed
    assert main(["verify", "nosuchsuite"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "constants", "--seed", "notanint"])
    assert exc.value.code == 2
    assert main(["verify", "constants", "--tolerance", "-1"]) == 2
    assert main(["verify"]) == 2
    bad = tmp_path / "bad.json"
    emit(_sample_report(), "json", bad)
    assert main(["report", str(bad)]) == 1
    assert main(["report", str(tmp_path / "missing.json")]) == 2


def test_cli_constants_json(capsys):
    assert main(["constants", "--json"]) == 0
    d = json.loads(capsys.readouterr().out)
    g = [e for e in d["gamma_sharp"] if e["n"] == 2 and e["alpha"] == 1][0]
    assert g["value"] == pytest.approx(4 * math.pi, abs=1e-12)


def test_bit_stable_json(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["verify", "annuli", "--samples", "3", "--no-timing", "--json", str(p), "--quiet"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "adamslab.harness.cli", "verify", "bogus"], capture_output=True)
    assert r.returncode == 2
