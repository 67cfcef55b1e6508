import json
import os

import pytest

from bilip import cli
from bilip.config import CONFIGS, ExtendConfig, TheoremCConfig, defaults_markdown, load_config
from bilip.errors import ConfigError
from bilip.reporting import Check, RunReport, write_csv, write_json


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out), "--quiet"])
    return code, out


@pytest.fixture(autouse=True)
def _no_fault_env(monkeypatch):
    monkeypatch.delenv(cli.FAULT_GATE, raising=False)
    monkeypatch.delenv(cli.FAULT_ENV, raising=False)


class TestTheoremC:
    def test_default(self, tmp_path):
        code, out = run(tmp_path, "theorem-c")
        assert code == 0
        v = json.loads((out / "verdict.json").read_text())
        assert v["passed"] and v["results"]["ratios"]["verdict"]
        assert v["config"] == TheoremCConfig().to_dict()
        assert {p.name for p in out.iterdir()} == {"sequences.csv", "ratios.csv", "verdict.json", "timing.json"}

    def test_weak_redistribution(self, tmp_path):
        code, out = run(tmp_path, "theorem-c", "--override", "delta=0.001")
        assert code == 1
        v = json.loads((out / "verdict.json").read_text())
        assert v["results"]["ratios"]["verdict"] is False

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _ = run(tmp_path, "theorem-c", "--config", str(bad))
        assert code == 2

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"nope": 1}))
        assert run(tmp_path, "theorem-c", "--config", str(cfg))[0] == 2

    def test_narrow_family(self, tmp_path):
        assert run(tmp_path, "theorem-c", "--override", "width=1")[0] == 2

    def test_determinism(self, tmp_path):
        _, a = run(tmp_path, "theorem-c", name="a")
        _, b = run(tmp_path, "theorem-c", name="b")
        for f in ("sequences.csv", "ratios.csv", "verdict.json"):
            assert (a / f).read_bytes() == (b / f).read_bytes()


class TestExtend:
    def test_interval(self, tmp_path):
        code, out = run(tmp_path, "extend")
        assert code == 0
        r = json.loads((out / "report.json").read_text())
        a = r["results"]["audit"]
        assert a["empirical_fwd"] <= a["cap"] and a["residuals"]["commutation"] < 1e-9

    def test_fault_needs_gate(self, tmp_path):
        assert run(tmp_path, "extend", "--fault-inject", "corrupt-tile")[0] == 2

    def test_fault_detected(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.FAULT_GATE, "1")
        code, out = run(tmp_path, "extend", "--fault-inject", "corrupt-tile")
        assert code == 1
        r = json.loads((out / "report.json").read_text())
        named = {c["name"]: c for c in r["checks"]}
        assert named["commutation residual (fault injected; must be detected)"]["passed"]
        assert named["commutation residual"]["value"] > 1e-3

    def test_fault_from_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.FAULT_GATE, "1")
        monkeypatch.setenv(cli.FAULT_ENV, "corrupt-tile")
        assert run(tmp_path, "extend")[0] == 1

    def test_unknown_fault(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.FAULT_GATE, "1")
        assert run(tmp_path, "extend", "--fault-inject", "nonsense")[0] == 2

    def test_circle_without_gap(self, tmp_path):
        assert run(tmp_path, "extend", "--override", "mode=circle", "--override", "action=golden")[0] == 2

    def test_circle(self, tmp_path):
        code, out = run(tmp_path, "extend", "--override", "mode=circle")
        assert code == 0
        r = json.loads((out / "report.json").read_text())
        assert r["results"]["stabilizer"] == "ABab"
        assert (out / "gap_images.csv").exists()


class TestGH:
    def test_coboundary(self, tmp_path):
        code, out = run(tmp_path, "gh")
        assert code == 0
        r = json.loads((out / "report.json").read_text())
        named = {c["name"]: c["value"] for c in r["checks"]}
        assert named["coboundary residual of extracted transfer"] < 5e-3

    def test_drift(self, tmp_path):
        code, out = run(tmp_path, "gh", "--override", "mode=drift")
        assert code == 1
        r = json.loads((out / "report.json").read_text())
        assert r["results"]["slope"] == pytest.approx(0.3, rel=0.05)

    def test_derivative(self, tmp_path):
        code, out = run(tmp_path, "gh", "--override", "mode=derivative")
        assert code == 0
        assert json.loads((out / "report.json").read_text())["results"]["residual"] < 1e-6


class TestSelftest:
    def test_clean(self, tmp_path):
        code, out = run(tmp_path, "selftest")
        assert code == 0 and json.loads((out / "selftest.json").read_text())["passed"]

    def test_fault_toggle(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.FAULT_GATE, "1")
        monkeypatch.setenv(cli.FAULT_ENV, "corrupt-tile")
        assert run(tmp_path, "selftest")[0] != 0


class TestConfig:
    def test_overrides_parse_json(self):
        cfg = load_config("extend", None, ["eps=-5", "mode=circle"])
        assert cfg.eps == -5.0 and cfg.mode == "circle"

    def test_type_errors(self):
        with pytest.raises(ConfigError):
            load_config("extend", None, ["n_max=1.5"])
        with pytest.raises(ConfigError):
            load_config("extend", None, ["mode=3"])
        with pytest.raises(ConfigError):
            load_config("extend", None, ["eps"])

    def test_validation(self):
        with pytest.raises(ConfigError):
            ExtendConfig(eps=0.0).validate()
        with pytest.raises(ConfigError):
            TheoremCConfig.from_dict({"n_max": 63})

    def test_round_trip(self):
        for cls in CONFIGS.values():
            assert cls.from_dict(cls().to_dict()) == cls()

    def test_defaults_page(self, capsys):
        assert cli.main(["defaults"]) == 0
        page = capsys.readouterr().out
        assert page.strip() == defaults_markdown().strip()
        for name in CONFIGS:
            assert f"## {name}" in page


class TestReporting:
    def test_check_nan_fails(self):
        assert not Check("x", float("nan"), "<", 1.0).passed
        assert not Check("x", None, "<", 1.0).passed
        assert Check("x", 0.5, "<", 1.0).passed

    def test_json_non_finite(self, tmp_path):
        p = tmp_path / "a.json"
        write_json(p, {"a": float("inf"), "b": [1.0, float("nan")]})
        assert json.loads(p.read_text()) == {"a": None, "b": [1.0, None]}

    def test_csv_format(self, tmp_path):
        p = tmp_path / "a.csv"
        write_csv(p, ["x", "n"], [[0.1, 3]])
        assert p.read_bytes() == b"x,n\r\n0.10000000000000001,3\r\n"

    def test_report_passed(self):
        r = RunReport("t", {})
        r.check("a", 1.0, "<=", 1.0)
        assert r.passed
        r.check("b", 2.0, "<", 1.0)
        assert not r.passed and "FAIL" in r.table()
