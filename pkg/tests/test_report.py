"""Suite runner, report determinism, CLI, and exit-code contract tests."""

import json
import math

import pytest

from lckgeo.cli import main as cli_main
from lckgeo.errors import ParameterError
from lckgeo.report import (Report, SuiteConfig, emit, exit_code,
                           parse_selector, resolve_manifold, run)


class TestSelector:
    def test_parse_forms(self):
        assert parse_selector("hopf") == ("hopf", {})
        name, params = parse_selector("calabi{ell=sin, b=pi}")
        assert name == "calabi"
        assert params["ell"] == "sin"
        assert abs(params["b"] - math.pi) < 1e-15
        assert parse_selector("hopf{n=3}")[1]["n"] == 3

    def test_malformed_rejected(self):
        with pytest.raises(ParameterError):
            parse_selector("hopf{n=2")
        with pytest.raises(ParameterError):
            parse_selector("hopf{n}")
        with pytest.raises(ParameterError):
            resolve_manifold("torus{}")

    def test_resolution(self):
        assert resolve_manifold("hopf{n=2,circumference=6.0}").params[
            "circumference"] == 6.0
        assert resolve_manifold("flat_inversion{n=3}").n == 3
        assert resolve_manifold("warped{c=sin,base=cp1}").expected_kind == "gcK"
        assert resolve_manifold("euclidean{m=4}").label == "euclidean_4"

    def test_unknown_profile(self):
        with pytest.raises(ParameterError):
            resolve_manifold("warped{c=tan}")


class TestSuiteConfig:
    def test_unknown_suite_rejected_eagerly(self):
        with pytest.raises(ParameterError):
            SuiteConfig(manifold="hopf{n=2}", suites=("nonsense",))

    def test_mode_dependent_tol_id(self):
        c_fd = SuiteConfig(manifold="x", suites=(), mode="fd")
        c_an = SuiteConfig(manifold="x", suites=(), mode="analytic")
        assert c_fd.tol_id == 1e-4
        assert c_an.tol_id == 1e-8

    def test_validation(self):
        with pytest.raises(ParameterError):
            SuiteConfig(manifold="x", suites=(), samples=0)
        with pytest.raises(ParameterError):
            SuiteConfig(manifold="x", suites=(), tol_ode=-1.0)
        with pytest.raises(ParameterError):
            SuiteConfig(manifold="x", suites=(), mode="magic")


class TestRun:
    def test_empty_suite_list_passes(self):
        config = SuiteConfig(manifold="euclidean{m=4}", suites=())
        report = run(config)
        assert report.passed and not report.suites
        payload = json.loads(emit(report, "json"))
        assert payload["pass"] is True
        assert payload["config"]["manifold"] == "euclidean{m=4}"

    def test_deterministic_json(self):
        config = SuiteConfig(manifold="flat_inversion{n=2}",
                             suites=("classify", "lck-identities"),
                             samples=6, seed=11)
        blob1 = emit(run(config), "json")
        blob2 = emit(run(config), "json")
        assert blob1 == blob2

    def test_parallel_matches_serial(self):
        base = dict(manifold="flat_inversion{n=2}", suites=("lck-identities",),
                    samples=6, seed=3)
        serial = emit(run(SuiteConfig(**base)), "json")
        parallel = emit(run(SuiteConfig(**base, parallel=True)), "json")
        s, p = json.loads(serial), json.loads(parallel)
        assert s["suites"][0]["residuals"] == p["suites"][0]["residuals"]

    def test_forced_failure_exit_code(self):
        config = SuiteConfig(manifold="flat_inversion{n=2}",
                             suites=("lck-identities",), samples=4, seed=5,
                             tol_id=1e-20)
        report = run(config)
        assert not report.passed
        assert exit_code(report) == 1

    def test_at_point_overrides_sampling(self):
        p = [0.5, 0.5, 0.5, 0.5]
        config = SuiteConfig(manifold="flat_inversion{n=2}",
                             suites=("einstein-chain",), samples=50, seed=1,
                             at=tuple(p))
        report = run(config)
        res = report.suites[0].residuals
        assert all(rec["count"] == 1 for rec in res.values())
        assert res["eqf"]["worst_point"] == p

    def test_suite_applicability_errors(self):
        with pytest.raises(ParameterError):
            run(SuiteConfig(manifold="hopf{n=2}", suites=("commuting-pair",),
                            samples=2))
        with pytest.raises(ParameterError):
            run(SuiteConfig(manifold="hopf{n=2}", suites=("einstein-chain",),
                            samples=2))

    def test_json_schema_fields(self):
        config = SuiteConfig(manifold="flat_inversion{n=2}",
                             suites=("classify",), samples=4, seed=2)
        payload = json.loads(emit(run(config), "json"))
        assert payload["schema_version"] == 1
        suite = payload["suites"][0]
        assert suite["suite"] == "classify"
        for rec in suite["residuals"].values():
            assert set(rec) >= {"max", "mean", "count", "worst_point",
                                "tolerance", "pass"}
        assert suite["classification"]["kind"] == "gcK"
        assert isinstance(payload["pass"], bool)

    def test_inconclusive_exit_code(self):
        report = Report(config={}, suites=[], passed=True, inconclusive=True,
                        wall_time=0.0)
        assert exit_code(report) == 3

    def test_text_render(self):
        config = SuiteConfig(manifold="euclidean{m=4}", suites=("classify",),
                             samples=4, seed=2)
        text = emit(run(config), "text").decode()
        assert "suite classify" in text
        assert "wall time" in text
        assert "Kahler" in text


class TestCli:
    def test_basic_run_and_json(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = cli_main(["run", "--manifold", "flat_inversion{n=2}",
                         "--suite", "classify", "--samples", "5",
                         "--seed", "2", "--json", str(out), "--text"])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["suites"][0]["pass"] is True
        assert "classify" in capsys.readouterr().out

    def test_config_error_exit_two(self, capsys):
        assert cli_main(["run", "--manifold", "nope{}",
                         "--suite", "classify"]) == 2
        assert cli_main(["run", "--manifold", "hopf{n=2}",
                         "--suite", "not-a-suite"]) == 2
        # applicability failures are configuration errors too
        assert cli_main(["run", "--manifold", "hopf{n=2}",
                         "--suite", "commuting-pair", "--samples", "2"]) == 2

    def test_failure_exit_one(self):
        code = cli_main(["run", "--manifold", "flat_inversion{n=2}",
                         "--suite", "lck-identities", "--samples", "3",
                         "--seed", "4", "--tol-id", "1e-20"])
        assert code == 1

    def test_config_file_and_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "manifold = flat_inversion{n=2}\n"
            "suites = classify\n"
            "samples = 4\n"
            "seed = 9\n"
            "tol_ode = 1e-6\n"
            "# comment line\n")
        code = cli_main(["run", "--config", str(cfg), "--json", "-"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["samples"] == 4
        # flag overrides the file
        code = cli_main(["run", "--config", str(cfg), "--samples", "2",
                         "--json", "-"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["config"]["samples"] == 2

    def test_at_flag(self, capsys):
        code = cli_main(["run", "--manifold", "flat_inversion{n=2}",
                         "--suite", "classify",
                         "--at", "0.5,0.5,0.5,0.5", "--json", "-"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["at"] == [0.5, 0.5, 0.5, 0.5]

    def test_threads_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LCK_THREADS", "2")
        code = cli_main(["run", "--manifold", "flat_inversion{n=2}",
                         "--suite", "lck-identities", "--samples", "4",
                         "--seed", "2", "--parallel",
                         "--json", str(tmp_path / "r.json")])
        assert code == 0
