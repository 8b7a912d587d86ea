import json

import pytest

from causalsafety import models
from causalsafety.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def broken_model(tmp_path):
    doc = json.loads(models.read_bundled("confounding.cbn.json"))
    doc["cpts"][0]["rows"] = [[0.5, 0.3, 0.1]]  # sums to 0.9
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


class TestValidate:
    def test_bundled_network_ok(self, capsys):
        code, out, _ = run_cli(capsys, "validate", "perception.cbn.json")
        assert code == 0
        assert "OK" in out

    def test_broken_row_sum(self, capsys, broken_model):
        code, out, _ = run_cli(capsys, "validate", str(broken_model))
        assert code == 1
        assert "Weather" in out

    def test_fault_tree_flag(self, capsys):
        code, out, _ = run_cli(capsys, "validate", "perception.ft.json", "--fault-tree")
        assert code == 0
        assert "FusionFN" in out

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "validate", "nonexistent.json")
        assert code == 1
        assert "cannot read" in err


class TestQuery:
    def test_do_query(self, capsys):
        code, out, _ = run_cli(capsys, "query", "confounding.cbn.json",
                               "-t", "Perception", "--do", "Luminance=high",
                               "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["distribution"]["FN"] == pytest.approx(0.0585, abs=1e-9)

    def test_evidence_query(self, capsys):
        code, out, _ = run_cli(capsys, "query", "perception.cbn.json",
                               "-t", "Fusion", "-e", "Sen1=TP", "-e", "Sen2=TP",
                               "--format", "json")
        assert code == 0
        assert json.loads(out)["distribution"]["FN"] == 0.0

    def test_chain_do_gives_point_distribution(self, capsys):
        code, out, _ = run_cli(capsys, "query", "confounding.cbn.json",
                               "-t", "Perception", "--do", "Weather=sun",
                               "--do", "Luminance=low", "--do", "Perception=FN")
        assert code == 1  # target itself intervened is an error
        code, out, _ = run_cli(capsys, "query", "confounding.cbn.json",
                               "-t", "Perception", "--do", "Weather=sun",
                               "--do", "Luminance=low", "--format", "json")
        assert code == 0

    def test_path_query(self, capsys):
        code, out, _ = run_cli(capsys, "query", "perception.cbn.json",
                               "-t", "Fusion",
                               "--paths", "TrafficDensity->Sen2->Fusion",
                               "--active", "high", "--ref", "low",
                               "--format", "json")
        assert code == 0
        assert json.loads(out)["distribution"]["FN"] == pytest.approx(3.2654e-4, rel=1e-3)

    def test_paths_need_active_and_ref(self, capsys):
        code, _, err = run_cli(capsys, "query", "perception.cbn.json",
                               "-t", "Fusion", "--paths", "TrafficDensity->Sen2->Fusion")
        assert code == 2
        assert "usage" in err

    def test_malformed_assignment(self, capsys):
        code, _, err = run_cli(capsys, "query", "perception.cbn.json",
                               "-t", "Fusion", "--do", "TrafficDensity")
        assert code == 2

    def test_contradictory_evidence(self, capsys):
        code, _, err = run_cli(capsys, "query", "perception.cbn.json",
                               "-t", "Occlusion", "-e", "Sen1=TP", "-e", "Sen2=TP",
                               "-e", "Fusion=FN")
        assert code == 1
        assert "zero" in err


class TestMetrics:
    def test_json_report(self, capsys):
        code, out, _ = run_cli(capsys, "metrics", "perception-analysis.json")
        assert code == 0
        doc = json.loads(out)
        rce = [m for m in doc["metrics"]
               if m["metric"] == "RCE" and m["variable"] == "TrafficDensity"
               and m["state_or_path"].startswith("high")]
        assert rce[0]["value"] == pytest.approx(9.64, abs=0.02)

    def test_byte_identical_reruns(self, capsys):
        _, first, _ = run_cli(capsys, "metrics", "perception-analysis.json")
        _, second, _ = run_cli(capsys, "metrics", "perception-analysis.json")
        assert first == second

    def test_unknown_reference_exits_2_without_report(self, capsys, tmp_path):
        doc = json.loads(models.read_bundled("perception-analysis.json"))
        doc["variables"]["Occlusion"]["reference"] = "nowhere"
        config = tmp_path / "bad-analysis.json"
        config.write_text(json.dumps(doc), encoding="utf-8")
        code, out, err = run_cli(capsys, "metrics", str(config))
        assert code == 2
        assert out == ""
        assert "nowhere" in err

    def test_csv_output_to_file(self, capsys, tmp_path):
        out_file = tmp_path / "report.csv"
        code, _, _ = run_cli(capsys, "metrics", "perception-analysis.json",
                             "--format", "csv", "-o", str(out_file))
        assert code == 0
        lines = out_file.read_text().splitlines()
        assert lines[0].startswith("metric,variable")


class TestTornadoPairwisePaths:
    def test_tornado_svg(self, capsys, tmp_path):
        out_file = tmp_path / "tornado.svg"
        code, _, _ = run_cli(capsys, "tornado", "perception-analysis.json",
                             "--format", "svg", "-o", str(out_file))
        assert code == 0
        assert out_file.read_text().startswith("<svg")

    def test_tornado_json(self, capsys):
        code, out, _ = run_cli(capsys, "tornado", "perception-analysis.json")
        assert code == 0
        assert len(json.loads(out)) == 11

    def test_pairwise_csv(self, capsys):
        code, out, _ = run_cli(capsys, "pairwise", "perception-analysis.json",
                               "--format", "csv")
        assert code == 0
        assert len(out.splitlines()) == 46  # header + 45 pairs

    def test_paths_json(self, capsys):
        code, out, _ = run_cli(capsys, "paths", "perception-analysis.json")
        assert code == 0
        doc = json.loads(out)
        rpe_rows = [m for m in doc if m["metric"] == "RPE"
                    and m["state_or_path"].startswith("pi2")
                    and "high" in m["state_or_path"]]
        assert rpe_rows[0]["value"] == pytest.approx(8.13, abs=0.05)


class TestFaultTreeCommands:
    def test_eval(self, capsys):
        code, out, _ = run_cli(capsys, "ft", "eval", "perception.ft.json")
        assert code == 0
        assert "1.17" in out

    def test_cutsets(self, capsys):
        code, out, _ = run_cli(capsys, "ft", "cutsets", "perception.ft.json")
        assert code == 0
        sets = [frozenset(s) for s in json.loads(out)]
        assert len(sets) == 2

    def test_importance_includes_infinity(self, capsys):
        code, out, _ = run_cli(capsys, "ft", "importance", "perception.ft.json")
        assert code == 0
        doc = json.loads(out)
        rrw_td = [m for m in doc if m["metric"] == "RRW"
                  and m["variable"] == "TrafficDensity"]
        assert rrw_td[0]["value"] == "inf"

    def test_to_cbn_roundtrip(self, capsys, tmp_path):
        out_file = tmp_path / "converted.cbn.json"
        code, _, _ = run_cli(capsys, "ft", "to-cbn", "perception.ft.json",
                             "-o", str(out_file))
        assert code == 0
        code, out, _ = run_cli(capsys, "validate", str(out_file))
        assert code == 0


class TestSampleFit:
    def test_sample_then_fit(self, capsys, tmp_path):
        csv_file = tmp_path / "samples.csv"
        code, out, _ = run_cli(capsys, "sample", "confounding.cbn.json",
                               "-n", "20000", "--seed", "3", "-o", str(csv_file))
        assert code == 0
        assert "20000" in out
        fitted_file = tmp_path / "fitted.json"
        code, _, _ = run_cli(capsys, "fit", "confounding.cbn.json", str(csv_file),
                             "--alpha", "1.0", "-o", str(fitted_file))
        assert code == 0
        doc = json.loads(fitted_file.read_text())
        weather = next(c for c in doc["cpts"] if c["variable"] == "Weather")
        assert weather["rows"][0][0] == pytest.approx(0.6, abs=0.02)

    def test_sample_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "sample", "confounding.cbn.json",
                               "-n", "5", "--seed", "1")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].split(",")[0] in ("Weather", "Luminance", "Perception")
        assert len(lines) == 6


class TestReproduceCommand:
    def test_only_fta_is_green(self, capsys):
        code, out, _ = run_cli(capsys, "reproduce", "--only", "fta")
        assert code == 0
        assert "PASS" in out and "FAIL]" not in out

    def test_only_confounding_is_green(self, capsys):
        code, out, _ = run_cli(capsys, "reproduce", "--only", "confounding")
        assert code == 0

    def test_dichotomic_reports_open_question(self, capsys):
        code, out, _ = run_cli(capsys, "reproduce", "--only", "dichotomic")
        assert code == 3  # the documented deviation cells fail honestly
        assert "dichotomic-negation-weighting" in out
        assert "FAIL*" in out
