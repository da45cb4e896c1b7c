import json

import pytest

from adapters.config_adapter import load_dgp_params
from adapters.csv_adapter import emit_csv, load_csv
from agency_panel import actions, build_parser, main
from panel.panel_common import Settings
from panel.panel_synth import DgpParams, generate_records


@pytest.fixture(scope="module")
def mediated_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("mediated") / "panel.csv"
    return emit_csv(generate_records(DgpParams(seed=11)), path)


def run_cli(capsys, *argv):
    code = main([str(arg) for arg in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParser:
    def test_every_subcommand_has_an_action(self):
        argv = {
            "describe": ["--input", "x.csv"],
            "correlate": ["--input", "x.csv"],
            "fit": ["--input", "x.csv", "--model", "INV ~ HOLD"],
            "mediate": ["--input", "x.csv"],
            "robust": ["--input", "x.csv"],
            "synth": ["--out", "x.csv"],
            "run": ["--input", "x.csv", "--out", "out"],
        }
        parser = build_parser(Settings())
        assert set(argv) == set(actions)
        for command, rest in argv.items():
            assert parser.parse_args([command, *rest]).command == command

    def test_defaults_come_from_settings(self):
        args = build_parser(Settings(workers=2, stars=(0.001, 0.01, 0.05))).parse_args(["mediate", "--input", "x"])
        assert args.workers == 2
        assert args.stars == (0.001, 0.01, 0.05)
        assert args.format == "text"


class TestExitCodes:
    def test_unknown_variable(self, capsys, synth_csv):
        code, out, err = run_cli(capsys, "fit", "--input", synth_csv, "--model", "INV ~ HOLD + BOGUS")
        assert code == 2
        assert out == ""
        assert err.strip().splitlines()[-1].startswith("error: UnknownVariable")

    def test_bad_formula(self, capsys, synth_csv):
        code, _, err = run_cli(capsys, "fit", "--input", synth_csv, "--model", "INV HOLD")
        assert code == 1
        assert "ModelSyntaxError" in err

    def test_bad_star_levels(self, capsys, synth_csv):
        code, _, err = run_cli(capsys, "describe", "--input", synth_csv, "--stars", "0.1,0.05")
        assert code == 1
        assert "UsageError" in err

    def test_missing_subcommand(self, capsys):
        assert run_cli(capsys)[0] == 1

    def test_missing_input_file(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "describe", "--input", tmp_path / "absent.csv")
        assert code == 2
        assert "DataError" in err

    def test_schema_mismatch(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("firm_id,year\nF1,2015\n", encoding="utf-8")
        code, _, err = run_cli(capsys, "describe", "--input", path)
        assert code == 2
        assert "SchemaMismatch" in err

    def test_non_utf8_input(self, capsys, tmp_path, synth_csv):
        path = tmp_path / "latin.csv"
        header, row = synth_csv.read_bytes().splitlines()[:2]
        path.write_bytes(header + b"\n" + b"F\xff" + row[1:] + b"\n")
        code, out, err = run_cli(capsys, "describe", "--input", path)
        assert code == 2
        assert out == ""
        assert err.strip().splitlines()[-1].startswith("error: DataError: cannot read")

    def test_unwritable_report_directory(self, capsys, tmp_path, synth_csv):
        blocker = tmp_path / "blocker"
        blocker.write_text("", encoding="utf-8")
        code, out, err = run_cli(capsys, "run", "--input", synth_csv, "--out", blocker / "reports")
        assert code == 1
        assert out == ""
        assert err.strip().splitlines()[-1].startswith("error: OutputError: cannot write")


class TestCommands:
    def test_describe(self, capsys, synth_csv):
        code, out, _ = run_cli(capsys, "describe", "--input", synth_csv, "--labels")
        assert code == 0
        assert "Variable Name" in out
        assert "Definition" in out

    def test_describe_json(self, capsys, synth_csv):
        code, out, _ = run_cli(capsys, "describe", "--input", synth_csv, "--vars", "INV", "HOLD", "--format", "json")
        assert code == 0
        assert [row["variable"] for row in json.loads(out)] == ["INV", "HOLD"]
        assert json.loads(out)[0]["n"] == 1000

    def test_correlate(self, capsys, synth_csv):
        code, out, _ = run_cli(capsys, "correlate", "--input", synth_csv, "--vars", "INV", "HOLD", "AC1")
        assert code == 0
        assert "Observations: 1,000" in out

    def test_filter_log_goes_to_stderr(self, capsys, synth_csv):
        code, out, err = run_cli(capsys, "describe", "--input", synth_csv, "--vars", "INV", "--filter-log")
        assert code == 0
        assert "total removed: 200" in err
        assert "total removed" not in out

    def test_filter_log_follows_format(self, capsys, synth_csv):
        code, _, err = run_cli(capsys, "describe", "--input", synth_csv, "--vars", "INV", "--filter-log",
                               "--format", "json")
        assert code == 0
        assert '"total_removed": 200' in err

    def test_fit_within_matches_dummy_design(self, capsys, synth_csv):
        model = "INV ~ HOLD + AC1 + SIZE | year + industry"
        _, dummy, _ = run_cli(capsys, "fit", "--input", synth_csv, "--model", model, "--format", "json")
        _, within, _ = run_cli(capsys, "fit", "--input", synth_csv, "--model", model, "--format", "json", "--within")
        dummy, within = json.loads(dummy), json.loads(within)
        hold = dummy["coef"][dummy["terms"].index("HOLD")]
        assert within["coef"][within["terms"].index("HOLD")] == pytest.approx(hold, abs=1e-6)

    def test_fit_clustered(self, capsys, synth_csv):
        code, out, _ = run_cli(capsys, "fit", "--input", synth_csv, "--model", "INV ~ HOLD", "--cluster", "firm")
        assert code == 0
        assert "Standard errors clustered by firm." in out

    def test_mediate_supports_h2b(self, capsys, mediated_csv):
        code, out, _ = run_cli(capsys, "mediate", "--input", mediated_csv)
        assert code == 0
        assert "H2b: supported" in out
        assert "Dominant channel: AC1" in out

    def test_robust(self, capsys, synth_csv):
        code, out, _ = run_cli(capsys, "robust", "--input", synth_csv)
        assert code == 0
        assert "Sample: 800 of 1,000" in out

    def test_synth(self, capsys, tmp_path):
        config = tmp_path / "dgp.env"
        config.write_text("n_firms = 20\nyears = 2012-2014\n", encoding="utf-8")
        out = tmp_path / "synth" / "panel.csv"
        code, printed, _ = run_cli(capsys, "synth", "--config", config, "--out", out, "--seed", 4)
        assert code == 0
        assert printed.splitlines() == [str(out), str(out.with_suffix(".dgp"))]
        assert len(load_csv(out)) == 20 * 4
        truth = load_dgp_params(out.with_suffix(".dgp"))
        assert (truth.n_firms, truth.seed) == (20, 4)


class TestRun:
    def test_writes_every_report(self, capsys, tmp_path, synth_csv):
        code, out, _ = run_cli(capsys, "run", "--input", synth_csv, "--out", tmp_path / "reports")
        assert code == 0
        names = sorted(path.name for path in (tmp_path / "reports").iterdir())
        assert names == ["correlation.txt", "descriptive.txt", "filter_log.csv", "mediation.txt", "robustness.txt"]
        assert len(out.splitlines()) == 5

    def test_json_reports(self, capsys, tmp_path, synth_csv):
        run_cli(capsys, "run", "--input", synth_csv, "--out", tmp_path, "--format", "json")
        payload = json.loads((tmp_path / "mediation.json").read_text(encoding="utf-8"))
        assert set(payload["fits"]) == {"model1", "model2", "model3", "model4", "model5"}

    @pytest.mark.parametrize("fmt", ["text", "csv", "json"])
    def test_byte_identical_across_runs_and_workers(self, capsys, tmp_path, synth_csv, fmt):
        first, second = tmp_path / "first", tmp_path / "second"
        run_cli(capsys, "run", "--input", synth_csv, "--out", first, "--format", fmt, "--workers", 1)
        run_cli(capsys, "run", "--input", synth_csv, "--out", second, "--format", fmt, "--workers", 4)
        for path in sorted(first.iterdir()):
            assert path.read_bytes() == (second / path.name).read_bytes()
