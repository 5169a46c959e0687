import json

import pytest

from hardnesslab.cli import build_parser
from hardnesslab.cli.common import build_config
from hardnesslab.cli.main import main
from hardnesslab.core.errors import ParameterError
from hardnesslab.repositories import ClassifierRepository, InstanceRepository, ReportRepository
from hardnesslab.services import classify
from hardnesslab.services.labelcover import build_planted_instance


def _config(argv):
    return build_config(build_parser().parse_args(argv))


def _printed(capsys):
    return json.loads(capsys.readouterr().out)


def test_flags_override_the_config_file(tmp_path):
    (tmp_path / "run.json").write_text(json.dumps({"seed": 5, "n": 77, "instance": {"M": 6}}))
    config = _config(["sample", "--config", str(tmp_path / "run.json"), "--seed", "7"])
    assert config.seed == 7
    assert config.n == 77
    assert config.instance.M == 6
    assert config.instance.m == 4
    assert config.command == "sample"


def test_generator_and_parameter_flags():
    config = _config(["gen-instance", "--vertices", "20", "--k", "4", "--random", "--set", "Q=16", "--set", "t=2"])
    assert config.instance.num_vertices == 20 and config.instance.k == 4
    assert not config.instance.planted
    assert config.params.overrides["Q"] == 16
    assert config.params.overrides["t"] == 2
    assert config.params.overrides["tau"] == 0.1


def test_invalid_configuration_is_a_parameter_error(tmp_path):
    with pytest.raises(ParameterError):
        _config(["sample", "--workers", "0"])
    with pytest.raises(ParameterError):
        _config(["sample", "--set", "Q"])
    (tmp_path / "extra.json").write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ParameterError):
        _config(["sample", "--config", str(tmp_path / "extra.json")])


def test_usage_errors_exit_with_two():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--sampler", "fancy"])
    assert exc.value.code == 2


def test_lab_errors_map_to_their_exit_codes(capsys):
    assert main(["derive-params", "--set", "k=3"]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["decode"]) == 2
    assert "--coeffs" in capsys.readouterr().err


def test_gen_instance_writes_a_loadable_bundle(tmp_path, capsys):
    out = tmp_path / "inst.json"
    assert main(["gen-instance", "--out", str(out), "--report", str(tmp_path / "r.json")]) == 0
    printed = _printed(capsys)
    assert printed["passed"]
    assert {row["name"] for row in printed["results"]} >= {"preimage_bound", "planted_strong_frac"}
    instance = InstanceRepository().load(out)
    labeling = InstanceRepository().load_labeling(tmp_path / "inst.labeling.json", instance)
    assert len(labeling) == instance.num_vertices
    assert ReportRepository().load(tmp_path / "r.json").command == "gen-instance"


def test_derive_params_marks_overrides(tmp_path, capsys):
    assert main(["derive-params", "--out", str(tmp_path / "p.json"), "--report", str(tmp_path / "r.json")]) == 0
    report = ReportRepository().load(tmp_path / "r.json")
    assert not report.paper_faithful
    assert report.params["clamp_acceptance"]
    assert InstanceRepository().load_params(tmp_path / "p.json").Q == 8


def test_sample_writes_json_lines(tmp_path, capsys):
    out = tmp_path / "data.jsonl"
    assert main(["sample", "--n", "40", "--out", str(out), "--with-transcript"]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 40
    assert "transcript" in json.loads(lines[0])


def test_verify_complete_passes_and_replays(tmp_path, capsys):
    report_path = tmp_path / "verify.json"
    argv = ["verify-complete", "--n", "1000", "--report", str(report_path), "--csv", str(tmp_path / "verify.csv")]
    assert main(argv) == 0
    printed = _printed(capsys)
    names = [row["name"] for row in printed["results"]]
    assert names == ["completeness", "c1_accuracy", "marginal_matching"]
    assert (tmp_path / "verify.csv").exists()

    assert main(["replay", "--report", str(report_path)]) == 0
    replayed = _printed(capsys)
    assert replayed["command"] == "replay"
    assert replayed["passed"]


def test_replay_detects_edited_numbers(tmp_path, capsys):
    report_path = tmp_path / "verify.json"
    main(["verify-complete", "--n", "200", "--report", str(report_path)])
    data = json.loads(report_path.read_text())
    data["results"][1]["estimate"] = 0.0
    report_path.write_text(json.dumps(data))
    capsys.readouterr()
    assert main(["replay", "--report", str(report_path)]) == 1
    assert not _printed(capsys)["passed"]


def test_probe_reports_accuracy(tmp_path, capsys):
    argv = ["probe", "--sampler", "basic", "--train", "300", "--test", "300", "--out", str(tmp_path / "c.json")]
    assert main(argv) == 0
    names = {row["name"] for row in _printed(capsys)["results"]}
    assert names == {"train_accuracy", "test_accuracy", "moment_attack_accuracy"}
    assert (tmp_path / "c.json").exists()


def _dictator_bundle(tmp_path):
    instance, labeling = build_planted_instance(16, 8, 2, 8, 4, 2, seed=0)
    path = tmp_path / "coeffs.json"
    ClassifierRepository().save_bundle([classify.dictator_halfspace(labeling)], path)
    return path


def test_critindex_on_dictator_coefficients(tmp_path, capsys):
    coeffs = _dictator_bundle(tmp_path)
    assert main(["critindex", "--coeffs", str(coeffs)]) == 0
    rows = {row["name"]: row for row in _printed(capsys)["results"]}
    assert rows["niceness"]["passed"]
    assert "structural_conditions" in rows


def test_truncate_saves_the_truncated_bundle(tmp_path, capsys):
    coeffs = _dictator_bundle(tmp_path)
    out = tmp_path / "trunc.json"
    assert main(["truncate", "--coeffs", str(coeffs), "--trials", "200", "--out", str(out)]) == 0
    assert ClassifierRepository().load_bundle(out) == ClassifierRepository().load_bundle(coeffs)


def test_decode_dictator_coefficients(tmp_path, capsys):
    coeffs = _dictator_bundle(tmp_path)
    assert main(["decode", "--coeffs", str(coeffs), "--repeats", "200"]) == 0
    (row,) = _printed(capsys)["results"]
    assert row["name"] == "decode"


def test_anticonc_without_coefficients_runs_the_generic_checks(capsys):
    assert main(["anticonc", "--check", "lo", "--trials", "2000"]) == 0
    names = [row["name"] for row in _printed(capsys)["results"]]
    assert names == ["lo_exact_binomial", "lo_scaling"]


def test_berry_esseen_check(capsys):
    assert main(["anticonc", "--check", "berry-esseen"]) == 0
    names = [row["name"] for row in _printed(capsys)["results"]]
    assert names[-1] == "berry_esseen_monotone"


@pytest.mark.slow
def test_lemma_suite_passes(tmp_path, capsys):
    assert main(["lemma-suite", "--n", "2000", "--trials", "20000", "--report", str(tmp_path / "suite.json")]) == 0
    names = {row["name"] for row in _printed(capsys)["results"]}
    assert {"completeness", "moment_attack", "pathological_pair", "critical_decay", "decode_dictator"} <= names
