"""
End-to-end tests for the glassbound command line.

Each test runs backend.cli.main in-process and checks the exit code and
the artifact it wrote.

Usage:
    pytest test_cli.py
"""
import copy
import json
import os
import re

import pytest

from backend.cli import RunConfig, main
from shared.exceptions import UsageError

EXAMPLE_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures", "glass_example.json")


def example_document():
    with open(EXAMPLE_PATH) as f:
        return json.load(f)


def write_json(path, document):
    path.write_text(json.dumps(document))
    return str(path)


def data_rows(path):
    """CSV rows of an artifact, provenance comments and header dropped."""
    lines = [line for line in path.read_text().splitlines() if line and not line.startswith("#")]
    return [line.split(",") for line in lines[1:]]


def test_validate_example(tmp_path):
    out = tmp_path / "validate.json"
    assert main(["validate", "--spec", EXAMPLE_PATH, "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["ok"] is True
    assert len(data["conditions"]) == 3
    assert data["provenance"]["command"] == "validate"
    assert len(data["provenance"]["spec_sha256"]) == 64


def test_tg_of_an_all_terminal_network(tmp_path):
    spec_path = write_json(tmp_path / "terminal.json", {
        "n": 2, "lambda": ["1", "1"],
        "gamma": {"00": ["-1", "-1"], "01": ["-1", "1"], "10": ["1", "-1"], "11": ["1", "1"]},
    })
    out = tmp_path / "tg.csv"
    assert main(["tg", "--spec", spec_path, "--format", "csv", "--out", str(out)]) == 0
    assert data_rows(out) == [["00", "00"], ["01", "01"], ["10", "10"], ["11", "11"]]


def test_tg_dot_carries_the_entropy(tmp_path):
    out = tmp_path / "tg.dot"
    assert main(["tg", "--spec", EXAMPLE_PATH, "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("// ")
    entropy = float(re.search(r'entropy="([0-9.]+)"', text).group(1))
    assert entropy == pytest.approx(0.873, abs=1e-3)


def test_report_pipeline(tmp_path):
    out = tmp_path / "report.json"
    assert main(["report", "--spec", EXAMPLE_PATH, "--k", "2", "--threads", "1", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["completed"] == ["validate", "tg", "cycles", "cones", "trap", "refine"]
    assert data["failed_stage"] is None
    entropies = data["entropies"]
    assert entropies["TG"] == pytest.approx(0.873, abs=1e-3)
    assert entropies["TG_r"] == pytest.approx(0.224, abs=5e-4)
    assert entropies["TG_r(1)"] == pytest.approx(0.111, abs=1e-3)
    assert entropies["TG_r(2)"] == pytest.approx(0.0813, abs=5e-4)
    assert data["trap"]["verified"] is True
    assert data["cycles"]["starting_edge"] == "1111>1110"


def test_refine_output_is_reproducible(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        assert main(["refine", "--spec", EXAMPLE_PATH, "--k", "2", "--threads", "1", "--out", str(out)]) == 0
    assert first.read_bytes() == second.read_bytes()
    data = json.loads(first.read_text())
    assert data["words"] == ["AA", "AB", "BA"]
    assert data["forbidden"] == ["BB"]


def test_refine_with_a_forbidden_word(tmp_path):
    out = tmp_path / "refine.csv"
    assert main(["refine", "--spec", EXAMPLE_PATH, "--k", "2", "--threads", "1",
                 "--forbid", "BAAB", "--format", "csv", "--out", str(out)]) == 0
    rows = data_rows(out)
    assert rows[-1][0] == "TG_r(4) forbidding BAAB"
    assert float(rows[-1][2]) == pytest.approx(0.0706, abs=1e-3)


def test_bad_spec_exits_with_spec_error(tmp_path, capsys):
    spec_path = write_json(tmp_path / "bad.json", {
        "n": 2, "lambda": ["1", "1"], "gamma": {"00": ["1", "-1"]},
    })
    assert main(["validate", "--spec", spec_path]) == 2
    report = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert report["type"] == "SpecError"
    assert report["stage"] == "validate"


def test_missing_spec_is_a_usage_error():
    assert main(["validate"]) == 2


def test_unverified_trap_exits_3(tmp_path):
    document = copy.deepcopy(example_document())
    del document["trap"]["cycles"]["A"]
    spec_path = write_json(tmp_path / "only_b.json", document)
    out = tmp_path / "trap.json"
    assert main(["trap", "--spec", spec_path, "--out", str(out)]) == 3
    data = json.loads(out.read_text())
    assert data["verified"] is False
    assert main(["refine", "--spec", spec_path, "--out", str(tmp_path / "refine.json")]) == 3


def test_report_records_the_failed_stage(tmp_path):
    document = copy.deepcopy(example_document())
    del document["trap"]["cycles"]["A"]
    spec_path = write_json(tmp_path / "only_b.json", document)
    out = tmp_path / "report.json"
    assert main(["report", "--spec", spec_path, "--threads", "1", "--out", str(out)]) == 3
    data = json.loads(out.read_text())
    assert data["failed_stage"] == "trap"
    assert data["completed"] == ["validate", "tg", "cycles", "cones"]


def test_cones_for_named_words(tmp_path):
    out = tmp_path / "cones.json"
    assert main(["cones", "--spec", EXAMPLE_PATH, "--words", "BB,BAAB", "--out", str(out)]) == 0
    entries = {e["word"]: e for e in json.loads(out.read_text())["cones"]}
    assert entries["BB"]["empty"] is True
    assert entries["BAAB"]["empty"] is False


def test_fit_from_a_counts_file(tmp_path):
    counts = tmp_path / "counts.csv"
    counts.write_text("# command=blocks\nn,count\n" + "".join(f"{n},{3 * 2 ** n}\n" for n in range(1, 11)))
    out = tmp_path / "fit.json"
    assert main(["fit", "--counts", str(counts), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["slope"] == pytest.approx(1.0)
    assert data["full"]["n_range"] == [2, 10]


def test_fit_with_one_row_exits_6(tmp_path):
    counts = tmp_path / "counts.csv"
    counts.write_text("n,count\n5,10\n")
    assert main(["fit", "--counts", str(counts)]) == 6


def test_simulate_binary_output(tmp_path):
    out = tmp_path / "run.bin"
    assert main(["simulate", "--spec", EXAMPLE_PATH, "--steps", "50", "--format", "bin",
                 "--out", str(out)]) == 0
    assert len(out.read_bytes()) == 100


def test_blocks_over_a_range(tmp_path):
    out = tmp_path / "blocks.csv"
    assert main(["blocks", "--spec", EXAMPLE_PATH, "--steps", "2000", "--block-range", "2:5",
                 "--threads", "1", "--out", str(out)]) == 0
    rows = data_rows(out)
    assert [int(r[0]) for r in rows] == [2, 3, 4, 5]
    counts = [int(r[1]) for r in rows]
    assert counts == sorted(counts)


def test_block_flags_are_exclusive():
    with pytest.raises(SystemExit):
        main(["blocks", "--spec", EXAMPLE_PATH, "--block-len", "3", "--block-range", "2:5"])


def test_run_config_rejects_bad_values():
    with pytest.raises(UsageError):
        RunConfig(command="refine", k=0)
    with pytest.raises(UsageError):
        RunConfig(command="nonsense")
