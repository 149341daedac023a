"""命令行测试"""

import xml.etree.ElementTree as ET

import pytest
import yaml

import main
from src.phylo import parse_newick


@pytest.fixture(autouse=True)
def in_repo(repo_root, monkeypatch):
    monkeypatch.chdir(repo_root)


def _rhythm_file(tmp_path, body: str):
    path = tmp_path / "patterns.txt"
    path.write_text(body, encoding="utf-8")
    return str(path)


def test_selfcheck(capsys):
    assert main.main(["selfcheck"]) == main.EXIT_OK
    out = capsys.readouterr().out
    assert "✗" not in out
    assert "28 40 34 26 36" in out
    assert "26 29 31 21 21" in out


def test_distances_table(tmp_path):
    out = tmp_path / "table.csv"
    assert main.main(["distances", "--metric", "chronotonic", "-o", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "chronotonic,solea,buleria,seguiriya,guajira,fandango"
    assert lines[-2:] == ["Σ,28,40,34,26,36", "Max,10,14,12,8,14"]
    assert (tmp_path / "table.txt").exists()


def test_distances_permutation(tmp_path):
    out = tmp_path / "perm.csv"
    assert main.main(["distances", "--metric", "permutation", "-o", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[1] == "solea,0,1,11,7,7"
    assert lines[-1] == "Max,11,12,12,8,8"


def test_distances_byte_stable(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main.main(["distances", "--metric", "hamming", "-o", str(a)])
    main.main(["distances", "--metric", "hamming", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_empty_file(tmp_path, capsys):
    path = _rhythm_file(tmp_path, "")
    assert main.main(["distances", path]) == main.EXIT_INPUT
    assert "✗" in capsys.readouterr().err


def test_parse_error_names_line(tmp_path, capsys):
    path = _rhythm_file(tmp_path, "format: binary\na = 1010\nb = 10z0\n")
    assert main.main(["distances", path]) == main.EXIT_INPUT
    assert "第 3 行" in capsys.readouterr().err


def test_cycle_mismatch(tmp_path):
    path = _rhythm_file(tmp_path, "format: binary\na = 1010\nb = 100100\n")
    assert main.main(["distances", path]) == main.EXIT_CYCLE


def test_regularity_report(tmp_path, capsys):
    out = tmp_path / "opt.txt"
    assert main.main(["regularity", "--n", "12", "--k", "5", "--criterion", "max-area", "-o", str(out)]) == 0
    assert "{3,3,2,2,2}" in capsys.readouterr().out
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 24
    assert "3 6 8 10 12" in lines


def test_regularity_12_4(capsys):
    assert main.main(["regularity", "--n", "12", "--k", "4"]) == 0
    assert "{3,3,3,3}" in capsys.readouterr().out


def test_regularity_invalid_k():
    assert main.main(["regularity", "--n", "12", "--k", "13"]) == main.EXIT_INPUT


def test_regularity_fallback(capsys):
    assert main.main(["regularity", "--n", "60", "--k", "25"]) == 0
    out = capsys.readouterr().out
    assert "unverified" in out


def test_regularity_pattern(capsys):
    assert main.main(["regularity", "--pattern", "buleria"]) == 0
    assert "✗ buleria" in capsys.readouterr().out


def test_regularity_budget_exceeded(tmp_path):
    onsets = ",".join(str(i) for i in range(1, 41, 2))
    path = _rhythm_file(tmp_path, f"format: onset_list\nn: 40\nbig = {onsets}\n")
    assert main.main(["regularity", path, "--pattern", "big"]) == main.EXIT_BUDGET


def test_segment_debla(tmp_path):
    out = tmp_path / "steps.csv"
    svg = tmp_path / "steps.svg"
    args = ["segment", "--alpha", "12hz", "data/melodies/debla.csv", "-o", str(out), "--svg", str(svg)]
    assert main.main(args) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t_start,t_end,value"
    assert len(lines) == 3
    assert lines[1].startswith("0.200000,6.300000,396.000000")
    ET.parse(svg)


def test_segment_unit_mismatch():
    assert main.main(["segment", "--alpha", "100cents"]) == main.EXIT_INPUT


def test_tree(tmp_path):
    out = tmp_path / "tree.nwk"
    assert main.main(["tree", "--metric", "chronotonic", "-o", str(out)]) == 0
    tree = parse_newick(out.read_text(encoding="utf-8"))
    assert sorted(tree.leaves()) == ["buleria", "fandango", "guajira", "seguiriya", "solea"]


def test_tree_from_matrix(tmp_path):
    matrix = tmp_path / "m.csv"
    main.main(["distances", "--metric", "permutation", "-o", str(matrix)])
    out = tmp_path / "tree.nwk"
    assert main.main(["tree", "--matrix", str(matrix), "-o", str(out)]) == 0
    assert out.read_text(encoding="utf-8").strip().endswith(";")


def test_tree_error(tmp_path):
    matrix = tmp_path / "m.csv"
    matrix.write_text("d,a,b\na,0,1\nb,1,0\n", encoding="utf-8")
    assert main.main(["tree", "--matrix", str(matrix)]) == main.EXIT_TREE


def test_plot_polygon(tmp_path):
    svg = tmp_path / "fandango.svg"
    assert main.main(["plot", "--pattern", "fandango", "--svg", str(svg)]) == 0
    text = svg.read_text(encoding="utf-8")
    ET.fromstring(text)
    assert text.count('id="onset-') == 4


def test_plot_chronotonic(tmp_path):
    svg = tmp_path / "curves.svg"
    assert main.main(["plot", "--svg", str(svg)]) == 0
    assert 'id="curve-solea"' in svg.read_text(encoding="utf-8")


def test_run_config_overrides_flags(tmp_path):
    run = tmp_path / "run.yaml"
    out = tmp_path / "perm.csv"
    run.write_text(yaml.safe_dump({"metric": "permutation", "output": str(out)}), encoding="utf-8")
    assert main.main(["--run-config", str(run), "distances", "--metric", "hamming"]) == 0
    assert out.read_text(encoding="utf-8").startswith("permutation,")


def test_saved_run_replays(tmp_path):
    saved = tmp_path / "saved.yaml"
    first = tmp_path / "first.csv"
    assert main.main(["--save-run", str(saved), "distances", "--metric", "permutation", "-o", str(first)]) == 0
    data = yaml.safe_load(saved.read_text(encoding="utf-8"))
    assert data["command"] == "distances"
    assert data["metric"] == "permutation"

    second = tmp_path / "second.csv"
    data["output"] = str(second)
    saved.write_text(yaml.safe_dump(data), encoding="utf-8")
    assert main.main(["--run-config", str(saved), "distances"]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_corpus_accepts_cents_suffix(capsys):
    assert main.main(["corpus", "--trials", "1", "--alpha", "50cents"]) == 0
    assert "α=50 cents" in capsys.readouterr().out


def test_corpus_rejects_hz():
    assert main.main(["corpus", "--trials", "1", "--alpha", "12hz"]) == main.EXIT_INPUT


def test_no_command(capsys):
    assert main.main([]) == main.EXIT_INPUT


def test_info(capsys):
    assert main.main(["info"]) == 0
    out = capsys.readouterr().out
    assert "max-area" in out
    assert "✓" in out
