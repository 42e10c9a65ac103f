import json
import subprocess
import sys

import pytest

from conftest import chain, edgeless, kripke
from woodgames import cli
from woodgames.comonads import ComonadSpec, unravel
from woodgames.logic import evaluate, parse_formula, to_sexpr
from woodgames.logic.oracle import DISTINGUISHED, OracleVerdict
from woodgames.structures import dumps_structure, parse_structure
from woodgames.wooded import dumps_forest


@pytest.fixture
def files(tmp_path):
    def write(name, m):
        p = tmp_path / name
        p.write_text(dumps_structure(m))
        return str(p)

    bad = tmp_path / "bad.json"
    bad.write_text('{"size": 3,\n  "relations": [}')
    return {
        "L3": write("L3.json", chain(3)),
        "L4": write("L4.json", chain(4)),
        "E1": write("E1.json", edgeless(1)),
        "E2": write("E2.json", edgeless(2)),
        "K1": write("K1.json", kripke(1, marked=[0])),
        "K0": write("K0.json", kripke(1)),
        "bad": str(bad),
        "dir": tmp_path,
    }


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_game_same_file(capsys, files):
    code, out, _ = run(capsys, "game", "--k", "2", files["L3"], files["L3"])
    assert code == 0 and "winner: Duplicator" in out


def test_game_linear_orders(capsys, files):
    code, out, _ = run(capsys, "game", "--k", "3", "--with-identity", files["L3"], files["L4"])
    assert code == 1
    assert "winner: Spoiler" in out and "rank: 2" in out
    code, out, _ = run(capsys, "game", "--k", "2", "--with-identity", files["L3"], files["L4"])
    assert code == 0


def test_game_dump_is_indented_tree(capsys, files):
    _, out, _ = run(capsys, "game", "--k", "2", files["E1"], files["E1"])
    lines = out.splitlines()
    start = lines.index("positions:")
    assert lines[start + 1] == "  root ~ root  rank top"
    assert lines[start + 2].startswith("    0 ~ 0")
    assert lines[start + 3].startswith("      0.0 ~ 0.0")


def test_game_json_lines(capsys, files):
    code, out, _ = run(capsys, "game", "--k", "3", "--with-identity", "--format", "json-lines",
                       files["L3"], files["L4"])
    records = [json.loads(line) for line in out.splitlines()]
    assert records[0] == {"kind": "verdict", "winner": "Spoiler", "position": "root,root",
                          "rank": 2, "stabilization_rank": records[0]["stabilization_rank"]}
    positions = [r for r in records if r["kind"] == "position"]
    assert len(positions) == len(records) - 1
    assert {r["rank"] for r in positions} <= {"top", 0, 1, 2}


def test_game_deterministic(capsys, files):
    a = run(capsys, "game", "--k", "2", "--with-identity", files["L3"], files["E2"])
    b = run(capsys, "game", "--k", "2", "--with-identity", files["L3"], files["E2"])
    assert a == b


def test_game_position_flag(capsys, files):
    code, out, _ = run(capsys, "game", "--k", "3", "--with-identity", "--position", "0.1,0.1",
                       "--no-positions", files["L3"], files["L4"])
    assert "position: 0.1,0.1" in out
    assert code in (0, 1)
    code, _, err = run(capsys, "game", "--k", "2", "--position", "9.9,0", files["L3"], files["L4"])
    assert code == 2 and "no path node" in err


def test_game_forest_input(capsys, files, tmp_path):
    spec = ComonadSpec("ef", 2)
    p = tmp_path / "f.json"
    p.write_text(dumps_forest(unravel(spec, chain(2))))
    code, out, _ = run(capsys, "game", "--k", "2", "--no-positions", str(p), str(p))
    assert code == 0


def test_malformed_file(capsys, files):
    code, _, err = run(capsys, "game", "--k", "2", files["bad"], files["L3"])
    assert code == 2
    assert "bad.json:2:" in err


def test_missing_file_and_bad_k(capsys, files):
    code, _, err = run(capsys, "game", "--k", "2", "nope.json", files["L3"])
    assert code == 2 and "nope.json" in err
    code, _, _ = run(capsys, "game", "--k", "0", files["L3"], files["L3"])
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["game", "--comonad", "hybrid", files["L3"], files["L3"]])
    assert exc.value.code == 2


def test_hintikka_rank_zero(capsys, files):
    for path in (files["L3"], files["E1"]):
        code, out, _ = run(capsys, "hintikka", "--k", "2", "--rank", "0", path)
        assert code == 0 and out.strip() == "⊤"
    code, out, _ = run(capsys, "hintikka", "--comonad", "modal", "--k", "2", "--rank", "0", files["K1"])
    assert out.strip() == "⊤"


def test_hintikka_json_roundtrip(capsys, files):
    _, out, _ = run(capsys, "hintikka", "--k", "2", "--with-identity", "--rank", "1", "--node", "0",
                    "--format", "json-lines", files["L3"])
    rec = json.loads(out)
    phi = parse_formula(rec["formula"])
    assert to_sexpr(phi) == rec["formula"]
    assert rec["free"] == ["z1"] and rec["quantifier_rank"] == 1


def test_hintikka_shape_file(capsys, files, tmp_path):
    shape = unravel(ComonadSpec("ef", 2), chain(3)).tree.shape[0]
    p = tmp_path / "q.json"
    p.write_text(json.dumps(shape.to_dict()))
    code, out, _ = run(capsys, "hintikka", "--k", "2", "--rank", "1", "--shape", str(p), files["L3"])
    assert code == 0 and parse_formula(out.strip()).free == frozenset()


def test_distinguish(capsys, files):
    code, out, _ = run(capsys, "distinguish", "--k", "3", "--with-identity", files["L3"], files["L3"])
    assert code == 0 and out.strip() == "equivalent"
    code, out, _ = run(capsys, "distinguish", "--k", "2", "--with-identity", files["E1"], files["E2"])
    assert code == 1
    head, text = out.splitlines()
    assert head == "rank 2"
    phi = parse_formula(text)
    assert evaluate(edgeless(1), phi) and not evaluate(edgeless(2), phi)


def test_oracle_agrees(capsys, files):
    code, out, _ = run(capsys, "oracle", "--k", "2", "--with-identity", files["E1"], files["E2"])
    assert code == 1 and "ORACLE MISMATCH" not in out
    code, out, _ = run(capsys, "oracle", "--k", "2", "--with-identity", files["L3"], files["L4"])
    assert code == 0
    code, out, _ = run(capsys, "oracle", "--comonad", "modal", "--k", "1", files["K1"], files["K0"])
    assert code == 1


def test_oracle_mismatch_exit(capsys, files, monkeypatch):
    fake = OracleVerdict(DISTINGUISHED, parse_formula("(exists x (R x x))"), "M", 1)
    monkeypatch.setattr(cli, "rank_k_equivalent_oracle", lambda *a, **k: fake)
    code, out, _ = run(capsys, "oracle", "--k", "2", files["L3"], files["L3"])
    assert code == 3 and "ORACLE MISMATCH" in out


def test_oracle_budget(capsys, files):
    code, _, err = run(capsys, "oracle", "--k", "3", "--with-identity", "--budget", "5", files["L3"], files["L4"])
    assert code == 2 and "budget" in err


def test_corpus_counts(capsys, tmp_path):
    out = tmp_path / "c"
    code, _, _ = run(capsys, "corpus", "--max-size", "2", "--out-dir", out)
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert len(names) == 19
    assert names[0] == "s0_00000.json"
    for p in out.iterdir():
        parse_structure(p.read_text())


def test_corpus_size_zero(capsys, tmp_path):
    out = tmp_path / "c"
    run(capsys, "corpus", "--max-size", "0", "--out-dir", out)
    files = list(out.iterdir())
    assert len(files) == 1
    assert parse_structure(files[0].read_text()).size == 0


def test_corpus_deterministic(capsys, tmp_path):
    def snap(d):
        return {p.name: p.read_bytes() for p in d.iterdir()}

    for name in ("a", "b"):
        run(capsys, "corpus", "--min-size", "5", "--max-size", "5", "--sample", "7", "--seed", "3",
            "--out-dir", tmp_path / name)
    assert snap(tmp_path / "a") == snap(tmp_path / "b")
    assert len(snap(tmp_path / "a")) == 7
    code, _, err = run(capsys, "corpus", "--min-size", "5", "--max-size", "5", "--out-dir", tmp_path / "x")
    assert code == 2 and "--sample" in err


def test_corpus_iso(capsys, tmp_path):
    run(capsys, "corpus", "--max-size", "3", "--iso", "--out-dir", tmp_path / "i")
    assert len(list((tmp_path / "i").iterdir())) == 1 + 2 + 10 + 104


def test_console_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "woodgames.cli", "game", "--k", "3", "--with-identity",
                           "--no-positions", files["L3"], files["L4"]], capture_output=True, text=True)
    assert proc.returncode == 1 and "Spoiler" in proc.stdout
