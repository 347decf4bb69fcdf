import json

import pytest

from dworksum import cli
from dworksum.errors import BudgetExceeded, ParseError, ValidationError

FLAGSHIP = {
    "p": 3,
    "f": 1,
    "A": [[1]],
    "gamma_k": [0],
    "a": [[1]],
    "precision": {"M": 6, "m_max": 2},
}

KLOOSTERMAN = {
    "p": 5,
    "f": 1,
    "A": [[1, -1]],
    "gamma_k": [0],
    "a": [1, 1],
    "precision": {"M": 6, "m_max": 2},
}


def test_job_parsing_and_validation():
    with pytest.raises(ParseError):
        cli.JobConfig({"p": 3, "A": [[1], [2, 3]], "gamma_k": [0], "a": [[1]]})
    with pytest.raises(ParseError):
        cli.JobConfig([1, 2, 3])
    with pytest.raises(ValidationError):
        cli.JobConfig({**FLAGSHIP, "p": 4})
    with pytest.raises(ValidationError):
        cli.JobConfig({**FLAGSHIP, "p": 2})
    with pytest.raises(ValidationError):
        cli.JobConfig({**FLAGSHIP, "gamma_k": [0, 0]})
    with pytest.raises(ValidationError):
        cli.JobConfig({**FLAGSHIP, "gamma_k": [1]})  # gamma = -1/2 outside cone
    with pytest.raises(ValidationError):
        cli.JobConfig({**FLAGSHIP, "a": [[1], [1]]})
    with pytest.raises(ValidationError):
        # rank-deficient matrix
        cli.JobConfig({**FLAGSHIP, "A": [[1, 2], [2, 4]], "gamma_k": [0, 0],
                       "a": [[1], [1]]})


def test_mprime_formula():
    job = cli.JobConfig(FLAGSHIP)
    assert job.comparison_precision() == 6 - 1 - 2
    job2 = cli.JobConfig({**KLOOSTERMAN, "precision": {"M": 8, "m_max": 3}})
    assert job2.comparison_precision() == 8 - 1 - 2


def test_polytope_command():
    rep = cli.run("polytope", KLOOSTERMAN)
    res = rep["result"]
    assert res["volume"] == 2
    assert res["denom"] == 1
    assert sorted(res["facets"]) == [[[-1, 1]], [[1, 1]]]
    assert rep["schema"] == 1


def test_gkz_command():
    rep = cli.run("gkz", KLOOSTERMAN)
    res = rep["result"]
    assert res["lattice_basis"] == [[1, 1]]
    assert len(res["euler"]) == 1 and len(res["box"]) == 1
    assert res["phi_kills_boxes"] is True
    assert res["euler"][0]["gamma"] == [0, 1]


def test_sums_and_trace_commands():
    rep = cli.run("sums", FLAGSHIP)
    levels = rep["result"]["levels"]
    assert len(levels) == 2
    assert all(l["agree"] for l in levels)
    # S_1 = -1 = 728 mod 3^6
    assert levels[0]["character_oracle"]["triples"] == [[0, 0, 728]]

    rep2 = cli.run("trace", FLAGSHIP)
    lv = rep2["result"]["levels"]
    assert all(l["routes_agree"] for l in lv)
    assert rep2["result"]["cap_formula"].startswith("ceil(")
    # (q - 1) Tr(G) = S_1 = -1
    assert lv[0]["scaled_trace"]["triples"] == [[0, 0, 728]]


def test_hyp_command():
    rep = cli.run("hyp", FLAGSHIP)
    entries = rep["result"]["entries"]
    assert len(entries) == 3
    values = {tuple(e["x"][0]): e["value"]["triples"] for e in entries}
    assert values[(0,)] == [[0, 0, 2]]
    assert values[(1,)] == [[0, 0, 728]]
    assert values[(2,)] == [[0, 0, 728]]


def test_charpoly_command():
    rep = cli.run("charpoly", FLAGSHIP)
    res = rep["result"]
    assert res["truncated_to"] is None
    assert res["coefficients"][0]["triples"] == [[0, 0, 1]]
    assert len(res["coefficients"]) == res["basis_size"] + 1


def test_charpoly_command_truncates_large_bases():
    square = {
        "p": 3,
        "f": 1,
        "A": [[1, 0, 1], [0, 1, 1]],
        "gamma_k": [0, 0],
        "a": [1, 1, 1],
        "precision": {"M": 6, "m_max": 2},
    }
    rep = cli.run("charpoly", square)
    res = rep["result"]
    assert res["basis_size"] > 128
    assert res["truncated_to"] == 8
    assert len(res["coefficients"]) == 9


def test_lfunction_command():
    rep = cli.run("lfunction", FLAGSHIP)
    res = rep["result"]
    assert res["routes_agree"] is True
    assert res["expected_degree"] == 1
    assert res["recognition"]["degree"] == 1
    # L = 1 - T
    assert res["recognition"]["coefficients"][1]["triples"] == [[0, 0, 728]]
    slopes = res["recognition"]["newton_polygon"]["slopes"]
    assert slopes == [[[0, 1], 1]]


def test_check_command_and_determinism():
    rep1 = cli.run("check", FLAGSHIP, workers=1)
    rep3 = cli.run("check", FLAGSHIP, workers=3)
    assert rep1["result"]["all_pass"] is True
    assert cli.render_report(rep1) == cli.render_report(rep3)


def test_nondegeneracy_command():
    rep = cli.run("nondegeneracy", KLOOSTERMAN)
    assert rep["result"]["verdict"] == "NondegenerateUpTo"
    degenerate = {**KLOOSTERMAN, "a": [0, 0]}
    rep2 = cli.run("nondegeneracy", degenerate)
    assert rep2["result"]["verdict"] == "DegenerateWitness"


def test_degenerate_check_passes_with_control():
    rep = cli.run("check", {**FLAGSHIP, "a": [[0]]})
    res = rep["result"]
    assert res["all_pass"] is True
    names = [c["name"] for c in res["checks"]]
    assert "degree_law_degenerate_control" in names


def test_main_exit_codes(tmp_path, capsys):
    good = tmp_path / "job.json"
    good.write_text(json.dumps(FLAGSHIP))
    out = tmp_path / "report.json"
    assert cli.main(["check", "--job", str(good), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["result"]["all_pass"] is True

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["polytope", "--job", str(bad)]) == 2
    capsys.readouterr()

    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({**FLAGSHIP, "p": 9}))
    assert cli.main(["check", "--job", str(invalid)]) == 2
    capsys.readouterr()

    budget = tmp_path / "budget.json"
    budget.write_text(
        json.dumps(
            {
                "p": 7,
                "f": 1,
                "A": [[1, 0, 1, 2, 1], [0, 1, 1, 1, 2]],
                "gamma_k": [0, 0],
                "a": [1, 1, 1, 1, 1],
                "precision": {"M": 4},
            }
        )
    )
    assert cli.main(["hyp", "--job", str(budget)]) == 4
    capsys.readouterr()

    missing = tmp_path / "missing.json"
    assert cli.main(["polytope", "--job", str(missing)]) == 2
    capsys.readouterr()


def test_reports_byte_identical(tmp_path):
    texts = set()
    for _ in range(2):
        rep = cli.run("lfunction", KLOOSTERMAN, workers=2)
        texts.add(cli.render_report(rep))
    assert len(texts) == 1
