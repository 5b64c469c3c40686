import copy
import hashlib
import json
import logging

import numpy as np
import pytest

from ceo_secrecy.cli import main
from ceo_secrecy.gaussian import q_grid
from ceo_secrecy.probcore import bsc
from ceo_secrecy.sourcefile import (
    SourceFormatError,
    bundled_path,
    csv_text,
    parse_source_file,
    source_from_dict,
)

BUNDLED = json.loads(bundled_path().read_text())


def read_csv(path):
    lines = path.read_text().splitlines()
    head = [ln[2:] for ln in lines if ln.startswith("# ")]
    body = [ln for ln in lines if not ln.startswith("#")]
    cols = body[0].split(",")
    rows = [ln.split(",") for ln in body[1:]]
    return head, cols, rows


def header_dict(head):
    return dict(h.split(": ", 1) for h in head)


def write_source(tmp_path, doc, name="src.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


# ------------------------------------------------------------------ loader


def test_bundled_fixture_loads():
    s = parse_source_file(bundled_path())
    assert np.array_equal(s.px, [0.5, 0.5])
    assert np.allclose(s.py1_x, bsc(0.1)) and np.allclose(s.py2_x, bsc(0.1))
    assert np.allclose(s.pe_x, bsc(0.3))
    assert s.d_max == 1.0


def test_nearly_normalized_row_is_renormalized_with_warning(caplog):
    doc = copy.deepcopy(BUNDLED)
    doc["py1_x"][1] = [0.1, 0.899999]
    with caplog.at_level(logging.WARNING, logger="ceo_secrecy"):
        s = source_from_dict(doc)
    assert abs(s.py1_x[1].sum() - 1.0) <= 1e-15
    assert any("py1_x row 1" in r.getMessage() for r in caplog.records)


def test_exactly_normalized_rows_are_silent(caplog):
    with caplog.at_level(logging.WARNING, logger="ceo_secrecy"):
        source_from_dict(BUNDLED)
    assert not caplog.records


@pytest.mark.parametrize("key,value,match", [
    ("pe_x", [[0.7, 0.3], [-0.1, 1.1]], r"pe_x: negative value .* row 1, column 0"),
    ("px", [0.6, 0.6], r"px sums to"),
    ("py2_x", [[0.9, 0.1], [0.2, 0.9]], r"py2_x row 1 sums to"),
    ("py1_x", [[0.9, 0.1]], r"py1_x"),
    ("distortion", [[0, 1], [-1, 0]], r"distortion: negative value at row 1, column 0"),
    ("px", "half", r"px: not a numeric array"),
])
def test_loader_rejections(key, value, match):
    doc = copy.deepcopy(BUNDLED)
    doc[key] = value
    with pytest.raises(SourceFormatError, match=match):
        source_from_dict(doc)


def test_loader_checks_declared_alphabets_and_fields():
    doc = copy.deepcopy(BUNDLED)
    doc["alphabets"]["E"] = 3
    with pytest.raises(SourceFormatError, match="alphabet E"):
        source_from_dict(doc)
    del doc["pe_x"]
    with pytest.raises(SourceFormatError, match="missing field 'pe_x'"):
        source_from_dict(doc)


# ------------------------------------------------------------------ gaussian


def test_gaussian_sweep_rows_and_header(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gaussian", "--var-x", "1", "--var-n1", "1", "--var-n2", "1", "--distortion", "0.5",
                 "--grid", "50", "--out", str(out)]) == 0
    head, cols, rows = read_csv(out)
    q = q_grid(50, 1 - 2.0 ** -8)
    expected = sum(1 for a in q for b in q if 2.0 <= (1 + a + b) * (1 + 1e-12))
    assert len(rows) == expected
    assert cols == ["r1", "r2", "R1lb", "R2lb", "SUMlb", "D1ub", "D2ub", "DSUMub", "D1mR2ub", "D2mR1ub",
                    "Dmin", "T1", "T2"]
    assert all(float(r[-1]) == 0.0 and float(r[-2]) == 0.0 for r in rows)
    h = header_dict(head)
    assert h["tool"] == "ceo-secrecy 0.1.0"
    assert h["seed"] == "none"
    assert h["command"].startswith("ceo-secrecy gaussian --var-x 1")
    assert len(h["source_sha256"]) == 64


def test_gaussian_with_eve_has_t_columns(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gaussian", "--var-x", "1", "--var-n1", "1", "--var-n2", "1", "--var-ne", "0.5",
                 "--distortion", "0.5", "--grid", "12", "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    assert any(float(r[-2]) > 0 for r in rows)


def test_gaussian_infeasible_exit_code(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code = main(["gaussian", "--var-x", "1", "--var-n1", "1", "--var-n2", "1", "--distortion", "1e-9",
                 "--grid", "5", "--out", str(out)])
    assert code == 2
    assert "0.33333333333333" in capsys.readouterr().err
    assert not out.exists()


# ------------------------------------------------------------------ discrete


def test_discrete_single_sample_budget(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["discrete", "--budget", "1,1", "--out", str(out)]) == 0
    head, cols, rows = read_csv(out)
    assert cols == ["R1", "R2", "Delta1", "Delta2", "D", "config_id"]
    assert len(rows) == 1
    prov = json.loads(out.with_suffix(".json").read_text())
    assert set(prov["configs"]) == {rows[0][-1]}
    h = header_dict(head)
    assert h["source_sha256"] == hashlib.sha256(bundled_path().read_bytes()).hexdigest()
    assert h["seed"] == "0"


def test_discrete_trade_off_is_monotone(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["discrete", "--axes", "Delta1,R2", "--budget", "2,40", "--grid", "5", "--seed", "2",
                 "--out", str(out)]) == 0
    prov = json.loads(out.with_suffix(".json").read_text())
    pts = sorted({(p[2], p[1]) for p in prov["hull"]})
    # along the hull, more equivocation for agent 1 never comes with a smaller R2
    best = []
    for d1, r2 in pts:
        if not any(o_d1 >= d1 and o_r2 <= r2 and (o_d1, o_r2) != (d1, r2) for o_d1, o_r2 in pts):
            best.append((d1, r2))
    assert all(b[1] >= a[1] for a, b in zip(best, best[1:]))


def test_discrete_bad_config_exit_code(tmp_path):
    doc = copy.deepcopy(BUNDLED)
    doc["px"] = [0.5, -0.5]
    src = write_source(tmp_path, doc)
    assert main(["discrete", "--config", str(src), "--budget", "1,1", "--out", str(tmp_path / "d.csv")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["discrete", "--config", str(bad), "--budget", "1,1", "--out", str(tmp_path / "d.csv")]) == 2


def test_discrete_cardinality_exit_code(tmp_path):
    assert main(["discrete", "--mode", "outer", "--cards", "2,2,10,1", "--budget", "1,1",
                 "--out", str(tmp_path / "d.csv")]) == 2


# ------------------------------------------------------------------ simulate


def test_simulate_dry_run(tmp_path):
    out = tmp_path / "s.json"
    assert main(["simulate", "--n", "8", "--trials", "0", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["summary"] is None
    assert doc["config"]["n"] == 8


def test_simulate_cap_exit_code(tmp_path, capsys):
    assert main(["simulate", "--n", "20", "--equivocation", "--out", str(tmp_path / "s.json")]) == 3
    assert "CEO_ENUM_CAP" in capsys.readouterr().err


def test_simulate_with_equivocation(tmp_path):
    out = tmp_path / "s.json"
    assert main(["simulate", "--n", "4", "--trials", "50", "--eps", "0.375",
                 "--slack", "0,0,0.25,0,0,0,0,0", "--equivocation", "--seed", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    eq = doc["equivocation"]
    assert 0 <= eq["agent1"] <= eq["H_X_given_E"] + 1.25 + 1e-9
    assert eq["agent2"] == pytest.approx(eq["H_X_given_E"], abs=1e-12)
    assert doc["meta"]["seed"] == 3
    assert doc["summary"]["trials"] == 50


def test_simulate_usage_errors(tmp_path):
    assert main(["simulate", "--n", "4", "--rates", "1,2,3"]) == 64
    assert main(["simulate", "--n", "0", "--trials", "0"]) == 64


# ------------------------------------------------------------------ verify


def test_verify_empty_suite_is_usage_error():
    assert main(["verify", "--suite", ""]) == 64
    assert main(["verify", "--suite", "nonsense"]) == 64


def test_verify_gaussian_reduction(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "gaussian-reduction", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["passed"]
    assert all(r["max_deviation"] <= 1e-6 for r in doc["results"])
    assert "PASS gaussian-large-variance" in capsys.readouterr().out


def test_verify_corners(capsys):
    assert main(["verify", "--suite", "corners", "--draws", "200", "--seed", "4"]) == 0
    assert capsys.readouterr().out.count("PASS") == 2


def test_missing_command_and_version(capsys):
    assert main([]) == 64
    assert main(["--version"]) == 0
    assert "0.1.0" in capsys.readouterr().out


# ------------------------------------------------------------------ formatting


def test_csv_uses_seventeen_digits():
    text = csv_text(["tool: x"], ("a",), [(0.1,)])
    assert text.splitlines() == ["# tool: x", "a", "0.10000000000000001"]


@pytest.mark.parametrize("argv", [
    ["gaussian", "--var-x", "1", "--var-n1", "0.5", "--var-n2", "2", "--var-ne", "0.7", "--distortion", "0.6",
     "--grid", "15", "--out", "{out}.csv"],
    ["discrete", "--budget", "2,20", "--grid", "4", "--seed", "5", "--out", "{out}.csv"],
    ["discrete", "--mode", "outer", "--axes", "R1,D", "--budget", "1,15", "--grid", "3", "--out", "{out}.csv"],
    ["simulate", "--n", "4", "--trials", "100", "--seed", "9", "--equivocation", "--out", "{out}.json"],
    ["verify", "--suite", "all", "--draws", "20", "--seed", "2", "--out", "{out}.json"],
])
def test_outputs_are_byte_identical_on_rerun(tmp_path, argv):
    blobs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        args = [a.format(out=d / "out") for a in argv]
        assert main(args) == 0
        blobs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    # the command line embeds the output path, so compare with it masked
    for k in range(2):
        blobs[k] = {n: b.replace(str(tmp_path / f"run{k}").encode(), b"<dir>") for n, b in blobs[k].items()}
    assert blobs[0] == blobs[1]
