"""Command-line interface: artifacts, exit codes, determinism."""
import json
import subprocess
import sys

import numpy as np
import pytest

from rgsolve.cli import main
from rgsolve.model import (default_model, dumps_canonical, loads_document,
                           model_from_doc, model_to_doc, records_from_doc)

RAT_DOC = '{"kind": "rational", "g": 1.0, "epsilon": [0.3, 1.0, 1.8, 2.7]}\n'
HYP_DOC = ('{"kind": "hyperbolic", "g": 0.6451612903225806, '
           '"epsilon": [0.5, 1.1, 1.9, 2.6]}\n')
RG_DOC = '{"kind": "hyperbolic", "g": 1.0, "epsilon": [0.5, 1.1, 1.9, 2.6]}\n'


@pytest.fixture
def rat_model(tmp_path):
    p = tmp_path / "rat.json"
    p.write_text(RAT_DOC)
    return p


@pytest.fixture
def hyp_model(tmp_path):
    p = tmp_path / "hyp.json"
    p.write_text(HYP_DOC)
    return p


def test_solve_json_artifact(rat_model, tmp_path, capsys):
    out = tmp_path / "states.json"
    rc = main(["solve", "--model", str(rat_model), "--n", "2",
               "--with-rapidities", "--out", str(out)])
    assert rc == 0
    assert "6/6 seeds converged" in capsys.readouterr().err
    doc = loads_document(out.read_text())
    assert isinstance(doc, list) and len(doc) == 6
    model = model_from_doc(json.loads(RAT_DOC))
    records = records_from_doc(doc, model)
    assert all(r.converged and r.rapidities is not None for r in records)
    assert sorted(r.seed_occupation for r in records) == \
        ["0011", "0101", "0110", "1001", "1010", "1100"]


def test_solve_csv_columns(rat_model, tmp_path):
    out = tmp_path / "states.csv"
    rc = main(["solve", "--model", str(rat_model), "--n", "1",
               "--format", "csv", "--with-rapidities", "--duals",
               "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    header = lines[0].split(",")
    assert header[:4] == ["seed_occupation", "n", "converged", "residual"]
    assert "lambda_4" in header and "v_1_re" in header and "dual_3_im" in header
    assert len(lines) == 5  # header + C(4,1)
    assert lines[1].split(",")[0] == "1000"


def test_solve_is_deterministic(rat_model, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", "--model", str(rat_model), "--n", "2",
                 "--with-rapidities", "--duals", "--out", str(a)]) == 0
    assert main(["solve", "--model", str(rat_model), "--n", "2",
                 "--with-rapidities", "--duals", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_solve_bethe_method_polishes_rapidity_equations(rat_model, tmp_path):
    out = tmp_path / "states.json"
    rc = main(["solve", "--model", str(rat_model), "--n", "2",
               "--method", "bethe", "--out", str(out)])
    assert rc == 0
    from rgsolve.model import make_spectral_set
    from rgsolve.solvers import residual_bethe
    model = model_from_doc(json.loads(RAT_DOC))
    for rec in records_from_doc(loads_document(out.read_text()), model):
        assert rec.rapidities is not None
        assert np.abs(residual_bethe(model, rec.rapidities)).max() <= 1e-10


def test_solve_rejects_bad_sector(rat_model, capsys):
    assert main(["solve", "--model", str(rat_model), "--n", "9"]) == 3
    assert "error:" in capsys.readouterr().err


def test_missing_model_file_is_io_error(tmp_path, capsys):
    rc = main(["solve", "--model", str(tmp_path / "nope.json"), "--n", "1"])
    assert rc == 2


def test_malformed_model_document(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "rational"}')
    assert main(["solve", "--model", str(p), "--n", "1"]) == 2
    p.write_text('{"kind": "rational", "g": 1.0, "epsilon": [1.0, 1.0]}')
    assert main(["solve", "--model", str(p), "--n", "1"]) == 2


def test_read_green_duals_exit_names_singular_point(capsys, tmp_path):
    p = tmp_path / "rg.json"
    p.write_text(RG_DOC)
    rc = main(["solve", "--model", str(p), "--n", "1",
               "--with-rapidities", "--duals"])
    assert rc == 4
    err = capsys.readouterr().err
    assert "1/g = 1" in err and "Read-Green" in err


def test_overlap_between_stored_records(rat_model, tmp_path, capsys):
    out = tmp_path / "states.json"
    main(["solve", "--model", str(rat_model), "--n", "2",
          "--with-rapidities", "--out", str(out)])
    art = tmp_path / "ov.json"
    rc = main(["overlap", "--model", str(rat_model),
               "--bra", f"{out}#0", "--ket", f"{out}#3",
               "--method", "all", "--out", str(art)])
    assert rc == 0
    doc = loads_document(art.read_text())
    assert doc["max_deviation"] <= 1e-9
    assert {row["method"] for row in doc["rows"]} >= {"slavnov", "detj", "detk", "oracle"}


def test_overlap_with_product_state(rat_model, tmp_path, capsys):
    out = tmp_path / "states.json"
    main(["solve", "--model", str(rat_model), "--n", "2",
          "--with-rapidities", "--out", str(out)])
    rc = main(["overlap", "--model", str(rat_model),
               "--bra", f"{out}#1", "--ket-occ", "0110", "--method", "all"])
    assert rc == 0
    assert "max cross-route deviation" in capsys.readouterr().err


def test_overlap_with_literal_ket_rapidities(rat_model, tmp_path):
    out = tmp_path / "states.json"
    main(["solve", "--model", str(rat_model), "--n", "2",
          "--with-rapidities", "--out", str(out)])
    rc = main(["overlap", "--model", str(rat_model),
               "--bra", f"{out}#0",
               "--ket-rapidities", "0.8+0.4j,1.9-0.6j", "--method", "all"])
    assert rc == 0


def test_overlap_bad_bra_index(rat_model, tmp_path, capsys):
    out = tmp_path / "states.json"
    main(["solve", "--model", str(rat_model), "--n", "2", "--out", str(out)])
    rc = main(["overlap", "--model", str(rat_model),
               "--bra", f"{out}#11", "--ket-occ", "0110"])
    assert rc == 2


def test_overlap_ket_occupation_must_match_sector(rat_model, tmp_path):
    out = tmp_path / "states.json"
    main(["solve", "--model", str(rat_model), "--n", "2", "--out", str(out)])
    rc = main(["overlap", "--model", str(rat_model),
               "--bra", f"{out}#0", "--ket-occ", "0111"])
    assert rc == 3


def test_verify_all_suites_pass_on_default_model(capsys):
    rc = main(["verify", "--suite", "all", "--seed", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "11/11 properties passed" in out
    assert "FAIL" not in out


def test_verify_hyperbolic_model(hyp_model, capsys):
    rc = main(["verify", "--suite", "duality", "--model", str(hyp_model)])
    assert rc == 0
    assert "PASS duality.state-ratio" in capsys.readouterr().out


def test_verify_artifact_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["verify", "--suite", "cauchy", "--seed", "11",
                 "--format", "csv", "--out", str(a)]) == 0
    assert main(["verify", "--suite", "cauchy", "--seed", "11",
                 "--format", "csv", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_oracle_suites_respect_size_cap(tmp_path, capsys):
    big = {"kind": "rational", "g": 1.0,
           "epsilon": [0.4 * (i + 1) for i in range(10)]}
    p = tmp_path / "big.json"
    p.write_text(dumps_canonical(big))
    rc = main(["verify", "--suite", "duality", "--model", str(p)])
    assert rc == 3


def test_identities_runs_standalone(capsys):
    rc = main(["identities", "--seed", "5"])
    assert rc == 0
    assert "6/6 properties passed" in capsys.readouterr().out


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "rgsolve.cli", "verify", "--suite", "charges"],
        capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert "charges.commutators" in proc.stdout


def test_default_model_document_matches_library():
    doc = model_to_doc(default_model())
    assert doc == json.loads(dumps_canonical(doc))
