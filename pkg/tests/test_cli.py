import json

import pytest

from rtcalc.cli import main

PHI_D1 = {"builder": "phi_lambda", "d": 1, "lambda": ["1", "1"]}
PHI_D0 = {"builder": "phi_lambda", "d": 0, "lambda": ["1"]}
PHI_D0_TWO = {"builder": "phi_lambda", "d": 0, "lambda": ["2"]}
NOISE_D0 = {"builder": "noise_extend", "d": 0, "lambda": ["1"]}
PSI_D0 = {"builder": "spde_psi", "d": 0, "noise": False}
PSI_D0_TWO = {"builder": "spde_psi", "d": 0, "lambda": ["2"], "noise": False}

SYM_BASES = {
    "edge_basis": {"kind": "symbols", "id": "a", "names": ["a1", "a2"]},
    "vertex_basis": {"kind": "symbols", "id": "b", "names": ["b1", "b2"]},
}

BAD_TABLE = {
    "builder": "table",
    **SYM_BASES,
    "entries": [
        {"on": ["a1", "b1"], "terms": [[1, "a1", "b1"]]},
        {"on": ["a1", "b2"], "terms": [[1, "a1", "b2"]]},
        {"on": ["a2", "b1"], "terms": [[1, "a2", "b1"]]},
        {"on": ["a2", "b2"], "terms": [["1/2", "a2", "b2"], [1, "a1", "b1"]]},
    ],
}

IDENTITY_SYM = {"builder": "identity", **SYM_BASES}


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def jfile(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def tfile(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text + "\n")
    return str(path)


# ---------------------------------------------------------------------------
# apply-phi and check-compat


def test_apply_phi_text(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    code, out, _ = run(capsys, "apply-phi", "--phi", phi, "--a", "<1,0>", "--b", "<2,1>")
    assert code == 0
    assert out == "2*<0,0> (x) <1,1> + <1,0> (x) <2,1>\n"


def test_apply_phi_structured(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    code, out, _ = run(
        capsys, "apply-phi", "--phi", phi, "--a", "<1,0>", "--b", "<2,1>",
        "--format", "structured",
    )
    assert code == 0
    assert json.loads(out) == {
        "terms": [["2", "<0,0>", "<1,1>"], ["1", "<1,0>", "<2,1>"]]
    }


def test_apply_phi_rejects_label_outside_basis(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    code, _, err = run(capsys, "apply-phi", "--phi", phi, "--a", "<1>", "--b", "<0,0>")
    assert code == 2
    assert "1:1" in err and "edge basis" in err


def test_check_compat_bounded(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    code, out, _ = run(capsys, "check-compat", "--phi", phi, "--bound", "3")
    assert code == 0
    assert out == "VerifiedUpToBound(3)\n"


def test_check_compat_refutes_bad_table(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", BAD_TABLE)
    code, out, _ = run(capsys, "check-compat", "--phi", phi)
    assert code == 1
    assert out.startswith("Refuted(")


def test_check_compat_infinite_basis_needs_bound(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    code, _, err = run(capsys, "check-compat", "--phi", phi)
    assert code == 2
    assert "--bound" in err


# ---------------------------------------------------------------------------
# Products and operators on tree files


def test_graft_deformed_golden(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    x = tfile(tmp_path, "x.txt", "(<1,0>)")
    y = tfile(tmp_path, "y.txt", "(<0,0> [<1,1>](<1,0>))")
    code, out, _ = run(capsys, "graft", "--phi", phi, "--a", "<1,0>", x, y)
    assert code == 0
    assert out == (
        "(<0,0> [<1,0>](<1,0>) [<1,1>](<1,0>))"
        " + (<0,0> [<1,1>](<0,0> [<0,0>](<1,0>)))"
        " + (<0,0> [<1,1>](<1,0> [<1,0>](<1,0>)))\n"
    )


def test_graft_free_drops_deformation_terms(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    x = tfile(tmp_path, "x.txt", "(<1,0>)")
    y = tfile(tmp_path, "y.txt", "(<0,0> [<1,1>](<1,0>))")
    code, out, _ = run(capsys, "graft-free", "--phi", phi, "--a", "<1,0>", x, y)
    assert code == 0
    assert out == (
        "(<0,0> [<1,0>](<1,0>) [<1,1>](<1,0>))"
        " + (<0,0> [<1,1>](<1,0> [<1,0>](<1,0>)))\n"
    )


def test_graft_equals_graft_free_under_identity(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", IDENTITY_SYM)
    x = tfile(tmp_path, "x.txt", "(b1)")
    y = tfile(tmp_path, "y.txt", "(b2 [a1](b1))")
    code1, out1, _ = run(capsys, "graft", "--phi", phi, "--a", "a2", x, y)
    code2, out2, _ = run(capsys, "graft-free", "--phi", phi, "--a", "a2", x, y)
    assert code1 == code2 == 0
    assert out1 == out2


def test_theta_ladder_golden(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D0)
    t = tfile(tmp_path, "t.txt", "(<3> [<2>](<0>))")
    code, out, _ = run(capsys, "theta", "--phi", phi, t)
    assert code == 0
    assert out == "3*(<1> [<0>](<0>)) + 3*(<2> [<1>](<0>)) + (<3> [<2>](<0>))\n"


def test_star_golden(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    f1 = tfile(tmp_path, "f1.txt", "[<1,0>](<0,0>)")
    f2 = tfile(tmp_path, "f2.txt", "[<0,1>](<1,0>)")
    code, out, _ = run(capsys, "star", "--phi", phi, f1, f2)
    assert code == 0
    assert out == (
        "[<0,1>](<0,0> [<0,0>](<0,0>))"
        " + [<0,1>](<1,0>) [<1,0>](<0,0>)"
        " + [<0,1>](<1,0> [<1,0>](<0,0>))\n"
    )


def test_coprod_on_single_vertex_is_primitive(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    f = tfile(tmp_path, "f.txt", "[<0,1>](<1,0>)")
    code, out, _ = run(capsys, "coprod", "--phi", phi, f)
    assert code == 0
    assert out == "1 (x) [<0,1>](<1,0>) + [<0,1>](<1,0>) (x) 1\n"


def test_deshuffle_splits_a_two_tree_forest(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    f = tfile(tmp_path, "f.txt", "[<1,0>](<0,0>) [<0,1>](<0,0>)")
    code, out, _ = run(capsys, "deshuffle", "--phi", phi, f)
    assert code == 0
    assert out == (
        "1 (x) [<0,1>](<0,0>) [<1,0>](<0,0>)"
        " + [<0,1>](<0,0>) (x) [<1,0>](<0,0>)"
        " + [<0,1>](<0,0>) [<1,0>](<0,0>) (x) 1"
        " + [<1,0>](<0,0>) (x) [<0,1>](<0,0>)\n"
    )


def test_pair_diagonal_and_off_diagonal(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    f1 = tfile(tmp_path, "f1.txt", "[<1,0>](<0,0>)")
    f2 = tfile(tmp_path, "f2.txt", "[<0,1>](<1,0>)")
    code, out, _ = run(capsys, "pair", "--phi", phi, f1, f1)
    assert (code, out) == (0, "1\n")
    code, out, _ = run(capsys, "pair", "--phi", phi, f1, f2)
    assert (code, out) == (0, "0\n")


def test_pair_counts_forest_symmetry(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    f = tfile(tmp_path, "f.txt", "[<1,0>](<0,0>) [<1,0>](<0,0>)")
    code, out, _ = run(capsys, "pair", "--phi", phi, f, f)
    assert (code, out) == (0, "2\n")


# ---------------------------------------------------------------------------
# Generator actions


def test_psi_check_clean_at_unit_coefficients(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D0)
    psi = jfile(tmp_path, "psi.json", PSI_D0)
    code, out, _ = run(capsys, "psi-check", "--psi", psi, "--phi", phi, "--bound", "2")
    assert code == 0
    assert "no defects" in out


def test_psi_check_flags_other_coefficients(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D0_TWO)
    psi = jfile(tmp_path, "psi.json", PSI_D0_TWO)
    code, out, _ = run(capsys, "psi-check", "--psi", psi, "--phi", phi, "--bound", "2")
    assert code == 1
    assert "map-intertwining" in out


def test_postlie_check_zero_residuals(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D0)
    psi = jfile(tmp_path, "psi.json", PSI_D0)
    u = tfile(tmp_path, "u.txt", "X_0")
    v = tfile(tmp_path, "v.txt", "[<2>](<1>)")
    w = tfile(tmp_path, "w.txt", "[<1>](<0>)")
    code, out, _ = run(capsys, "postlie-check", "--phi", phi, "--psi", psi, u, v, w)
    assert code == 0
    assert out == "jacobi: 0\nderivation: 0\nassociator: 0\n"


def test_postlie_check_nonzero_residual(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D0_TWO)
    psi = jfile(tmp_path, "psi.json", PSI_D0_TWO)
    u = tfile(tmp_path, "u.txt", "X_0")
    v = tfile(tmp_path, "v.txt", "[<2>](<1>)")
    w = tfile(tmp_path, "w.txt", "[<1>](<0>)")
    code, out, _ = run(
        capsys, "postlie-check", "--phi", phi, "--psi", psi, u, v, w,
        "--format", "structured",
    )
    assert code == 1
    assert json.loads(out)["all_zero"] is False


def test_postlie_check_accepts_mixed_elements(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D0)
    psi = jfile(tmp_path, "psi.json", PSI_D0)
    u = tfile(tmp_path, "u.txt", "X_0 + 2*[<1>](<0>)")
    v = tfile(tmp_path, "v.txt", "X_0")
    w = tfile(tmp_path, "w.txt", "[<2>](<1> [<1>](<0>))")
    code, _, _ = run(capsys, "postlie-check", "--phi", phi, "--psi", psi, u, v, w)
    assert code == 0


def test_psi_tables_builder_roundtrip(tmp_path, capsys):
    psi = jfile(
        tmp_path,
        "psi.json",
        {
            "builder": "psi_tables",
            "generators": ["g"],
            **SYM_BASES,
            "edge": [{"on": ["g", "a1"], "terms": [[1, "a2"]]}],
            "vertex": [],
        },
    )
    phi = jfile(tmp_path, "phi.json", IDENTITY_SYM)
    code, out, _ = run(capsys, "psi-check", "--psi", psi, "--phi", phi)
    assert code == 1
    assert "map-intertwining" in out


# ---------------------------------------------------------------------------
# Demos, classification, suite


def test_spde_demo_plain(capsys):
    code, out, _ = run(capsys, "spde-demo", "--d", "0")
    assert code == 0
    assert "config: d=0 lambda=(1) noise=off" in out
    assert "phi(<2> (x) <3>) = 3*<0> (x) <1> + 3*<1> (x) <2> + <2> (x) <3>" in out
    assert "inverse check" in out
    assert "admissible" not in out


def test_spde_demo_with_noise(capsys):
    code, out, _ = run(capsys, "spde-demo", "--d", "0", "--noise")
    assert code == 0
    assert "extended phi on Xi (x) <3> = Xi (x) <3>" in out
    assert "extended phi on <2> (x) * = 0" in out
    assert "admissible [Xi](*): True" in out
    assert "admissible [Xi](<0>): False" in out


def test_spde_demo_lambda_csv(capsys):
    code, out, _ = run(capsys, "spde-demo", "--d", "1", "--lambda", "1,1/2")
    assert code == 0
    assert "lambda=(1,1/2)" in out


def test_spde_demo_rejects_wrong_lambda_length(capsys):
    code, _, err = run(capsys, "spde-demo", "--d", "1", "--lambda", "1")
    assert code == 2
    assert "lambda" in err


def test_spde_demo_structured_lines(capsys):
    code, out, _ = run(capsys, "spde-demo", "--d", "0", "--format", "structured")
    assert code == 0
    lines = json.loads(out)["lines"]
    assert lines[0] == "config: d=0 lambda=(1) noise=off"


def test_classify_m2_already_jd(tmp_path, capsys):
    grid = jfile(
        tmp_path,
        "grid.json",
        {
            "builder": "blocks",
            "jd": {"A": [[0, 1], [0, 0]], "B": [[0, "1/2"], [0, 0]], "form": "J"},
        },
    )
    code, out, _ = run(capsys, "classify-m2", "--phi", grid)
    assert code == 0
    assert out.splitlines()[0] == "AlreadyJD(form=J)"


def test_classify_m2_diagonalizes(tmp_path, capsys):
    grid = jfile(
        tmp_path, "grid.json", {"builder": "blocks", "blocks": [[[[1, 1], [0, 2]]]]}
    )
    code, out, _ = run(capsys, "classify-m2", "--phi", grid, "--format", "structured")
    assert code == 0
    data = json.loads(out)
    assert data["result"] == "AlreadyJD" and data["form"] == "D"
    assert data["basis_change"] == [["1", "1"], ["1", "0"]]


def test_classify_m2_noncommuting(tmp_path, capsys):
    grid = jfile(
        tmp_path,
        "grid.json",
        {
            "builder": "blocks",
            "blocks": [
                [[[0, 1], [0, 0]], [[1, 0], [0, 1]]],
                [[[0, 0], [0, 0]], [[0, 0], [1, 0]]],
            ],
        },
    )
    code, out, _ = run(capsys, "classify-m2", "--phi", grid)
    assert code == 1
    assert out.startswith("NotCompatible:")


def test_classify_m2_irrational_eigenvalues(tmp_path, capsys):
    grid = jfile(
        tmp_path, "grid.json", {"builder": "blocks", "blocks": [[[[0, 1], [2, 0]]]]}
    )
    code, out, _ = run(capsys, "classify-m2", "--phi", grid)
    assert code == 0
    assert out.startswith("NeedsAlgebraicExtension:")


def test_verify_suite_small(capsys):
    code, out, _ = run(capsys, "verify-suite", "--level", "small")
    assert code == 0
    assert "12/12 checks passed at level small" in out
    assert out.count("ok ") >= 12


# ---------------------------------------------------------------------------
# Failure modes and determinism


def test_missing_file_is_a_usage_error(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    code, _, err = run(capsys, "theta", "--phi", phi, str(tmp_path / "nope.txt"))
    assert code == 2
    assert "rtcalc: error:" in err


def test_invalid_json_is_a_usage_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{oops")
    code, _, err = run(capsys, "check-compat", "--phi", str(path))
    assert code == 2
    assert "not valid JSON" in err


def test_parse_error_carries_position(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    t = tfile(tmp_path, "t.txt", "(<1,0> [<0,0>]")
    code, _, err = run(capsys, "theta", "--phi", phi, t)
    assert code == 2
    assert "2:1" in err


def test_missing_required_flag_exits_2(tmp_path, capsys):
    t = tfile(tmp_path, "t.txt", "(<1,0>)")
    with pytest.raises(SystemExit) as exc:
        main(["theta", t])
    assert exc.value.code == 2


def test_output_is_deterministic(tmp_path, capsys):
    phi = jfile(tmp_path, "phi.json", PHI_D1)
    f1 = tfile(tmp_path, "f1.txt", "[<1,0>](<0,0>)")
    f2 = tfile(tmp_path, "f2.txt", "[<0,1>](<1,0>)")
    _, first, _ = run(capsys, "star", "--phi", phi, f1, f2)
    _, second, _ = run(capsys, "star", "--phi", phi, f1, f2)
    assert first == second
