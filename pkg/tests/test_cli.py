import json
import math

import numpy as np
import pytest

from srumetrology import cli


@pytest.mark.parametrize("text, value", [("0.5pi", math.pi / 2), ("pi", math.pi), ("-pi", -math.pi),
                                         ("1/4pi", math.pi / 4), ("0.3", 0.3), ("2*pi", 2 * math.pi)])
def test_parse_angle(text, value):
    assert cli.parse_angle(text) == pytest.approx(value)


def test_parse_axis():
    np.testing.assert_allclose(cli.parse_axis("0:1pi:3"), [0, math.pi / 2, math.pi])
    np.testing.assert_allclose(cli.parse_axis("0,0.5pi"), [0, math.pi / 2])
    for bad in ("0:1:1", "0:1", "a:b:c"):
        with pytest.raises(ValueError):
            cli.parse_axis(bad)


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_qfi_surface_csv(capsys):
    code, out, _ = _run(capsys, "qfi-surface", "--s-m", "5", "--s-p", "2", "--mu", "1pi", "--phi", "0,0.5pi")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "s_m,s_p,mu,phi,qfi_closed,qfi_numeric,abs_diff"
    rows = [l.split(",") for l in lines[1:]]
    assert float(rows[1][4]) == 100  # optimal axis at mu = pi
    assert all(float(r[6]) < 1e-7 for r in rows)
    assert "\r" not in out


def test_no_oracle_drops_columns(capsys):
    _, out, _ = _run(capsys, "qfi-single", "--s", "2", "--mu", "0.5pi", "--phi", "0", "--no-oracle")
    assert out.splitlines() == ["s_m,mu,phi,qfi_closed", "2,1.5707963267948966,0,16"]


def test_multiparam_anchor_and_json_null(capsys):
    code, out, _ = _run(capsys, "multiparam", "--s", "1", "--mu", "0,0.5pi", "--phi1", "0,0.5pi", "--phi2", "0",
                        "--format", "json")
    assert code == 0
    rows = json.loads(out)
    anchor = next(r for r in rows if r["mu"] == pytest.approx(math.pi / 2) and r["phi1"] == 0)
    assert anchor["fig5_bound"] == pytest.approx(8 / 3, abs=1e-3)
    sing = next(r for r in rows if r["status"] == "singular")
    assert sing["fig5_bound"] is None


def test_rot_diff_generator_convention(capsys):
    _, out, _ = _run(capsys, "rot-diff", "--mu", "1pi", "--phi", "0", "--axis-convention", "generator")
    row = out.splitlines()[1].split(",")
    assert float(row[4]) == pytest.approx(4)


def test_sld_map_signs(capsys):
    _, out, _ = _run(capsys, "sld-map", "--j", "1", "--gamma", "1", "--phi", "0.5pi,1.5pi", "--strict")
    signs = [int(l.split(",")[5]) for l in out.splitlines()[1:]]
    assert signs == [1, -1]


def test_reports(capsys):
    code, out, _ = _run(capsys, "sdu-check", "--r", "0.5", "--strict")
    assert code == 0 and out.count("PASS") == 6
    code, out, _ = _run(capsys, "superchannel", "--n", "2", "--restarts", "2", "--strict")
    assert code == 0 and "FAIL" not in out


def test_wigner_output(capsys):
    code, out, _ = _run(capsys, "wigner", "--s", "2", "--mu", "0", "--n-theta", "9", "--n-phi", "12", "--strict")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "theta,phi,w_normalized,w_raw" and len(lines) == 1 + 9 * 12


def test_strict_turns_failures_into_exit_1(capsys):
    code, _, err = _run(capsys, "wigner", "--s", "3", "--n-theta", "3", "--n-phi", "4", "--strict")
    assert code == 1 and "failed" in err


def test_usage_errors_exit_2(capsys):
    for argv in (["qfi-surface", "--mu", "0:1:1"], ["qfi-surface", "--s-m", "1/3"], ["nope"],
                 ["qfi-surface", "--format", "xml"]):
        with pytest.raises(SystemExit) as exc:
            cli.main(argv)
        assert exc.value.code == 2
    capsys.readouterr()


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\ns_m = 3\ns-p: 1\nmu = 0.5pi\nphi = 0\nno_oracle = true\n")
    _, out, _ = _run(capsys, "qfi-surface", "--config", str(cfg), "--s-p", "2")
    assert out.splitlines()[1].startswith("3,2,")
    assert len(out.splitlines()[0].split(",")) == 5
    cfg.write_text("bogus = 1\n")
    with pytest.raises(SystemExit) as exc:
        cli.main(["qfi-surface", "--config", str(cfg)])
    assert exc.value.code == 2
    capsys.readouterr()


def test_parallel_output_is_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["qfi-surface", "--s-m", "2", "--s-p", "1", "--mu", "0:2pi:7", "--phi", "0:1pi:3"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_validate_and_fault_injection(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert cli.main(["validate", "--seed", "1", "--out", str(a)]) == 0
    assert cli.main(["validate", "--seed", "1", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = _run(capsys, "validate", "--inject-fault", "convention")
    assert code == 1
    failures = out.split("failures:")[1]
    assert "phi-convention" in failures
