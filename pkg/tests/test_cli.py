"""Command-line interface: parsing, merging, formats, exit codes."""

import json
import subprocess
import sys

import pytest

from oscmax.cli import RunConfig, main, parse_config, parse_weight
from oscmax.errors import UsageError
from oscmax.geometry import Grid, GridConfig


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- RunConfig -----------------------------------------------------------------


def test_runconfig_roundtrip():
    cfg = RunConfig(command="kernel", subcommand="tmax", x=(0.5,), y=(1e6,))
    again = RunConfig.from_dict(cfg.to_dict())
    assert again == cfg


def test_runconfig_rejects_unknown_keys():
    with pytest.raises(UsageError):
        RunConfig.from_dict({"command": "grid", "wat": 1})


def test_runconfig_validation():
    with pytest.raises(UsageError):
        RunConfig(command="grid", p=1.0)
    with pytest.raises(UsageError):
        RunConfig(command="grid", dimension=0)
    with pytest.raises(UsageError):
        RunConfig(command="grid", theta=-1.0)


def test_parse_config_flag_beats_file(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"dimension": 1, "max_layer": 3, "seed": 9}))
    cfg = parse_config(["grid", "dump", "--config", str(cfg_file),
                        "--lmax", "5"])
    assert cfg.max_layer == 5      # flag wins
    assert cfg.seed == 9           # file fills the gap


def test_parse_config_file_unknown_key(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"maxlayer": 3}))
    with pytest.raises(UsageError):
        parse_config(["grid", "dump", "--config", str(cfg_file)])


def test_parse_weight_forms():
    assert parse_weight("const:2", 2.0).kind == "constant"
    w = parse_weight("power:4", 2.0)
    assert w.kind == "power" and w.gamma == 4.0
    assert parse_weight("purepower:-0.5", 2.0).gamma == -0.5
    assert parse_weight("exp:1", 2.0).kind == "exponential"
    with pytest.raises(UsageError):
        parse_weight("mystery:1", 2.0)
    with pytest.raises(UsageError):
        parse_weight("power:abc", 2.0)


# -- grid subcommands -------------------------------------------------------------


def test_grid_dump_lines(capsys):
    code, out, _ = run_cli(["grid", "dump", "--d", "1", "--lmax", "2"], capsys)
    assert code == 0
    lines = out.splitlines()
    header = [l for l in lines if l.startswith("#")]
    cells = [l for l in lines if l and not l.startswith("#")]
    assert len(header) >= 2
    assert len(cells) == 22
    assert any("artifact_version" in h for h in header)


def test_grid_dump_single_layer(capsys):
    code, out, _ = run_cli(
        ["grid", "dump", "--d", "1", "--lmax", "2", "--layer", "1"], capsys)
    assert code == 0
    cells = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert len(cells) == 4
    assert all(l.split()[0] == "1" for l in cells)


def test_grid_near(capsys):
    code, out, _ = run_cli(
        ["grid", "near", "--d", "1", "--lmax", "3", "--point", "0.5"], capsys)
    assert code == 0
    cells = [l for l in out.splitlines() if l and not l.startswith("#")]
    # one region header line plus six cells
    assert cells[0].startswith("region")
    assert len(cells) == 1 + 6


def test_grid_qcube_json(capsys):
    code, out, _ = run_cli(
        ["grid", "qcube", "--d", "1", "--lmax", "3", "--point", "0.5",
         "--t", "1.0", "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["artifact_version"] == 1
    assert payload["result"]["exponent"] == 16
    assert payload["result"]["truncated"] is True


def test_grid_requires_point(capsys):
    code, _, err = run_cli(["grid", "near", "--d", "1", "--lmax", "3"], capsys)
    assert code == 2
    assert "--point" in err


# -- kernel subcommands --------------------------------------------------------------


def test_kernel_tmax_frozen_example(capsys):
    code, out, _ = run_cli(
        ["kernel", "tmax", "--x", "0.5", "--y", "1e6", "--format", "json"],
        capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["result"]["t_max"] == pytest.approx(6.18034e5, rel=1e-5)


def test_kernel_eval_variants(capsys):
    vals = {}
    for variant in ("heat", "hermite", "unrescaled"):
        code, out, _ = run_cli(
            ["kernel", "eval", "--x", "0.5", "--y", "2.0", "--t", "0.8",
             "--variant", variant, "--format", "json"], capsys)
        assert code == 0
        vals[variant] = json.loads(out)["result"]["log_value"]
    assert vals["hermite"] < vals["heat"]
    assert vals["unrescaled"] != vals["hermite"]


def test_kernel_eval_frozen_value(capsys):
    code, out, _ = run_cli(
        ["kernel", "eval", "--x", "0.5", "--y", "2.0", "--t", "1.0",
         "--variant", "hermite", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["log_value"] == pytest.approx(
        -2.9241423532474995, rel=1e-12)


def test_kernel_extremum(capsys):
    code, out, _ = run_cli(
        ["kernel", "extremum", "--cube-a", "0 0 0", "--cube-b", "2 0 9",
         "--t", "1.0", "--mode", "sup", "--format", "json"], capsys)
    assert code == 0
    sup = json.loads(out)["result"]["log_value"]
    code, out, _ = run_cli(
        ["kernel", "extremum", "--cube-a", "0 0 0", "--cube-b", "2 0 9",
         "--t", "1.0", "--mode", "inf", "--format", "json"], capsys)
    inf = json.loads(out)["result"]["log_value"]
    assert sup >= inf


def test_kernel_extremum_bad_cube_is_usage_error(capsys):
    # malformed and geometrically invalid cube lines both map to exit 2
    code, _, err = run_cli(
        ["kernel", "extremum", "--cube-a", "0:0:0", "--cube-b", "2 0 9",
         "--t", "1.0", "--mode", "sup"], capsys)
    assert code == 2
    assert "usage error" in err
    code, _, err = run_cli(
        ["kernel", "extremum", "--cube-a", "0 0 0", "--cube-b", "2 0 6",
         "--t", "1.0", "--mode", "sup"], capsys)
    assert code == 2
    assert "usage error" in err


def test_kernel_same_point_is_domain_error(capsys):
    code, _, err = run_cli(
        ["kernel", "tmax", "--x", "1.0", "--y", "1.0"], capsys)
    assert code == 3
    assert "error" in err


# -- maximal subcommand ---------------------------------------------------------------


def test_maximal_eval_csv(capsys):
    code, out, _ = run_cli(
        ["maximal", "eval", "--d", "1", "--lmax", "2", "--op", "m",
         "--function", "cell:0:0", "--at", "0.5", "-0.75"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert rows[0] == "x_1, operator, parameter, value"
    assert len(rows) == 3
    first = rows[1].split(", ")
    assert first[1] == "m"
    assert float(first[3]) == pytest.approx(1.0)


def test_maximal_theta_parameter_column(capsys):
    code, out, _ = run_cli(
        ["maximal", "eval", "--d", "1", "--lmax", "2", "--op", "mtheta",
         "--theta", "2.0", "--function", "const:1", "--at", "0.5"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert rows[1].split(", ")[2] == "2.0"


def test_maximal_all_ops_run(capsys):
    for op in ("m", "mtheta", "mloc", "mfar+", "mfar-", "tstar", "tsharp"):
        code, out, _ = run_cli(
            ["maximal", "eval", "--d", "1", "--lmax", "2", "--op", op,
             "--function", "const:1", "--at", "0.3"], capsys)
        assert code == 0, op
        rows = [l for l in out.splitlines() if l and not l.startswith("#")]
        value = float(rows[1].split(", ")[3])
        assert value >= 0.0


def test_maximal_bad_op(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["maximal", "eval", "--op", "bogus", "--at", "0.5"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_maximal_function_file(tmp_path, capsys):
    grid = Grid(GridConfig(1, 2))
    fpath = tmp_path / "f.txt"
    fpath.write_text("0 0 0 2.0\n")
    code, out, _ = run_cli(
        ["maximal", "eval", "--d", "1", "--lmax", "2", "--op", "m",
         "--function", f"file:{fpath}", "--at", "0.5"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert float(rows[1].split(", ")[3]) == pytest.approx(2.0)


# -- weights subcommand ----------------------------------------------------------------


def test_weights_sweep_ap_csv(capsys):
    code, out, _ = run_cli(
        ["weights", "sweep", "--class", "ap", "--weight", "power:4",
         "--mmax", "4"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert rows[0] == ("family, cube_id, sidelength, center_norm, ratio, "
                       "psi_theta, normalized_ratio")
    assert len(rows) == 1 + 4
    ratios = [float(r.split(", ")[4]) for r in rows[1:]]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_weights_sweep_aptheta_normalized(capsys):
    code, out, _ = run_cli(
        ["weights", "sweep", "--class", "aptheta", "--weight", "power:4",
         "--theta", "4", "--mmax", "4"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if l and not l.startswith("#")]
    for row in rows[1:]:
        parts = row.split(", ")
        assert float(parts[6]) == pytest.approx(
            float(parts[4]) / float(parts[5]), rel=1e-9)


def test_weights_sweep_aploc(capsys):
    code, out, _ = run_cli(
        ["weights", "sweep", "--class", "aploc", "--weight", "power:2",
         "--d", "1", "--lmax", "2", "--depth", "1"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert len(rows) > 1
    assert rows[1].split(", ")[0] == "near-subcubes"


def test_weights_sweep_appair(capsys):
    code, out, _ = run_cli(
        ["weights", "sweep", "--class", "appair", "--weight", "power:4",
         "--pairs", "3", "--seed", "42"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert rows[0] == ("family, pair_id, r_layer, rp_layer, log_sup_bound, "
                       "log_inf_bound, n_samples")
    assert len(rows) == 1 + 3
    for row in rows[1:]:
        parts = row.split(", ")
        assert float(parts[4]) >= float(parts[5])


def test_weights_sweep_nonintegrable_exit(capsys):
    code, _, err = run_cli(
        ["weights", "sweep", "--class", "ap", "--weight", "purepower:-3",
         "--mmax", "3"], capsys)
    assert code == 3
    assert "error" in err


def test_weights_p_validation_exit(capsys):
    code, _, err = run_cli(
        ["weights", "sweep", "--class", "ap", "--weight", "power:4",
         "--p", "1"], capsys)
    assert code == 2
    assert "usage error" in err


# -- verify subcommand -------------------------------------------------------------------


def test_verify_single_check_json(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, _, err = run_cli(
        ["verify", "--check", "tmax", "--seed", "42", "--output",
         str(out_path)], capsys)
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["all_passed"] is True
    assert [c["name"] for c in payload["checks"]] == ["tmax"]
    assert "tmax" in err          # human table goes to stderr


def test_verify_rerun_byte_identical(capsys, tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    for p in (p1, p2):
        code, _, _ = run_cli(
            ["verify", "--check", "weights", "--check", "tmax",
             "--seed", "42", "--output", str(p)], capsys)
        assert code == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_verify_unknown_check(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--check", "zeta"])
    assert exc.value.code == 2
    capsys.readouterr()


# -- output plumbing -----------------------------------------------------------------------


def test_output_file_and_stdout_agree(tmp_path, capsys):
    args = ["grid", "dump", "--d", "1", "--lmax", "1"]
    code, out, _ = run_cli(args, capsys)
    assert code == 0
    out_path = tmp_path / "dump.txt"
    code2, out2, _ = run_cli(args + ["--output", str(out_path)], capsys)
    assert code2 == 0 and out2 == ""
    # the provenance header embeds the config (including the output path),
    # so compare the data lines only
    strip = lambda text: [l for l in text.splitlines() if not l.startswith("#")]
    assert strip(out_path.read_text()) == strip(out)


def test_json_envelope_embeds_config(capsys):
    code, out, _ = run_cli(
        ["kernel", "eval", "--x", "0.1", "--y", "0.2", "--t", "1.0",
         "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["command"] == "kernel"
    assert payload["config"]["x"] == [0.1]


def test_csv_header_embeds_config(capsys):
    code, out, _ = run_cli(["grid", "dump", "--d", "1", "--lmax", "1"], capsys)
    header = [l for l in out.splitlines() if l.startswith("# config:")]
    assert len(header) == 1
    embedded = json.loads(header[0].split("# config:", 1)[1])
    assert embedded["max_layer"] == 1


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "oscmax.cli", "kernel", "tmax",
         "--x", "0.5", "--y", "1e6", "--format", "json"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["t_max"] == pytest.approx(
        6.18034e5, rel=1e-5)
