import json

import pytest

from macfb import cli
from macfb.channel import preset
from macfb.encoding import policy_from_csv

FAITHFUL_YAML = """\
label: faithful
channel:
  alphabets: {x1: 2, x2: 2, y: 4}
  kernel: [1, 0, 0, 0,
           0, 1, 0, 0,
           0, 0, 1, 0,
           0, 0, 0, 1]
messages: {m1: 2, m2: 2}
"""


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


def run_json(argv, capsys):
    code, out = run(argv, capsys)
    return code, json.loads(out)


def test_validate_preset(capsys):
    code, doc = run_json(["validate", "--preset", "useless", "--messages", "2,2"], capsys)
    assert code == 0
    assert doc["values"] == {"ok": True, "kernel_min": 0.5, "has_prior": False}
    assert doc["label"] == "useless-2x2"
    assert doc["channel"]["alphabets"] == {"x1": 2, "x2": 2, "y": 2}


def test_validate_config_with_prior(tmp_path, capsys):
    path = tmp_path / "run.yaml"
    path.write_text(
        "channel: {preset: {name: adder}}\n"
        "messages: {m1: 2, m2: 2}\n"
        "prior: [0.4, 0.3, 0.2, 0.1]\n"
    )
    code, doc = run_json(["validate", "--config", str(path)], capsys)
    assert code == 0
    assert doc["values"]["has_prior"] is True
    assert doc["config"]["prior"] == [0.4, 0.3, 0.2, 0.1]


@pytest.mark.parametrize(
    "argv",
    [
        ["validate", "--preset", "warp_drive", "--messages", "2,2"],
        ["validate", "--preset", "adder"],
        ["validate", "--config", "/no/such/file.yaml"],
        ["horizon", "--preset", "adder", "--messages", "2,2", "--lambda", "1,2"],
        ["horizon", "--preset", "adder", "--messages", "2,2", "--n", "0"],
        ["validate", "--preset", "bsc_p2p", "--param", "1.5", "--messages", "2,1"],
        ["region", "--preset", "adder", "--messages", "2,2", "--sweep", "2"],
        ["validate", "--preset", "adder", "--messages", "2,2", "--workers", "0"],
    ],
)
def test_config_errors_exit_one(argv, capsys):
    assert cli.main(argv) == 1


def test_solver_error_exits_two(tmp_path, capsys):
    path = tmp_path / "run.yaml"
    path.write_text(
        "channel: {preset: {name: adder}}\n"
        "messages: {m1: 2, m2: 2}\n"
        "limits: {tree_cap: 1}\n"
    )
    assert cli.main(["oracle-check", "--config", str(path), "--n", "1"]) == 2


def test_horizon_json_and_artifacts(tmp_path, capsys):
    prefix = tmp_path / "run"
    code, out = run(
        [
            "horizon", "--preset", "adder", "--messages", "2,2",
            "--n", "1", "--lambda", "0,0,1",
            "--emit-policy", "--emit-beliefs", "--out", str(prefix),
        ],
        capsys,
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["values"]["total_value"] == pytest.approx(1.5, abs=1e-12)
    assert doc["params"] == {"n": 1, "lambda": [0.0, 0.0, 1.0], "prune": False}
    # the result file holds exactly what was printed
    assert (tmp_path / "run.json").read_text() == out

    tree = policy_from_csv((tmp_path / "run_policy.csv").read_text(), preset("adder").alphabets)
    assert tree.depth == 1

    beliefs = (tmp_path / "run_beliefs.csv").read_text().splitlines()
    assert beliefs[0] == "# t=0 history="
    assert beliefs[1] == "m1,m2,pi"
    assert beliefs[2] == "0,0,0.25"
    assert "i,m,mprime,beta" in beliefs


def test_dsaht_decoder_artifact(tmp_path, capsys):
    path = tmp_path / "faithful.yaml"
    path.write_text(FAITHFUL_YAML)
    prefix = tmp_path / "d"
    code, doc = run_json(
        ["dsaht", "--config", str(path), "--T", "1", "--out", str(prefix), "--emit-policy"],
        capsys,
    )
    assert code == 0
    assert doc["values"]["error_probability"] == 0.0
    decoder = (tmp_path / "d_decoder.csv").read_text()
    assert decoder == "history,m1,m2\n0,0,0\n1,0,1\n2,1,0\n3,1,1\n"
    assert (tmp_path / "d_policy.csv").exists()


def test_stationary_not_converged_exit_three(tmp_path, capsys):
    prefix = tmp_path / "s"
    code, doc = run_json(
        [
            "stationary", "--preset", "bsc_p2p", "--param", "0.1",
            "--messages", "2,1", "--max-iters", "1", "--out", str(prefix),
        ],
        capsys,
    )
    assert code == 3
    assert doc["values"]["converged"] is False
    assert (tmp_path / "s.json").exists()


def test_stationary_renewal_flag(capsys):
    code, doc = run_json(
        [
            "stationary", "--preset", "bsc_p2p", "--param", "0",
            "--messages", "2,1", "--renewal", "none", "--grid", "8",
        ],
        capsys,
    )
    assert code == 0
    assert doc["params"]["renewal"] == "none"
    assert doc["values"]["gain"] == pytest.approx(0.0, abs=1e-9)


def test_region_artifacts(tmp_path, capsys):
    prefix = tmp_path / "r"
    code, doc = run_json(
        [
            "region", "--preset", "useless", "--messages", "2,2",
            "--n", "1", "--sweep", "3", "--out", str(prefix),
        ],
        capsys,
    )
    assert code == 0
    assert doc["values"]["degenerate"] is True
    assert doc["values"]["vertices"] == [[0.0, 0.0]]
    assert (tmp_path / "r_vertices.csv").read_text() == "R1,R2\n0,0\n"
    assert (tmp_path / "r_halfplanes.csv").read_text().splitlines()[0] == (
        "lambda1,lambda2,lambda3,bound"
    )


def test_oracle_check_csv(tmp_path, capsys):
    prefix = tmp_path / "oc"
    code, doc = run_json(
        [
            "oracle-check", "--preset", "multiplier", "--messages", "2,2",
            "--n", "1", "--out", str(prefix), "--label", "mult",
        ],
        capsys,
    )
    assert code == 0
    assert doc["values"]["max_abs_diff"] <= 1e-9
    lines = (tmp_path / "oc_oracle.csv").read_text().splitlines()
    assert lines[0] == "instance,dp_value,oracle_value,abs_diff"
    assert lines[1].startswith("mult:horizon,")
    assert lines[2].startswith("mult:dsaht,")


def test_diagnose_json(capsys):
    code, doc = run_json(
        ["diagnose-reduction", "--preset", "adder", "--messages", "2,2", "--n", "1"],
        capsys,
    )
    assert code == 0
    assert doc["values"]["n_conflicts"] == 0
    assert doc["values"]["root_action_injective"] is True
    assert doc["diagnostics"]["conflicts"] == []


def test_repeat_runs_are_byte_identical(tmp_path, capsys):
    argv = [
        "horizon", "--preset", "adder", "--messages", "2,2",
        "--n", "2", "--label", "pin",
    ]
    first = run(argv + ["--out", str(tmp_path / "a" / "pin")], capsys)
    second = run(argv + ["--out", str(tmp_path / "b" / "pin")], capsys)
    assert first == second
    assert (tmp_path / "a" / "pin.json").read_bytes() == (
        tmp_path / "b" / "pin.json"
    ).read_bytes()


def test_worker_env_does_not_change_output(tmp_path, monkeypatch, capsys):
    argv = ["region", "--preset", "adder", "--messages", "2,2", "--n", "1", "--sweep", "6"]
    _, base = run(argv, capsys)
    monkeypatch.setenv("MACFB_WORKERS", "2")
    _, with_env = run(argv, capsys)
    assert base == with_env
    monkeypatch.setenv("MACFB_WORKERS", "soon")
    assert cli.main(argv) == 1
