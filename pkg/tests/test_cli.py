import json
import os
import subprocess
import sys

CLI = [sys.executable, "-m", "bttwist.cli"]


def run_cli(*args, env_extra=None, check=True):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run(CLI + list(args), capture_output=True, text=True,
                          env=env)
    if check:
        assert proc.returncode == 0, proc.stderr
    return proc


def test_field_command():
    out = json.loads(run_cli("field", "-p", "2", "--sqrts", "-1,-3,2").stdout)
    assert out["e"] == 4 and out["f"] == 2 and out["degree"] == 8
    assert len(out["subfields"]) == 15
    assert out["sample_defects"]["-3"] == "2/1"
    assert out["uniformizer_valuation"] == "1/4"


def test_field_base():
    out = json.loads(run_cli("field", "-p", "5").stdout)
    assert out["e"] == 1 and out["f"] == 1


def test_count_local_q8_full_tower():
    out = json.loads(run_cli("count-local", "--group", "q8",
                             "--field", "2:-1,-3,2").stdout)
    assert out["count"] == 26
    assert len(out["vertex_ids"]) == 26


def test_count_local_hurwitz():
    out = json.loads(run_cli("count-local", "--group", "hurwitz",
                             "--field", "2:-3").stdout)
    assert out["count"] == 2


def test_count_local_maxorder():
    out = json.loads(run_cli("count-local", "--group", "maxorder",
                             "--field", "2:-3,2").stdout)
    assert out["count"] == 3


def test_branch_command_with_dot(tmp_path):
    dot_file = tmp_path / "branch.dot"
    out = json.loads(run_cli(
        "branch", "--field", "2:", "--matrix", "0,1;0,0",
        "--radius", "2", "--dot", str(dot_file)).stdout)
    assert out["shape"].startswith("Horoball")
    text = dot_file.read_text()
    assert text.count("{") == text.count("}") == 1
    node_ids = [ln.split()[0] for ln in text.splitlines()
                if "[label" in ln]
    assert len(node_ids) == len(set(node_ids))


def test_branch_needs_extension_exit_code():
    proc = run_cli("branch", "--field", "2:", "--matrix", "0,1;17,0",
                   check=False)
    assert proc.returncode == 1
    err = json.loads(proc.stderr)
    assert err["error"] == "NeedsExtension"


def test_global_command():
    out = json.loads(run_cli("global", "-N", "3").stdout)
    assert out["count"] == 2 and out["case"] == "a"
    out5 = json.loads(run_cli("global", "-N", "5", "--resolve").stdout)
    assert out5["count"] == 6 and out5["case_c_pair"] == [2, 6]
    proc = run_cli("global", "-N", "35", check=False)
    assert proc.returncode == 1
    assert json.loads(proc.stderr)["error"] == "ExistenceFails"
    proc = run_cli("global", "-N", "5", check=False)
    assert proc.returncode == 1
    assert json.loads(proc.stderr)["error"] == "ExistenceUnknown"


def test_byte_identical_reruns():
    a = run_cli("count-local", "--group", "q8", "--field", "2:-3").stdout
    b = run_cli("count-local", "--group", "q8", "--field", "2:-3").stdout
    assert a == b
    c = run_cli("field", "-p", "2", "--sqrts", "-1,2").stdout
    d = run_cli("field", "-p", "2", "--sqrts", "-1,2").stdout
    assert c == d


def test_usage_errors_exit_two():
    proc = run_cli("count-local", "--group", "nope", "--field", "2:",
                   check=False)
    assert proc.returncode == 2
    proc = run_cli("frobnicate", check=False)
    assert proc.returncode == 2


def test_vertex_cap_env():
    proc = run_cli("count-local", "--group", "q8", "--field", "2:-3",
                   env_extra={"BTTWIST_VERTEX_CAP": "2"}, check=False)
    assert proc.returncode == 1
    assert json.loads(proc.stderr)["error"] == "WindowInsufficient"


def test_computation_error_is_machine_readable():
    proc = run_cli("field", "-p", "2", "--sqrts", "17", check=False)
    assert proc.returncode == 1
    err = json.loads(proc.stderr)
    assert err["error"] == "SplitPrime"
