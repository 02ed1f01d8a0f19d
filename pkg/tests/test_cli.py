import json
import os
import subprocess
import sys

import pytest

from gammadelta.cli import main
from golden_cases import CASES, GOLDEN, run


def cli(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_json(name):
    code, out = run(CASES[name])
    assert code == 0
    assert out == (GOLDEN / f"{name}.json").read_text()
    assert json.loads(out)["schema"] == "gammadelta/1"


def test_delta_expand_text(capsys):
    code, out, _ = cli(capsys, "compute", "delta-expand", "--expr", "d(x+y)", "--p", "2")
    assert code == 0 and out == "d(x) + d(y) - x*y\n"


def test_prism_pn_json(capsys):
    code, out, _ = cli(capsys, "compute", "prism-pn", "--n", "1", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["a_n"] == 1 and data["pass"]
    assert data["P_n"] == {"terms": [{"c": "1", "m": {"d(d)": 1, "z": 2}}]}


def test_derham_h(capsys):
    code, out, _ = cli(capsys, "compute", "derham-h", "--ring", "F2[x]", "--weight", "2", "--format", "json")
    data = json.loads(out)
    assert code == 0 and (data["H0"], data["H1"]) == (1, 1)


def test_ring_sets_prime_when_p_is_omitted(capsys):
    code, out, _ = cli(capsys, "compute", "derham-h", "--ring", "F3[x]", "--weight", "3")
    assert code == 0 and out == "H0 = 1\nH1 = 1\n"


@pytest.mark.parametrize(
    "args,msg",
    [
        (("verify", "pd", "--p", "4"), "4 is not prime"),
        (("verify", "pd", "--weight-bound", "0"), "--weight-bound"),
        (("verify", "pd", "--depth-bound", "0"), "--depth-bound"),
        (("compute", "delta-expand", "--expr", "d(x+"), "position 4"),
        (("compute", "delta-expand"), "needs --expr"),
        (("compute", "delta-expand", "--expr", "g_2(x)"), "not available"),
        (("compute", "derham-h", "--ring", "F3[x]", "--p", "2"), "does not match"),
        (("compute", "derham-h", "--ring", "R[x]"), "cannot parse ring"),
        (("compute", "pd-env", "--expr", "w"), "not in the ring"),
    ],
)
def test_usage_errors_exit_2(capsys, args, msg):
    code, _, err = cli(capsys, *args)
    assert code == 2
    assert msg in err


def test_argparse_errors_exit_2(capsys):
    assert main(["verify", "nonsense"]) == 2
    assert main(["compute", "pd-env", "--format", "xml"]) == 2
    assert main([]) == 2


def test_truncation_is_a_failure_with_structured_message(capsys):
    code, out, err = cli(capsys, "compute", "pd-env", "--expr", "g_7(y)", "--weight-bound", "5", "--format", "json")
    assert code == 1
    info = json.loads(out)["error"]
    assert info["type"] == "TruncationOverflow"
    assert (info["needed"], info["bound"], info["flag"]) == (7, 5, "--weight-bound")
    assert "raise --weight-bound to at least 7" in err


def test_depth_exceeded_names_the_flag(capsys):
    code, _, err = cli(capsys, "compute", "delta-expand", "--expr", "d^3(x)", "--depth-bound", "2")
    assert code == 1 and "raise --depth-bound to at least 3" in err


def test_non_p_local_division_fails(capsys):
    code, _, err = cli(capsys, "compute", "delta-expand", "--expr", "x/2", "--p", "2")
    assert code == 1 and "not a unit in Z_(2)" in err


def test_verify_text_carries_lemma_keys(capsys):
    code, out, _ = cli(capsys, "verify", "prism")
    assert code == 0
    assert "PASS expand-delta-n/leading-coefficient" in out
    assert "INFO phi-d-p-local/literal-congruence [n=2]" in out
    assert out.rstrip().endswith("0 failed")


def test_seed_changes_random_sections_only(capsys):
    _, a, _ = cli(capsys, "verify", "pd", "--format", "json")
    _, b, _ = cli(capsys, "verify", "pd", "--format", "json", "--seed", "7")
    da, db = json.loads(a), json.loads(b)
    assert db["config"]["seed"] == 7
    assert [c["key"] for c in da["checks"]] == [c["key"] for c in db["checks"]]


def test_threads_do_not_change_output(capsys, monkeypatch):
    _, serial, _ = cli(capsys, "verify", "all", "--format", "json")
    monkeypatch.setenv("GAMMADELTA_THREADS", "4")
    _, threaded, _ = cli(capsys, "verify", "all", "--format", "json")
    assert serial == threaded
    monkeypatch.setenv("GAMMADELTA_THREADS", "0")
    assert cli(capsys, "verify", "pd")[0] == 2


def test_console_entry_point_is_deterministic():
    cmd = [sys.executable, "-m", "gammadelta", "compute", "ht-matrix", "--i", "3", "--p", "3", "--format", "json"]
    env = dict(os.environ, PYTHONHASHSEED="random")
    a = subprocess.run(cmd, capture_output=True, text=True, env=env)
    b = subprocess.run(cmd, capture_output=True, text=True, env=env)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
