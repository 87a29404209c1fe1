import json

import pytest
from click.testing import CliRunner

from nbzk.harness import instances
from nbzk.harness.cli import main


@pytest.fixture
def cli():
    runner = CliRunner()

    def invoke(*args, ok=True):
        res = runner.invoke(main, [str(a) for a in args])
        if ok:
            assert res.exit_code == 0, res.output
        return res
    return invoke


def js(res):
    return json.loads(res.output.strip().splitlines()[-1])


def test_fixtures_listed(cli):
    out = cli("fixtures").output
    for name in ("honest", "c-bottom", "witnessless", "honest-a", "commit-one-b"):
        assert name in out


def test_run_zk_byte_identical(cli, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    r = js(cli("run-zk", "--n", 3, "--seed", 4, "--out", a))
    cli("run-zk", "--n", 3, "--seed", 4, "--transport", "tcp", "--out", b)
    assert r["accept_rate"] == 1.0 and r["statuses"] == {"accept": 3}
    assert a.read_bytes() == b.read_bytes()
    cmp = js(cli("compare", a, b))
    assert cmp["tv"] == 0 and cmp["within_bound"]


def test_errors_are_reported(cli, tmp_path):
    res = cli("run-zk", "--fixture", "nope", ok=False)
    assert res.exit_code != 0 and "unknown V fixture" in res.output
    res = cli("run-zk", "--instance", "k4", ok=False)
    assert res.exit_code != 0 and "no witness" in res.output
    res = cli("run-zk", "--instance", tmp_path / "missing.json", ok=False)
    assert res.exit_code != 0 and "cannot read instance" in res.output
    res = cli("simulate-coinflip", "--target", "101", ok=False)
    assert res.exit_code != 0 and "--target" in res.output
    res = cli("simulate-coinflip", "--a", "honest-a-native", ok=False)
    assert res.exit_code != 0


def test_instance_file_and_witnessless(cli, tmp_path):
    path = tmp_path / "g.json"
    instances.dump_instance(instances.random_colorable(8, 1), str(path))
    assert js(cli("run-zk", "--instance", path, "--n", 2))["accept_rate"] == 1.0
    r = js(cli("run-zk", "--instance", "k4", "--prover", "witnessless", "--n", 5))
    assert r["accept_rate"] < 1.0


def test_simulate_zk(cli, tmp_path):
    out = tmp_path / "s.jsonl"
    r = js(cli("simulate-zk", "--fixture", "abort-3b", "--n", 4, "--abort-target", 4, "--out", out))
    assert r["kinds"] == {"abort": 4} and r["real_abort_rate"] == 1.0 and r["tv"] == 0
    assert out.read_text().count('"type": "header"') == 4


def test_coinflip_commands(cli):
    r = js(cli("run-coinflip", "--n", 4, "--k", 4))
    assert r["bottom"] == 0 and r["statuses"] == {"accept": 4}
    r = js(cli("simulate-coinflip", "--target", "10110010", "--n", 3))
    assert r["forced"] == r["non_bottom"] == 3 and r["failed"] == 0


def test_estimate_abort(cli):
    r = js(cli("estimate-abort", "--fixture", "abort-3b", "--n", 8, "--runs", 2))
    assert r["abort_target"] == 8 and [x["a_prime"] for x in r["runs"]] == [1.0, 1.0]
    assert cli("estimate-abort", "--n", "many", ok=False).exit_code != 0


def test_selftest(cli):
    out = cli("selftest", "--n", 3).output
    assert out.count("PASS") == 7 and "FAIL" not in out


def test_report_renders_figures(cli, tmp_path):
    d = tmp_path / "rep"
    res = cli("report", "--out", d, "--n", 10, "--estimator-runs", 1, "--k", 3)
    for name in ("agreement.png", "estimates.png", "coinflip.png"):
        p = d / name
        assert p.exists() and p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    rep = json.loads((d / "report.json").read_text())
    assert len(rep["rows"]) == 8 and sum(rep["coinflip_counts"]) == 40
    assert "coin-flip uniformity" in res.output
    assert cli("report", "--out", d, "--k", 3, "--coinflip-n", 5, ok=False).exit_code != 0
