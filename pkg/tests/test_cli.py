import csv

import pytest

from fedmech.cli import RESULT_COLUMNS, load_manifest, main

MANIFEST = """\
[manifest]
mechanisms = realfm, linear, local
seeds = 0, 1, 2

[cifar10]
n_devices = {n}
payoff_mode = power_nonuniform
cost_mode = gaussian
"""


@pytest.fixture
def manifest(tmp_path):
    def make(text=MANIFEST.format(n=1), name="m.ini"):
        p = tmp_path / name
        p.write_text(text)
        return p
    return make


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_counting_contract(manifest, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(manifest()), "--out", str(out)]) == 0
    rows = _rows(out / "results.csv")
    assert len(rows) == 9
    assert list(rows[0]) == list(RESULT_COLUMNS)
    assert len(_rows(out / "summary.csv")) == 3
    meta = (out / "meta.txt").read_text()
    assert "config_sha256" in meta and "wall_clock_s" in meta and "fedmech" in meta


def test_rows_per_device(manifest, tmp_path):
    out = tmp_path / "out"
    main(["run", str(manifest(MANIFEST.format(n=4))), "--out", str(out), "--seeds", "3"])
    rows = _rows(out / "results.csv")
    assert len(rows) == 3 * 4
    assert {r["seed"] for r in rows} == {"3"}


def test_floats_round_trip(manifest, tmp_path):
    out = tmp_path / "out"
    main(["run", str(manifest()), "--out", str(out)])
    for r in _rows(out / "results.csv"):
        for col in ("cost", "m_eq", "server_utility"):
            assert format(float(r[col]), ".17g") == r[col]


def test_rerun_byte_identical(manifest, tmp_path):
    m = manifest(MANIFEST.format(n=3))
    main(["run", str(m), "--out", str(tmp_path / "a")])
    main(["run", str(m), "--out", str(tmp_path / "b"), "--jobs", "2"])
    for name in ("results.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_mechanisms_writes_nothing(manifest, tmp_path):
    text = MANIFEST.format(n=1).replace("realfm, linear, local", "")
    out = tmp_path / "out"
    assert main(["run", str(manifest(text)), "--out", str(out)]) != 0
    assert not out.exists()


def test_failed_run_recorded(manifest, tmp_path, capsys):
    # a wide a_opt spread breaks server dominance for some seeds; the batch carries on
    text = MANIFEST.format(n=2) + "\n[broken]\nn_devices = 2\nheterogeneity = aopt_spread\naopt_delta = 0.949\n"
    out = tmp_path / "out"
    assert main(["run", str(manifest(text)), "--out", str(out), "--seeds", "0,1,2,3"]) != 0
    rows = _rows(out / "results.csv")
    failed = [r for r in rows if r["device_id"] == ""]
    assert failed and all(r["scenario_id"] == "broken" for r in failed)
    assert all(r["converged"] == "false" and r["error"] == "AssumptionViolation" for r in failed)
    assert any(r["scenario_id"] == "cifar10" and r["converged"] == "true" for r in rows)


def test_manifest_seeds_and_files(tmp_path):
    (tmp_path / "extra.ini").write_text("[mnist]\nbase_cost = 4e-5\na_opt = 0.9975\nk = 0.25\n"
                                        "accuracy_form = simplified\n")
    p = tmp_path / "m.ini"
    p.write_text("[manifest]\nscenarios = extra.ini\nrepetitions = 2\nmechanisms = realfm\n")
    m = load_manifest(p)
    assert m.seeds == [0, 1] and m.repetitions == 2
    assert [s.scenario_id for s in m.scenarios] == ["mnist"]


@pytest.mark.parametrize("body, key", [("seeds = 1, 1", "seeds"), ("repetitions = 0", "repetitions"),
                                       ("mechanisms = realfm, magic", "mechanisms"),
                                       ("colour = red", "colour")])
def test_manifest_validation(tmp_path, body, key, capsys):
    p = tmp_path / "m.ini"
    p.write_text(f"[manifest]\n{body}\n[s]\nn_devices = 1\n")
    assert main(["check", str(p)]) != 0
    assert key in capsys.readouterr().err


def test_check_cifar_prints_equal_optima(manifest, capsys):
    assert main(["check", str(manifest("[cifar10]\nn_devices = 16\n"))]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if "m_local_opt=" in l]
    assert len(lines) == 16
    vals = {l.split("m_local_opt=")[1].split()[0] for l in lines}
    assert len(vals) == 1 and 198478 <= float(vals.pop()) <= 198479


def test_check_prohibitive_cost(manifest, capsys):
    assert main(["check", str(manifest("[p]\nn_devices = 2\nbase_cost = 10\n"))]) == 0
    out = capsys.readouterr().out
    assert out.count("m_local_opt=0 ") == 2 and "does not participate" in out


def test_check_malformed_key(manifest, capsys):
    assert main(["check", str(manifest("[p]\nbase_cots = 1\n"))]) != 0
    err = capsys.readouterr().err
    assert "base_cots" in err and "line 2" in err
