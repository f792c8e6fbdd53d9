import json
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

from boussinesq_lab.cli import main
from boussinesq_lab.experiments import EXPERIMENTS, make_config, run_experiment
from boussinesq_lab.reporting import (Check, ConfigError, ExperimentResult, ReportError, Table, emit_report,
                                      parse_config_text, stream_rng, worker_pool)


def read_all(d):
    return {f: open(os.path.join(d, f), "rb").read() for f in sorted(os.listdir(d))}


def test_parse_config_text():
    raw = parse_config_text("# header\nv1 = 1/64  # packet scale\n\nK=3\n")
    assert raw == {"v1": "1/64", "K": "3"}
    with pytest.raises(ConfigError):
        parse_config_text("just words")


def test_config_validation_names_the_field():
    with pytest.raises(ConfigError) as exc:
        make_config("radial-sharpness", {"q": "1.5"})
    assert exc.value.field == "q"
    with pytest.raises(ConfigError) as exc:
        make_config("vdc", {"bogus": "1"})
    assert exc.value.field == "bogus"
    with pytest.raises(ConfigError) as exc:
        make_config("vdc", {"n": "many"})
    assert exc.value.field == "n"
    with pytest.raises(ConfigError) as exc:
        make_config("vdc", {}, seed=-1)
    assert exc.value.field == "seed"
    with pytest.raises(ConfigError):
        make_config("vdc", {}, precision="quad")
    with pytest.raises(ConfigError):
        make_config("nope", {})


def test_fraction_values_and_overrides():
    cfg = make_config("counterexample", {"v1": "1/128", "seed": "5"}, seed=7)
    assert cfg.params["v1"] == 1 / 128 and cfg.seed == 7
    assert make_config("counterexample", {"seed": "5"}).seed == 5


def test_digest_ignores_threads_and_output():
    a = make_config("vdc", {"n": "5"}, out_dir="a", threads=1)
    b = make_config("vdc", {"n": "5"}, out_dir="b", threads=8)
    c = make_config("vdc", {"n": "6"})
    assert a.digest == b.digest != c.digest
    assert a.stem == f"vdc-{a.digest}"


@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 50))
def test_streams_are_reproducible(seed, stream):
    a = stream_rng(seed, stream).standard_normal(4)
    b = stream_rng(seed, stream).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, stream_rng(seed, stream + 1).standard_normal(4))


def test_worker_pool_preserves_order():
    for k in (1, 4):
        with worker_pool(k) as m:
            assert list(m(lambda i: i * i, range(20))) == [i * i for i in range(20)]


def test_table_csv_round_trips_floats():
    t = Table(("a", "b", "c"), [(0.1, 3, True), (1 / 3, -2, False)])
    lines = t.to_csv().splitlines()
    assert lines == ["a,b,c", "0.10000000000000001,3,true", "0.33333333333333331,-2,false"]
    assert float(lines[2].split(",")[0]) == 1 / 3


def test_empty_result_is_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_report(ExperimentResult(make_config("vdc", {})), str(tmp_path))


def test_report_files_and_manifest(tmp_path):
    cfg = make_config("vdc", {"n": "5"}, out_dir=str(tmp_path))
    res = ExperimentResult(cfg, {"main": Table(("x",), [(1.0,)]), "extra": Table(("y",), [(2,)])},
                           [Check("ok", True, "fine"), Check("bad", False)], {"value": np.float64(np.inf)})
    paths = emit_report(res)
    names = sorted(os.path.basename(p) for p in paths)
    stem = cfg.stem
    assert names == [f"{stem}-extra.csv", f"{stem}.csv", f"{stem}.json", f"{stem}.txt"]
    man = json.loads((tmp_path / f"{stem}.json").read_text())
    assert man["config_hash"] == cfg.digest and man["passed"] is False
    assert man["results"]["value"] == "inf"
    assert {"numpy", "scipy", "mpmath"} <= set(man["versions"])
    txt = (tmp_path / f"{stem}.txt").read_text().splitlines()
    assert txt[1:] == ["PASS ok: fine", "FAIL bad", "overall FAIL"]


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = make_config("vdc", {}, out_dir=str(blocker / "sub"))
    res = ExperimentResult(cfg, {}, [Check("ok", True)])
    with pytest.raises(ReportError):
        emit_report(res)


def test_every_experiment_has_a_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert all(name in out for name in EXPERIMENTS)
    assert len(EXPERIMENTS) == 8


def test_cli_pass_and_files(tmp_path, capsys):
    code = main(["vdc", "--set", "n=10", "--out", str(tmp_path), "--seed", "3"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1] == "overall PASS"
    assert len(os.listdir(tmp_path)) == 3


def test_cli_config_file(tmp_path, capsys):
    conf = tmp_path / "vdc.conf"
    conf.write_text("n = 10\nseed = 3\n")
    assert main(["vdc", "--config", str(conf), "--out", str(tmp_path / "a")]) == 0
    assert main(["vdc", "--set", "n=10", "--seed", "3", "--out", str(tmp_path / "b")]) == 0
    assert read_all(tmp_path / "a") == read_all(tmp_path / "b")


def test_cli_failed_check_exits_one(tmp_path, capsys):
    assert main(["vdc", "--set", "n=5", "--set", "closed_tol=1e-30", "--out", str(tmp_path)]) == 1
    assert "overall FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("args,needle", [
    (["radial-sharpness", "--set", "q=1.5"], "q: must be >= 2.0"),
    (["radial-sharpness", "--set", "q=5"], "q: must lie in"),
    (["vdc", "--set", "colour=red"], "colour"),
    (["vdc", "--set", "n"], "set"),
    (["vdc", "--config", "/nonexistent/file"], "config"),
    (["kernel-decay", "--set", "s=0.3"], "s: no default slope window"),
])
def test_cli_config_errors_exit_two(tmp_path, capsys, args, needle):
    assert main(args + ["--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("configuration error") and needle in err
    assert not os.listdir(tmp_path)


def test_cli_precision_error_exits_two(tmp_path, capsys):
    assert main(["counterexample", "--precision", "double", "--out", str(tmp_path)]) == 2
    assert "budget error" in capsys.readouterr().err


def test_cli_report_error_exits_two(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["vdc", "--set", "n=3", "--out", str(blocker)]) == 2
    assert "report error" in capsys.readouterr().err


def test_cli_bad_seed_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["vdc", "--seed", "-4"])
    assert exc.value.code == 2


def test_distinct_configs_do_not_collide(tmp_path, capsys):
    for n in (4, 5):
        assert main(["vdc", "--set", f"n={n}", "--out", str(tmp_path)]) == 0
    assert len(os.listdir(tmp_path)) == 6


def test_seed_changes_results(tmp_path):
    a = run_experiment(make_config("vdc", {"n": "5"}, seed=1))
    b = run_experiment(make_config("vdc", {"n": "5"}, seed=2))
    assert a.tables["ratios"].rows != b.tables["ratios"].rows
