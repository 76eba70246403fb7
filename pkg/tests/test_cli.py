import json

import jsonschema
import pytest

from affine_rmatrix.cli import (ConfigError, RunConfig, main, parse_config_text, report_schema,
                                report_schema_version, run)

BASE = """\
# test config
N = {N}
lambda_exponents = 1, 2, 0
mu_exponents = 2, 1, 0
nu_exponents = 0, 1, 1
ell_list = {ells}
commands = {commands}
"""


@pytest.fixture(autouse=True)
def cache(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("AFFINE_RMATRIX_CACHE", str(d))
    return d


def _write(tmp_path, name="run.cfg", N=3, ells="1, 3", commands="build", extra=""):
    p = tmp_path / name
    p.write_text(BASE.format(N=N, ells=ells, commands=commands) + extra)
    return p


def _strip(x):
    if isinstance(x, dict):
        return {k: _strip(v) for k, v in x.items() if k not in ("elapsed", "timing")}
    if isinstance(x, list):
        return [_strip(v) for v in x]
    return x


def _load(path):
    return json.loads(path.read_text())


def test_schema_version():
    assert report_schema_version() == "1.0.0"
    assert report_schema()["properties"]["schema_version"]["const"] == report_schema_version()


def test_build_dimensions(tmp_path):
    out = tmp_path / "out"
    assert main(["--config", str(_write(tmp_path)), "--out", str(out)]) == 0
    rep = _load(out / "build.json")
    assert rep["ok"] and rep["command"] == "build"
    dims = rep["result"]["modules"][0]["dimensions"]
    assert dims == {"0": 1, "1": 2, "2": 4, "3": 8}
    assert all(d["dimension"] == d["kostant"] for d in rep["result"]["modules"][0]["degrees"])


def test_ybe_height_zero(tmp_path):
    out = tmp_path / "out"
    assert main(["--config", str(_write(tmp_path, N=0, commands="verify-ybe")), "--out", str(out)]) == 0
    rep = _load(out / "verify-ybe.json")
    assert rep["ok"] and rep["result"]["valid_bidegrees"] == [[0, 0]]


def test_even_order_exits_two(tmp_path, capsys):
    cfg = _write(tmp_path, ells="2", commands="specialize")
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "inadmissible" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("extra,msg", [
    ("colour = blue\n", "unknown key"),
    ("N = 4\n", "duplicate"),
    ("variant = E_F\n", "variant"),
    ("order = sideways\n", "order"),
    ("asymptotic_cases = 0.3\n", "z:ell"),
    ("just some words\n", "key = value"),
])
def test_config_errors(tmp_path, capsys, extra, msg):
    cfg = _write(tmp_path, extra=extra)
    assert main(["--config", str(cfg)]) == 2
    assert msg in capsys.readouterr().err


def test_missing_required_key():
    with pytest.raises(ConfigError, match="missing"):
        parse_config_text("lambda_exponents = 1, 2, 0\n")
    with pytest.raises(ConfigError):
        RunConfig(N=-1, lambda_exponents=[0, 0, 0])
    with pytest.raises(ConfigError):
        RunConfig(N=2, lambda_exponents=[0, 0])


def test_missing_config_file(tmp_path):
    assert main(["--config", str(tmp_path / "nope.cfg")]) == 2


def test_command_flag_overrides(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, N=2, commands="build, poisson")
    assert main(["--config", str(cfg), "--out", str(out), "--command", "verify-intertwine",
                 "--command", "rmatrix"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["rmatrix.json", "verify-intertwine.json"]


ALL = "build, rmatrix, verify-intertwine, verify-ybe, specialize, centrality, poisson, asymptotics"


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    import os
    tmp = tmp_path_factory.mktemp("full")
    os.environ["AFFINE_RMATRIX_CACHE"] = str(tmp / "cache")
    try:
        cfg = tmp / "full.cfg"
        cfg.write_text(BASE.format(N=3, ells="1, 3", commands=ALL) + "asymptotic_rhs = corrected\n")
        outs = []
        for k, jobs in enumerate(["1", "1", "2"]):
            out = tmp / f"out{k}"
            status = main(["--config", str(cfg), "--out", str(out), "--jobs", jobs])
            outs.append((status, out))
        return tmp, outs
    finally:
        del os.environ["AFFINE_RMATRIX_CACHE"]


def test_full_pipeline_passes(full_run):
    _, outs = full_run
    assert [s for s, _ in outs] == [0, 0, 0]
    names = sorted(p.name for p in outs[0][1].iterdir())
    assert names == sorted(f"{c.strip()}.json" for c in ALL.split(","))


def test_reports_validate_against_schema(full_run):
    schema = report_schema()
    for _, out in full_run[1]:
        for p in out.iterdir():
            jsonschema.validate(_load(p), schema)


def test_deterministic_reports(full_run):
    outs = [o for _, o in full_run[1]]
    for p in outs[0].iterdir():
        ref = json.dumps(_strip(_load(p)), sort_keys=True)
        for other in outs[1:]:
            assert json.dumps(_strip(_load(other / p.name)), sort_keys=True) == ref, p.name


def test_cache_written(full_run):
    tmp, _ = full_run
    files = list((tmp / "cache").glob("*.pkl"))
    assert any(f.name.startswith("rmatrix-") for f in files)
    assert any(f.name.startswith("setup-") for f in files)


def test_corrupt_cache_is_rebuilt(tmp_path, cache):
    cfg = _write(tmp_path, N=2, commands="rmatrix")
    assert main(["--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    for f in cache.glob("*.pkl"):
        f.write_bytes(b"not a pickle")
    assert main(["--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert _strip(_load(tmp_path / "a" / "rmatrix.json")) == _strip(_load(tmp_path / "b" / "rmatrix.json"))


def test_failed_verification_exits_one(tmp_path):
    # the leading-order expression as stated leaves a constant factor, so the fit fails
    out = tmp_path / "out"
    cfg = _write(tmp_path, commands="asymptotics", extra="asymptotic_rhs = stated\n")
    assert main(["--config", str(cfg), "--out", str(out)]) == 1
    rep = _load(out / "asymptotics.json")
    assert not rep["ok"]
    jsonschema.validate(rep, report_schema())


def test_run_api(tmp_path):
    cfg = RunConfig(N=2, lambda_exponents=[1, 2, 0], commands=["build"], output=str(tmp_path / "o"))
    status, reps = run(cfg)
    assert status == 0 and reps["build"]["ok"]
