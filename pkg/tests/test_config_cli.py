import numpy as np
import pytest

from scenewalk import cli, config as cfgmod, scenery
from scenewalk.errors import ConfigError

IID_CONFIG = """
# minimal iid run
model.variant = iid-rademacher
run.n = 1
run.reps = 1
run.seed = 7
"""

CAT_CONFIG = """
model.variant = torus-direct
model.dim = 2
model.map = 2,1,1,1
model.f = 1:1,0
run.n = 256
run.reps = 200
run.seed = 3
analysis.P = 6
analysis.m = 500
analysis.n_grid = 4,8
analysis.gaps = 1,2
analysis.n_max = 6
"""


# -- config parsing ---------------------------------------------------------


def test_parse_round_trip():
    cfg = cfgmod.parse_config(CAT_CONFIG)
    text = cfgmod.serialize_config(cfg)
    assert cfgmod.parse_config(text) == cfg
    assert cfgmod.serialize_config(cfgmod.parse_config(text)) == text


def test_parse_rejects_garbage():
    with pytest.raises(ConfigError):
        cfgmod.parse_config("not a key value line")
    with pytest.raises(ConfigError):
        cfgmod.parse_config("= value")


def test_defaults_and_missing_keys():
    cfg = cfgmod.parse_config(IID_CONFIG)
    assert cfgmod.get_int(cfg, "analysis.P") == 32
    with pytest.raises(ConfigError):
        cfgmod.get(cfg, "model.map")


def test_config_hash_stable_under_reordering():
    a = cfgmod.parse_config("x = 1\ny = 2\n")
    b = cfgmod.parse_config("y = 2\nx = 1\n")
    assert cfgmod.config_hash(a) == cfgmod.config_hash(b)


def test_parse_observable():
    obs = cfgmod.parse_observable("0.5:const; 0.5:1,0")
    assert obs.mean == pytest.approx(0.5)
    assert obs(np.zeros((1, 2)))[0] == pytest.approx(1.0)
    obs2 = cfgmod.parse_observable("1:2,1:0.25")
    assert obs2.modes() == [((2, 1), 1.0, 0.25)]
    with pytest.raises(ConfigError):
        cfgmod.parse_observable("nope")
    with pytest.raises(ConfigError):
        cfgmod.parse_observable("a:1,0")


def test_build_models():
    cfg = cfgmod.parse_config(CAT_CONFIG)
    model = cfgmod.build_model(cfg)
    assert isinstance(model, scenery.TorusDirect)
    cfg2 = cfgmod.parse_config(IID_CONFIG)
    assert isinstance(cfgmod.build_model(cfg2), scenery.IIDScenery)
    multi = cfgmod.parse_config(
        "model.variant = torus-multi\nmodel.map = 2,1,1,1\n"
        "model.thetas = 1,-1\nmodel.f1 = 0.5:const; 0.5:1,0\nmodel.f2 = 0.5:const; -0.5:1,0\n"
    )
    assert isinstance(cfgmod.build_model(multi), scenery.TorusMulti)
    bad = cfgmod.parse_config("model.variant = nope\n")
    with pytest.raises(ConfigError):
        cfgmod.build_model(bad)


def test_parse_grid():
    g = cfgmod.parse_grid("-3:3:7")
    assert np.allclose(g, np.linspace(-3, 3, 7))
    with pytest.raises(ConfigError):
        cfgmod.parse_grid("1:2")


# -- CLI --------------------------------------------------------------------


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_simulate_minimal(tmp_path):
    cfg = _write(tmp_path, "c.cfg", IID_CONFIG)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "simulate.csv").read_text().splitlines()
    assert lines[0].startswith("# config=") and "seed=7" in lines[0]
    assert lines[1] == "replicate,n,Z,z"
    z = float(lines[2].split(",")[-1])
    assert z in (-1.0, 1.0)


def test_cli_reproducible_and_thread_invariant(tmp_path):
    cfg = _write(tmp_path, "c.cfg", CAT_CONFIG)
    outs = []
    for i, threads in enumerate(("1", "8")):
        out = tmp_path / f"o{i}"
        assert cli.main(["simulate", "--config", cfg, "--out", str(out), "--threads", threads]) == 0
        outs.append((out / "simulate.csv").read_bytes())
    assert outs[0] == outs[1]


def test_cli_seed_override(tmp_path):
    cfg = _write(tmp_path, "c.cfg", IID_CONFIG)
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["simulate", "--config", cfg, "--out", str(a)])
    cli.main(["simulate", "--config", cfg, "--out", str(b), "--seed", "12345"])
    ta, tb = (a / "simulate.csv").read_text(), (b / "simulate.csv").read_text()
    assert "seed=12345" in tb
    assert ta != tb


def test_cli_env_output_dir(tmp_path, monkeypatch):
    cfg = _write(tmp_path, "c.cfg", IID_CONFIG)
    monkeypatch.setenv(cli.OUT_ENV_VAR, str(tmp_path / "envout"))
    assert cli.main(["simulate", "--config", cfg]) == 0
    assert (tmp_path / "envout" / "simulate.csv").exists()


def test_cli_limit_and_sigma(tmp_path):
    cfg = _write(
        tmp_path,
        "c.cfg",
        IID_CONFIG + "analysis.m = 500\nrun.reps = 50\nanalysis.P = 4\n",
    )
    out = tmp_path / "o"
    assert cli.main(["limit", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "limit.csv").read_text().splitlines()
    assert lines[1] == "replicate,V,delta"
    assert len(lines) == 52
    assert cli.main(["sigma", "--config", cfg, "--out", str(out)]) == 0
    stext = (out / "sigma.csv").read_text()
    assert "rho(0),1.0," in stext and "sigma2," in stext


def test_cli_compare_file_against_itself(tmp_path):
    cfg0 = _write(tmp_path, "c0.cfg", IID_CONFIG + "run.reps = 40\nanalysis.m = 200\n")
    out = tmp_path / "o"
    cli.main(["limit", "--config", cfg0, "--out", str(out)])
    f = str(out / "limit.csv")
    cfg = _write(
        tmp_path,
        "c.cfg",
        IID_CONFIG + f"compare.file_a = {f}\ncompare.file_b = {f}\nanalysis.t_grid = -2:2:5\n",
    )
    assert cli.main(["compare", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "compare.csv").read_text().splitlines()
    assert lines[2].startswith("ks_D,0.0,")


def test_cli_compare_degenerate_variance(tmp_path):
    cfg = _write(
        tmp_path,
        "c.cfg",
        "model.variant = torus-direct\nmodel.map = 2,1,1,1\nmodel.f = 0:const\n"
        "run.n = 64\nrun.reps = 50\nanalysis.P = 4\nanalysis.m = 100\n",
    )
    assert cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_cli_check_and_decay(tmp_path):
    cfg = _write(tmp_path, "c.cfg", CAT_CONFIG)
    out = tmp_path / "o"
    assert cli.main(["check", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "moment.csv").exists()
    assert (out / "charcov.csv").exists()
    assert (out / "decay.csv").exists()
    assert cli.main(["decay", "--config", cfg, "--out", str(out)]) == 0


def test_cli_exit_codes(tmp_path):
    missing = str(tmp_path / "nope.cfg")
    assert cli.main(["simulate", "--config", missing]) == 2
    bad = _write(tmp_path, "bad.cfg", "model.variant = iid-rademacher\n")  # no run.n
    assert cli.main(["simulate", "--config", bad, "--out", str(tmp_path / "o")]) == 2
    invalid = _write(
        tmp_path,
        "inv.cfg",
        "model.variant = torus-direct\nmodel.map = 1,0,0,1\nmodel.f = 1:1,0\nrun.n = 4\n",
    )
    assert cli.main(["simulate", "--config", invalid, "--out", str(tmp_path / "o")]) == 3
    budget = _write(tmp_path, "bud.cfg", IID_CONFIG + "analysis.n_grid = 8,64\nrun.reps = 10\n")
    assert cli.main(["check", "--config", budget, "--out", str(tmp_path / "o")]) == 4


def test_cli_svg(tmp_path):
    cfg = _write(tmp_path, "c.cfg", IID_CONFIG + "run.reps = 10\nrun.n = 16\n")
    out = tmp_path / "o"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out), "--svg"]) == 0
    assert (out / "simulate.svg").exists()
