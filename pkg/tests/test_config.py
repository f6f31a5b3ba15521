import pytest

from lrsdcs.config import ConfigFileError, RunConfig, load_config, parse_config_text
from lrsdcs.solver import ConfigError


def test_parse_and_apply(tmp_path):
    text = """
    # run settings
    mode = color
    rate = 0.04   # 1/25
    seed = 17
    mu3 = 2e-3
    beta = 0.5
    tol-change = 1e-5
    delta = auto
    """
    p = tmp_path / "run.cfg"
    p.write_text(text)
    cfg = RunConfig().updated(load_config(p))
    assert cfg.mode == "color" and cfg.measurement_rate == 0.04 and cfg.seed == 17
    assert cfg.solver.mu3 == 2e-3 and cfg.solver.betas == (0.5,) * 4
    assert cfg.solver.tol_rel_change == 1e-5 and cfg.delta is None


def test_later_overrides_win():
    values = parse_config_text("gamma = 1.0\nmax_iter = 50")
    values.update(gamma=1.5)
    cfg = RunConfig().updated(values)
    assert cfg.solver.gamma == 1.5 and cfg.solver.max_iter == 50


@pytest.mark.parametrize("text", ["bogus = 1", "rate 0.2", "seed = abc"])
def test_bad_files(text):
    with pytest.raises(ConfigFileError, match="<config>:1"):
        parse_config_text(text)


@pytest.mark.parametrize("values,err", [
    ({"rate": 1.0}, ValueError), ({"rate": 0.0}, ValueError), ({"mode": "rgb"}, ValueError),
    ({"window": 4}, ValueError), ({"delta": -1.0}, ValueError),
    ({"gamma": 1.62}, ConfigError), ({"beta": 0.0}, ConfigError), ({"beta2": -1.0}, ConfigError),
])
def test_validation(values, err):
    with pytest.raises(err):
        RunConfig().updated(values)
