from fractions import Fraction

import pytest

from capitalsim.cli import build_parser, config_from_args, main
from capitalsim.config import ConfigError, RunConfig, build_config, load_config, read_config_text

EXAMPLE = """\
[run]
grounding = trapdoor
horizon = 12
seed = 7

[agent]
kind = q
gamma = 9/10
epsilon = 0.2

[check]
t_max = 5
"""


def test_read_config_text():
    values = read_config_text(EXAMPLE)
    assert values == {
        "grounding": "trapdoor",
        "horizon": 12,
        "seed": 7,
        "agent": "q",
        "gamma": Fraction(9, 10),
        "epsilon": Fraction(1, 5),
        "tmax": 5,
    }


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        read_config_text("[run]\nhorizn = 3\n")


def test_bad_value_rejected():
    with pytest.raises(ConfigError, match="horizon"):
        read_config_text("[run]\nhorizon = ten\n")


def test_infinite_horizon_parses_to_none():
    assert read_config_text("[run]\nhorizon = inf\n") == {"horizon": None}


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.ini")


def test_command_line_wins(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(EXAMPLE)
    args = build_parser().parse_args(["run", "--config", str(path), "--seed", "3", "--gamma", "1/2"])
    cfg = config_from_args(args)
    assert (cfg.seed, cfg.gamma, cfg.horizon, cfg.agent) == (3, Fraction(1, 2), 12, "q")


def test_config_file_drives_cli(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(EXAMPLE.replace("kind = q", "kind = random"))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o"), "--no-figures"]) == 0
    assert len((tmp_path / "o" / "ledger.jsonl").read_text().splitlines()) >= 12


def test_gamma_one_needs_finite_horizon():
    cfg = build_config({"grounding": "trapdoor", "seed": 0, "gamma": Fraction(1)}, {"horizon": None})
    with pytest.raises(ConfigError, match="gamma = 1 requires a finite horizon"):
        cfg.validate()


def test_gamma_one_infinite_horizon_exit_2(tmp_path, capsys):
    argv = "run --grounding trapdoor --gamma 1 --horizon inf --seed 0 --out".split() + [str(tmp_path)]
    code = main(argv)
    assert code == 2
    assert "finite horizon" in capsys.readouterr().err


@pytest.mark.parametrize(
    "bad",
    [
        {"gamma": Fraction(3, 2)},
        {"seed": -1},
        {"epsilon": Fraction(2)},
        {"alpha": 0.0},
        {"episodes": 0},
        {"agent": "oracle"},
        {"agent": "rules"},
        {"cent": Fraction(0)},
        {"partitioning": "pairs"},
        {"n_mc": 10},
    ],
)
def test_validation_errors(bad):
    cfg = RunConfig(**{"grounding": "trapdoor", "seed": 0, "horizon": 3, **bad})
    with pytest.raises(ConfigError):
        cfg.validate()


def test_seed_is_mandatory():
    with pytest.raises(ConfigError, match="seed"):
        RunConfig(grounding="trapdoor", horizon=3).validate()
    RunConfig(grounding="trapdoor").validate(need_horizon=False, need_seed=False)
