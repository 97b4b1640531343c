import math
from pathlib import Path

import numpy as np
import pytest

from app.exceptions import ConfigError
from app.models.config import PAPER_SCALE, SystemConfig, load_config_file, parse_config_text
from app.services.topology import place_network


def test_defaults_derive_training_length_and_powers():
    config = SystemConfig()
    assert config.tau_t == config.K_d == 3
    assert config.rho == pytest.approx(10**13.8, rel=1e-12)
    assert config.rho_t == pytest.approx(0.25 * 10**13.8, rel=1e-12)
    assert config.training_overhead == pytest.approx(1 - 3 / 200)


def test_config_is_frozen():
    config = SystemConfig()
    with pytest.raises(Exception):
        config.M = 4


def test_short_training_is_rejected():
    with pytest.raises(ConfigError):
        SystemConfig(K_d=4, tau_t=3)


def test_config_error_is_a_value_error():
    with pytest.raises(ValueError):
        SystemConfig(d0_km=0.06, d1_km=0.05)


def test_unknown_field_names_the_field():
    with pytest.raises(ConfigError) as exc_info:
        SystemConfig(bogus=1)
    assert exc_info.value.field == "bogus"


@pytest.mark.parametrize("field,value", [("N", 0), ("M", 0), ("kappa", -1.0), ("epsilon_bisection", 0.0)])
def test_invalid_values(field, value):
    with pytest.raises(ConfigError):
        SystemConfig(**{field: value})


def test_overrides_rederive_dependent_fields():
    config = SystemConfig()
    more_users = config.with_overrides(K_d=5)
    assert more_users.tau_t == 5

    louder = config.with_overrides(noise_dbm=-100.0)
    assert louder.rho == pytest.approx(10**13.0, rel=1e-12)
    assert louder.rho_t == pytest.approx(0.25 * 10**13.0, rel=1e-12)


def test_explicit_rho_survives_overrides():
    config = SystemConfig(rho=100.0)
    assert config.with_overrides(kappa=3.0).rho == 100.0


def test_paper_scale_layout():
    config = SystemConfig.paper_scale()
    assert (config.M, config.N, config.K_d, config.kappa) == (80, 3, 5, 15.0)
    assert PAPER_SCALE["M"] == 80


def test_parse_config_text_ignores_comments_and_blanks():
    entries = parse_config_text("# header\n\nM = 8   # APs\nkappa=2\n")
    assert entries == {"M": "8", "kappa": "2"}


def test_parse_reports_line_numbers():
    with pytest.raises(ConfigError) as exc_info:
        parse_config_text("M = 8\n\nunknown_key = 1\n")
    assert exc_info.value.line == 3
    assert "line 3" in str(exc_info.value)

    with pytest.raises(ConfigError) as exc_info:
        parse_config_text("M = 8\nthis line has no equals sign\n")
    assert exc_info.value.line == 2


def test_duplicate_keys_are_rejected():
    with pytest.raises(ConfigError):
        parse_config_text("M = 8\nM = 9\n")


def test_load_config_file(tmp_path):
    path = tmp_path / "scenario.conf"
    path.write_text(
        "M = 10\nK_d = 4\nrho = 10^2\ntarget_position = 0.1, 0.2, 0\ncorrelated_shadowing = false\n",
        encoding="utf-8",
    )
    config = load_config_file(path, seed=3)
    assert config.M == 10
    assert config.tau_t == 4
    assert config.rho == pytest.approx(100.0)
    assert config.target_position == (0.1, 0.2, 0.0)
    assert config.correlated_shadowing is False
    assert config.seed == 3


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.conf")


def test_example_file_loads():
    config = load_config_file(Path(__file__).resolve().parents[1] / "config" / "isac.example.conf")
    assert config == SystemConfig()
    assert math.isclose(config.kappa, 10.0)


def test_example_file_lists_every_height():
    path = Path(__file__).resolve().parents[1] / "config" / "isac.example.conf"
    entries = parse_config_text(path.read_text())
    assert float(entries["user_height_m"]) == SystemConfig().user_height_m
    assert float(entries["ap_height_m"]) == SystemConfig().ap_height_m


def test_user_height_does_not_change_the_network():
    low = place_network(SystemConfig(M=4, K_d=2), np.random.default_rng(1))
    high = place_network(SystemConfig(M=4, K_d=2, user_height_m=10.0), np.random.default_rng(1))
    assert np.array_equal(low.beta, high.beta)
    assert np.array_equal(low.target_angles, high.target_angles)
