"""Configuration loading, unit conversion, and validation."""

import math

import pytest

from mmwave_noma.config import SystemConfig, dbm_to_watts, load_config, watts_to_dbm


class TestConversions:
    def test_dbm_round_trip(self):
        for dbm in (-10.0, 0.0, 10.0, 30.0):
            assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, abs=1e-12)

    def test_known_points(self):
        assert dbm_to_watts(30.0) == pytest.approx(1.0)
        assert dbm_to_watts(0.0) == pytest.approx(1e-3)
        assert dbm_to_watts(10.0) == pytest.approx(1e-2)

    def test_nonpositive_power_has_no_dbm(self):
        with pytest.raises(ValueError):
            watts_to_dbm(0.0)


class TestDefaults:
    def test_documented_defaults(self):
        config = SystemConfig()
        assert config.num_antennas == 100
        assert config.num_rf_chains == 8
        assert config.num_users == 16
        assert config.num_pool_users == 16
        assert config.max_tx_power_w == pytest.approx(dbm_to_watts(10.0))
        assert config.min_rate_bps_hz == pytest.approx(0.1)
        assert config.amplifier_inefficiency == pytest.approx(1.0 / 0.38)
        # 20 mW of front-end circuitry per RF chain
        assert config.circuit_power_w == pytest.approx(0.16)
        assert config.pathloss_exponent == pytest.approx(4.3)
        assert config.cell_radius_m == pytest.approx(300.0)

    def test_circuit_power_scales_with_chains(self):
        assert SystemConfig(num_rf_chains=4).circuit_power_w == pytest.approx(0.08)

    def test_pool_defaults_to_two_per_chain(self):
        assert SystemConfig(num_rf_chains=5).num_pool_users == 10

    def test_replace_keeps_frozen_semantics(self):
        config = SystemConfig()
        other = config.replace(max_tx_power_w=1e-3)
        assert other.max_tx_power_w == pytest.approx(1e-3)
        assert config.max_tx_power_w == pytest.approx(1e-2)
        with pytest.raises(AttributeError):
            config.num_antennas = 5  # type: ignore[misc]


class TestValidation:
    def test_rejects_bad_integers(self):
        with pytest.raises(ValueError):
            SystemConfig(num_antennas=0)
        with pytest.raises(ValueError):
            SystemConfig(num_paths=-1)

    def test_rejects_more_chains_than_antennas(self):
        with pytest.raises(ValueError):
            SystemConfig(num_antennas=4, num_rf_chains=5)

    def test_rejects_short_pool(self):
        with pytest.raises(ValueError):
            SystemConfig(num_rf_chains=8, num_pool_users=15)

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            SystemConfig(min_distance_m=0.0)
        with pytest.raises(ValueError):
            SystemConfig(min_distance_m=400.0, cell_radius_m=300.0)

    def test_rejects_negative_rate_floor(self):
        with pytest.raises(ValueError):
            SystemConfig(min_rate_bps_hz=-0.1)

    def test_rejects_sub_unity_amplifier_model(self):
        with pytest.raises(ValueError):
            SystemConfig(amplifier_inefficiency=0.9)


class TestFileLoading:
    def test_yaml_with_dbm_aliases(self, tmp_path):
        path = tmp_path / "cell.yaml"
        path.write_text(
            "num_rf_chains: 4\n"
            "max_tx_power_dbm: 0\n"
            "circuit_power_dbm: 20\n"
            "min_rate_bps_hz: 0.2\n"
        )
        config = load_config(path)
        assert config.num_rf_chains == 4
        assert config.max_tx_power_w == pytest.approx(1e-3)
        assert config.circuit_power_w == pytest.approx(0.1)
        assert config.min_rate_bps_hz == pytest.approx(0.2)

    def test_watt_keys_pass_through(self, tmp_path):
        path = tmp_path / "cell.yaml"
        path.write_text("max_tx_power_w: 0.005\n")
        assert load_config(path).max_tx_power_w == pytest.approx(0.005)

    def test_unknown_key_fails_loudly(self, tmp_path):
        path = tmp_path / "cell.yaml"
        path.write_text("max_tx_powr_dbm: 0\n")
        with pytest.raises(ValueError, match="unknown config key"):
            load_config(path)

    def test_alias_conflict_rejected(self, tmp_path):
        path = tmp_path / "cell.yaml"
        path.write_text("max_tx_power_dbm: 0\nmax_tx_power_w: 0.001\n")
        with pytest.raises(ValueError, match="not both"):
            load_config(path)

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(path) == SystemConfig()

    def test_none_path_gives_defaults(self):
        assert load_config(None) == SystemConfig()

    def test_non_mapping_rejected(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValueError, match="flat key-value mapping"):
            load_config(path)

    def test_noise_floor_default(self):
        config = SystemConfig()
        dbm = 10.0 * math.log10(config.noise_power_w) + 30.0
        assert dbm == pytest.approx(-97.0103, abs=1e-3)
