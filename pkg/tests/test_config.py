import pytest

from risnoma.config import (ConfigError, NetworkConfig, config_from_dict, dump_config,
                            load_config, save_config)


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("")
    cfg = load_config(p)
    assert cfg == NetworkConfig()
    assert (cfg.M, cfg.G, cfg.U, cfg.R, cfg.N) == (25, 1, 75, 25, 256)
    assert (cfg.p_id, cfg.W, cfg.q_u, cfg.f_c) == (21.0, 180e3, 1e5, 5e9)
    assert (cfg.D_in, cfg.D_out, cfg.D, cfg.N0) == (15.0, 50.0, 250.0, -174.0)
    assert (cfg.P_max, cfg.P_min) == (23.0, -40.0)


def test_u_below_r_names_field(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("U: 10\nR: 25\n")
    with pytest.raises(ConfigError, match=r"U=10.*R=25"):
        load_config(p)


@pytest.mark.parametrize("data, field", [({"N": 0}, "N"), ({"W": -1.0}, "W"),
                                         ({"bogus": 1}, "bogus"), ({"N": 2.5}, "N"),
                                         ({"aa_solver": "x"}, "aa_solver"),
                                         ({"D_out": 300.0}, "D_out")])
def test_bad_fields(data, field):
    with pytest.raises(ConfigError, match=field):
        config_from_dict(data)


def test_roundtrip(tmp_path):
    cfg = NetworkConfig(U=40, N=64, D_out=120.0, coherent_combining=True, seed=9)
    save_config(cfg, tmp_path / "c.yaml")
    again = load_config(tmp_path / "c.yaml")
    assert again == cfg
    assert dump_config(again) == dump_config(cfg)


def test_int_values_accepted_for_floats():
    assert config_from_dict({"D_out": 100}).D_out == 100.0
