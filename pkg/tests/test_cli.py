import json
from pathlib import Path

import pytest

from holomimo.cli import ConfigError, load_config, main

BASE = """
constants:
  lambda_m: 0.01
  xi_abs: 1.0
tx:
  delta_t_m: 0.05
  m_half: 10
  k_half: 0
  t_pol: 3
rx:
  mode: polar
  d_m: 4.0
  theta_deg: 0.0
  n_r: 1
  r_pol: 3
snr:
  value_db: 50.0
  convention: direct
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(BASE)
    return str(path)


def test_load_and_hash_stable(config_file):
    cfg1 = load_config(config_file)
    cfg2 = load_config(config_file)
    assert cfg1 == cfg2


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(BASE + "\nbogus_section:\n  x: 1\n")
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text(BASE.replace("value_db: 50.0", "value_dbx: 50.0"))
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_set_override(config_file):
    cfg = load_config(config_file, ["snr.value_db=40", "tx.m_half=5"])
    assert cfg["snr"]["value_db"] == 40
    assert cfg["tx"]["m_half"] == 5


def test_gramian_finite(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["gramian", config_file, "--mode", "finite", "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "finite Gramian" in text
    rows = (out / "results.csv").read_text().splitlines()
    assert rows[0] == "scenario,mode,row,col,re,im"
    assert len(rows) == 10  # header + 9 entries


def test_gramian_both_reports_gap(config_file, tmp_path, capsys):
    rc = main(["gramian", config_file, "--mode", "both", "--out",
               str(tmp_path / "o")])
    assert rc == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert "max_rel_gap" in summary
    assert summary["max_rel_gap"] < 0.05


def test_gramian_symmetric_upa_diagonal(tmp_path, capsys):
    path = tmp_path / "upa.yaml"
    path.write_text(BASE.replace("k_half: 0", "k_half: 10"))
    rc = main(["gramian", str(path), "--mode", "asymptotic"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "asymptotic Gramian" in out


def test_capacity_single_element(tmp_path, capsys):
    path = tmp_path / "single.yaml"
    path.write_text(BASE.replace("m_half: 10", "m_half: 0"))
    rc = main(["capacity", str(path), "--out", str(tmp_path / "o")])
    assert rc == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    import numpy as np

    want = 2 * np.log2(1 + 1e5 / 2)
    assert summary["se_bits_per_hz"] == pytest.approx(want, rel=1e-9)
    assert summary["n_active"] == 2


def test_capacity_matches_sweep_argmax(tmp_path):
    # capacity at the sweep's argmax aperture reproduces the argmax rate
    sweep_cfg = tmp_path / "sweep.yaml"
    sweep_cfg.write_text(BASE + """
sweep:
  variable: aperture
  start: 4.0
  stop: 10.0
  points: 61
""")
    out1 = tmp_path / "s"
    assert main(["sweep", str(sweep_cfg), "--out", str(out1)]) == 0
    summary = json.loads((out1 / "summary.json").read_text())
    lam_star, c_star = summary["lambda_star"], summary["c_star"]

    m_half = 40
    cap_cfg = tmp_path / "cap.yaml"
    cap_cfg.write_text(BASE.replace("delta_t_m: 0.05",
                                    f"delta_t_m: {lam_star / (2 * m_half)}")
                       .replace("m_half: 10", f"m_half: {m_half}"))
    out2 = tmp_path / "c"
    assert main(["capacity", str(cap_cfg), "--out", str(out2)]) == 0
    cap = json.loads((out2 / "summary.json").read_text())
    assert cap["se_bits_per_hz"] == pytest.approx(c_star, rel=2e-3)


def test_domain_error_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(BASE.replace("d_m: 4.0", "d_m: -4.0"))
    assert main(["capacity", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_config_parse_error_exit_2(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text("constants: [unclosed\n")
    assert main(["capacity", str(path)]) == 2


def test_sweep_deterministic_bytes(config_file, tmp_path):
    cfg = Path(config_file)
    cfg.write_text(cfg.read_text() + """
sweep:
  variable: aperture
  start: 2.0
  stop: 10.0
  points: 25
  fractions: [0.9]
""")
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["sweep", str(cfg), "--out", str(out)]) == 0
        outs.append(((out / "results.csv").read_bytes(),
                     (out / "summary.json").read_bytes()))
    assert outs[0] == outs[1]


def test_sweep_rx_separation(config_file, tmp_path):
    cfg = Path(config_file)
    cfg.write_text(cfg.read_text().replace("n_r: 1", "n_r: 3") + """
sweep:
  variable: rx_separation
  start: 0.5
  stop: 3.0
  points: 4
""")
    out = tmp_path / "o"
    assert main(["sweep", str(cfg), "--out", str(out)]) == 0
    rows = (out / "results.csv").read_text().splitlines()
    assert len(rows) == 5


def test_validate_suites(config_file, capsys):
    assert main(["validate", config_file, "--suite", "quadrature",
                 "--seeds", "3"]) == 0
    assert main(["validate", config_file, "--suite", "lemma1",
                 "--seeds", "10"]) == 0
    assert main(["validate", config_file, "--suite", "riemann",
                 "--seeds", "10"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3
