# SPDX-License-Identifier: Apache-2.0
import cmath
import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

rceq = pytest.importorskip("rceq")

SRC = Path(os.environ.get("RCEQ_SOURCE_DIR", Path(__file__).resolve().parents[2]))

TINY = [
    "basis.n_freq=32",
    "basis.n_obs=300",
    "basis.M=3",
    "fit.K=4",
    "ofdm.fft_size=64",
    "ofdm.cp_len=16",
    "ofdm.n_pilot_syms=2",
    "ofdm.n_data_syms=3",
    "sweep.trials=2",
    "sweep.ebn0_db=[10, 20]",
]


def test_version():
    assert rceq.__version__ == "0.3.0"


def test_config_defaults_and_overrides():
    cfg = rceq.load_config()
    assert cfg["basis"]["M"] == 10
    assert cfg["fit"]["K_prime"] == 9
    cfg = rceq.load_config(SRC / "configs" / "exp-pdp-qam64.toml", ["sweep.trials=3"])
    assert cfg["ofdm"]["constellation"] == "qam64"
    assert cfg["sweep"]["trials"] == 3


def test_config_errors_raise():
    with pytest.raises(rceq.RceqError, match="ConfigError"):
        rceq.load_config(None, ["basis.nope=1"])


def test_rational_fit_round_trip():
    poles = np.array([0.5, -0.3 + 0.4j])
    residues = np.array([1.0, 0.2 - 0.1j])
    n = 64
    x = np.exp(-2j * np.pi * np.arange(n) / n)
    f = sum(q / (1 - p * x) for p, q in zip(poles, residues))
    c, d, err = rceq.fit_rational(f, 2)
    assert err < 1e-20
    p, q = rceq.partial_fractions(c, d)
    order = np.argsort(-np.abs(p))
    np.testing.assert_allclose(p[order], poles, atol=1e-10)
    np.testing.assert_allclose(q[order], residues, atol=1e-10)


def test_channel_helpers():
    h = rceq.sample_exp_pdp(10, seed=3)
    assert h.shape == (10,) and h[0] == 1
    assert rceq.is_minimum_phase([1.0, 0.5])
    assert not rceq.is_minimum_phase([0.5, 1.0])
    v = rceq.channel_inverse_freq([1.0, 0.5], 8)
    np.testing.assert_allclose(v * np.fft.fft([1.0, 0.5], 8), np.ones(8), atol=1e-12)


def test_pipeline_end_to_end():
    cfg = rceq.load_config(None, TINY)
    weights, basis, manifest = rceq.derive_weights(cfg)
    assert weights["format"] == "rceq-weights"
    assert weights["n_nodes"] == 12
    assert basis["format"] == "rceq-basis"
    assert manifest["command"] == "derive-weights"

    rows, csv, _ = rceq.run_ser(cfg, weights)
    assert len(rows) == 5 * 2 * 2
    assert csv.splitlines()[0] == "method,ebn0_db,seed,n_symbols,n_errors,ser"
    assert all(0.0 <= r.ser <= 1.0 for r in rows)
    rows2, csv2, _ = rceq.run_ser(cfg, weights)
    assert csv == csv2

    svg = rceq.render_ser_svg(csv, "tiny")
    assert svg.startswith("<svg") and "tiny" in svg

    y = rceq.predict(weights, np.r_[1.0, np.zeros(7)])
    assert y.shape == (8,) and np.all(np.isfinite(y))


def test_verify_rank():
    cfg = rceq.load_config(SRC / "configs" / "rank.toml", ["basis.n_obs=1000", "basis.n_freq=32"])
    spectrum, report = rceq.verify_rank(cfg)
    assert spectrum.shape == (64,)
    assert np.all(np.diff(spectrum) <= 0)
    assert report["predicted_rank"] == 16
