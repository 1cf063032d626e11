# SPDX-License-Identifier: Apache-2.0
"""Reservoir-computing channel equalization for OFDM receivers.

Thin Python layer over the native ``_rceq`` core. Configurations are plain
dicts with the same layout as the TOML/JSON files read by the ``rceq`` tool.
"""

from __future__ import annotations

import json
from os import PathLike
from typing import Any, Iterable, NamedTuple

import numpy as np

from . import _rceq
from ._rceq import RceqError, __version__

__all__ = [
    "RceqError",
    "SerRow",
    "__version__",
    "channel_inverse_freq",
    "derive_weights",
    "fit_rational",
    "is_minimum_phase",
    "load_config",
    "partial_fractions",
    "predict",
    "render_ser_svg",
    "run_ser",
    "sample_exp_pdp",
    "verify_rank",
]


class SerRow(NamedTuple):
    method: str
    ebn0_db: float
    seed: int
    n_symbols: int
    n_errors: int
    ser: float


def _dump(config: dict[str, Any] | None) -> str:
    return json.dumps(config or {})


def load_config(path: str | PathLike[str] | None = None, overrides: Iterable[str] = ()) -> dict[str, Any]:
    """Resolved configuration with defaults filled in."""
    return json.loads(_rceq.load_config(path or "", list(overrides)))


def derive_weights(config: dict[str, Any] | None = None) -> tuple[dict, dict, dict]:
    """Returns (weights, basis, manifest) as JSON-compatible dicts."""
    w, b, m = _rceq.derive_weights(_dump(config))
    return json.loads(w), json.loads(b), json.loads(m)


def run_ser(config: dict[str, Any] | None = None, weights: dict | None = None) -> tuple[list[SerRow], str, dict]:
    """Returns (rows, csv_text, manifest)."""
    rows, csv, manifest = _rceq.run_ser(_dump(config), json.dumps(weights) if weights else "")
    return [SerRow(*r) for r in rows], csv, json.loads(manifest)


def verify_rank(config: dict[str, Any] | None = None) -> tuple[np.ndarray, dict]:
    spectrum, report = _rceq.verify_rank(_dump(config))
    return np.asarray(spectrum), json.loads(report)


def render_ser_svg(csv_text: str, title: str = "SER") -> str:
    return _rceq.render_ser_svg(csv_text, title)


def fit_rational(samples, K: int, K_prime: int | None = None):
    """Returns (c, d, fit_error) with d excluding the leading 1."""
    c, d, err = _rceq.fit_rational(np.asarray(samples, dtype=complex).tolist(), K, K - 1 if K_prime is None else K_prime)
    return np.asarray(c), np.asarray(d), err


def partial_fractions(c, d):
    p, q = _rceq.partial_fractions(np.asarray(c, dtype=complex).tolist(), np.asarray(d, dtype=complex).tolist())
    return np.asarray(p), np.asarray(q)


def channel_inverse_freq(taps, n_freq: int) -> np.ndarray:
    return np.asarray(_rceq.channel_inverse_freq(np.asarray(taps, dtype=complex).tolist(), n_freq))


def sample_exp_pdp(taps: int = 10, seed: int = 1) -> np.ndarray:
    return np.asarray(_rceq.sample_exp_pdp(taps, seed))


def is_minimum_phase(taps) -> bool:
    return _rceq.is_minimum_phase(np.asarray(taps, dtype=complex).tolist())


def predict(weights: dict, signal) -> np.ndarray:
    return np.asarray(_rceq.predict(json.dumps(weights), np.asarray(signal, dtype=complex).tolist()))
