"""Experiment configuration files.

INI syntax read with :mod:`configparser`. Schema version 1::

    [meta]
    schema_version = 1

    [params]                 ; ProtocolParams fields
    n = 2200000
    mu = 0.05
    eta = 0.06
    q = 0.034
    delta = 0.05
    gamma = 0.002
    r_balance = 1.0          ; optional
    dark_rate = 0.0          ; optional
    basis_efficiency = 1, 1  ; optional, relative detector efficiency per basis

    [family]                 ; optional, default BB84
    bloch_angle0 = 0         ; radians
    bloch_angle1 = 1.5707963267948966

    [sites]                  ; lat_deg, lon_deg[, alt_m]
    A1 = 46.20, 6.15
    B1 = 46.20, 6.15
    A2 = 1.30, 103.80
    B2 = 1.30, 103.80

    [run]
    seeds = 20141015
    n_commitments = 100
    mode = honest            ; honest | multiphoton_attack | three_agent
    output_dir = out
    workers = 1              ; optional
    n_preshared = 1          ; three_agent only
    j_index = 0              ; three_agent only
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .security import ProtocolParams
from .spacetime import SiteLayout
from .states import bb84_family, bloch_family

SCHEMA_VERSION = 1
MODES = ("honest", "multiphoton_attack", "three_agent")


@dataclass(frozen=True)
class ExperimentConfig:
    params: ProtocolParams
    layout: SiteLayout
    seeds: tuple
    n_commitments: int
    mode: str = "honest"
    output_dir: str = "out"
    workers: int = 1
    n_preshared: int = 1
    j_index: int = 0
    family_angles: Optional[tuple] = None

    def __post_init__(self):
        if self.n_commitments < 1:
            raise ValueError("n_commitments must be at least 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    def to_dict(self) -> dict:
        p = self.params
        return {
            "schema_version": SCHEMA_VERSION,
            "params": {
                "n": p.n,
                "mu": p.mu,
                "eta": p.eta,
                "q": p.q,
                "delta": p.delta,
                "gamma": p.gamma,
                "r_balance": p.r_balance,
                "dark_rate": p.dark_rate,
                "basis_efficiency": list(p.basis_efficiency),
            },
            "family": list(self.family_angles) if self.family_angles else "bb84",
            "sites": {k: list(v) for k, v in sorted(self.layout.sites.items())},
            "run": {
                "seeds": list(self.seeds),
                "n_commitments": self.n_commitments,
                "mode": self.mode,
                "n_preshared": self.n_preshared,
                "j_index": self.j_index,
            },
        }

    def digest(self) -> str:
        """SHA-256 of the canonical config; output paths and worker count excluded."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(list(self.seeds))

    def with_overrides(self, seed=None, out=None, mode=None, workers=None) -> "ExperimentConfig":
        kw = {}
        if seed is not None:
            kw["seeds"] = (int(seed),)
        if out is not None:
            kw["output_dir"] = str(out)
        if mode is not None:
            kw["mode"] = mode
        if workers is not None:
            kw["workers"] = int(workers)
        return replace(self, **kw)


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep site names case-sensitive
    cp.read_string(text)

    version = cp.getint("meta", "schema_version", fallback=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version}")
    for section in ("params", "sites", "run"):
        if not cp.has_section(section):
            raise ValueError(f"config is missing section [{section}]")

    angles = None
    family = bb84_family()
    if cp.has_section("family"):
        angles = (cp.getfloat("family", "bloch_angle0"), cp.getfloat("family", "bloch_angle1"))
        family = bloch_family(*angles)

    ps = cp["params"]
    params = ProtocolParams(
        n=int(ps["n"]),
        mu=float(ps["mu"]),
        eta=float(ps["eta"]),
        q=float(ps["q"]),
        delta=float(ps["delta"]),
        gamma=float(ps["gamma"]),
        family=family,
        r_balance=float(ps.get("r_balance", "1.0")),
        dark_rate=float(ps.get("dark_rate", "0.0")),
        basis_efficiency=tuple(_floats(ps.get("basis_efficiency", "1, 1"))),
    )
    layout = SiteLayout({name: tuple(_floats(v)) for name, v in cp["sites"].items()})

    rs = cp["run"]
    return ExperimentConfig(
        params=params,
        layout=layout,
        seeds=tuple(int(s) for s in rs.get("seeds", "0").replace(",", " ").split()),
        n_commitments=int(rs.get("n_commitments", "1")),
        mode=rs.get("mode", "honest"),
        output_dir=rs.get("output_dir", "out"),
        workers=int(rs.get("workers", "1")),
        n_preshared=int(rs.get("n_preshared", "1")),
        j_index=int(rs.get("j_index", "0")),
        family_angles=angles,
    )


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
