"""Qubit state families for the commitment and the spectra the bound needs.

A family holds four states ``states[theta][x]``. Within one basis the two
states must be orthogonal; the security threshold depends only on the
largest overlap between states from different bases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ATOL = 1e-10


@dataclass(frozen=True)
class StateFamily:
    states: np.ndarray  # complex, shape (2 bases, 2 values, 2 amplitudes)

    def __post_init__(self):
        s = np.array(self.states, dtype=complex)
        if s.shape != (2, 2, 2):
            raise ValueError("a state family is four qubit states indexed [theta][x]")
        for theta in (0, 1):
            for x in (0, 1):
                if abs(np.vdot(s[theta, x], s[theta, x]) - 1) > ATOL:
                    raise ValueError(f"state (theta={theta}, x={x}) is not normalised")
            if abs(np.vdot(s[theta, 0], s[theta, 1])) > ATOL:
                raise ValueError(f"basis {theta} states are not orthogonal")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    def state(self, x: int, theta: int) -> np.ndarray:
        return self.states[theta, x]

    @property
    def overlap_t(self) -> float:
        return float(
            max(abs(np.vdot(self.states[0, b], self.states[1, c])) for b in (0, 1) for c in (0, 1))
        )

    def resolution_residual(self) -> float:
        """Largest deviation of either basis from a resolution of the identity."""
        eye = np.eye(2)
        out = 0.0
        for theta in (0, 1):
            proj = sum(np.outer(v, v.conj()) for v in self.states[theta])
            out = max(out, float(np.abs(proj - eye).max()))
        return out


def bb84_family() -> StateFamily:
    r = 1 / math.sqrt(2)
    return StateFamily(np.array([[[1, 0], [0, 1]], [[r, r], [r, -r]]], dtype=complex))


def bloch_family(angle0: float, angle1: float) -> StateFamily:
    """Family whose two bases sit at polar angles ``angle0``/``angle1`` (radians) in the x-z plane.

    ``bloch_family(0, pi/2)`` is BB84.
    """

    def basis(a):
        up = np.array([math.cos(a / 2), math.sin(a / 2)], dtype=complex)
        down = np.array([-math.sin(a / 2), math.cos(a / 2)], dtype=complex)
        return [up, down]

    return StateFamily(np.array([basis(angle0), basis(angle1)]))


@dataclass(frozen=True)
class MixtureSpectrum:
    lambda_plus: float
    lambda_minus: float
    e_plus: np.ndarray
    e_minus: np.ndarray


def diagonalize_mixture(psi0, psi1) -> MixtureSpectrum:
    """Closed-form eigen-decomposition of (|psi0><psi0| + |psi1><psi1|) / 2."""
    psi0 = np.asarray(psi0, dtype=complex)
    psi1 = np.asarray(psi1, dtype=complex)
    for v in (psi0, psi1):
        if abs(np.linalg.norm(v) - 1) > 1e-9:
            raise ValueError("states must be normalised")
    ov = np.vdot(psi0, psi1)
    c = float(abs(ov))
    phase = ov / c if c > 0 else 1.0
    lam_p, lam_m = (1 + c) / 2, (1 - c) / 2

    e_plus = (psi0 + np.conj(phase) * psi1) / math.sqrt(2 * (1 + c))
    diff = psi0 - np.conj(phase) * psi1
    if 1 - c > 1e-12:
        e_minus = diff / math.sqrt(2 * (1 - c))
    else:
        # identical rays: any unit vector orthogonal to e_plus
        e_minus = np.array([-np.conj(e_plus[1]), np.conj(e_plus[0])])
    return MixtureSpectrum(lam_p, lam_m, e_plus, e_minus)


def cross_mixture(family: StateFamily, b: int, c: int) -> np.ndarray:
    """Density matrix of an equal mixture of one state from each basis."""
    u, v = family.state(b, 0), family.state(c, 1)
    return 0.5 * (np.outer(u, u.conj()) + np.outer(v, v.conj()))


def lambda1_of(family: StateFamily) -> float:
    """Asymptotic error threshold (1 - t) / 2 of a state family."""
    return (1 - family.overlap_t) / 2


def lambda_table(family: StateFamily) -> np.ndarray:
    """Coin table ``[outcome, coin]``: column ``c`` is the spectrum of the mixture with b xor c' = c.

    Mixtures with the same parity of (b, c) share an eigenbasis, so two
    columns describe every cross pair.
    """
    table = np.empty((2, 2))
    for parity in (0, 1):
        spectrum = diagonalize_mixture(family.state(0, 0), family.state(parity, 1))
        table[:, parity] = (float(spectrum.lambda_plus), float(spectrum.lambda_minus))
    return table
