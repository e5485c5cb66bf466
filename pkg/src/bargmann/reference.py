"""Closed-form one-particle wavepackets used as solver references."""

from __future__ import annotations

import numpy as np


def free_gaussian(x, t: float, m: float, x0: float, w: float, k0: float = 0.0, hbar: float = 1.0):
    """Free spreading packet whose ``t = 0`` form is ``exp(-(x-x0)^2/(2w^2) + i k0 x)``, unit norm."""
    x = np.asarray(x, dtype=float)
    alpha = 1.0 + 1j * hbar * t / (m * w**2)
    v = hbar * k0 / m
    return (
        (np.pi * w**2) ** -0.25
        / np.sqrt(alpha)
        * np.exp(-((x - x0 - v * t) ** 2) / (2 * w**2 * alpha) + 1j * k0 * x - 0.5j * hbar * k0**2 * t / m)
    )


def coherent_state(x, t: float, m: float, omega: float, x0: float, hbar: float = 1.0):
    """Displaced ground state of ``V = m omega^2 x^2 / 2`` released at rest from ``x0``."""
    x = np.asarray(x, dtype=float)
    xc = x0 * np.cos(omega * t)
    pc = -m * omega * x0 * np.sin(omega * t)
    return (m * omega / (np.pi * hbar)) ** 0.25 * np.exp(
        -m * omega / (2 * hbar) * (x - xc) ** 2 + 1j * pc * (x - 0.5 * xc) / hbar - 0.5j * omega * t
    )
