"""Physical parameter records, spectral-distribution containers, conventions.

Frequency convention: every frequency in this package is an offset from the
drive laser frequency, measured in units of the population decay rate gamma
(rotating frame). The absolute laser frequency never appears as a number.

Decay convention: gamma is the excited-state population decay rate; the
dipole coherence decays at gamma/2. This is pinned by `saturation`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, List, Tuple

import numpy as np

# spectral lines closer than this (in units of gamma) are considered coincident
LINE_MERGE_TOL = 1e-9
# merged line weights below this magnitude are dropped as numerically zero
LINE_DROP_TOL = 1e-14

LABELS = ("P0", "P1", "P2", "Ladder", "Crossed", "Oracle")


@dataclass(frozen=True)
class AtomFieldParams:
    """Drive and atom parameters. All rates in units of gamma."""

    rabi: float
    detuning: float
    gamma: float = 1.0
    coupling_mod2: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.rabi < 0:
            raise ValueError(f"rabi must be nonnegative, got {self.rabi}")
        if self.coupling_mod2 < 0:
            raise ValueError(
                f"coupling_mod2 must be nonnegative, got {self.coupling_mod2}")

    @property
    def generalized_rabi(self) -> float:
        return float(np.hypot(self.rabi, self.detuning))

    def rescaled(self, lam: float) -> "AtomFieldParams":
        """Same physics with all rates multiplied by lam (unit-scale test hook)."""
        return replace(self, rabi=self.rabi * lam, detuning=self.detuning * lam,
                       gamma=self.gamma * lam)


@dataclass(frozen=True)
class ProbeAmplitude:
    """Weak probe in the rotating frame: value * exp(-i nu t) added to the drive.

    The probe is a Rabi amplitude (same units as rabi/2). All kernels are
    derivatives at value = 0; no finite-value spectrum is ever exposed.
    """

    value: complex
    nu: float


@dataclass
class SpectralDistribution:
    """A spectrum as elastic delta lines plus a smooth component.

    lines: list of (position, complex weight), positions are offsets from the
    laser frequency. smooth: callable mapping an array of offsets to values.
    """

    lines: List[Tuple[float, complex]]
    smooth: Callable[[np.ndarray], np.ndarray]
    label: str = "P0"

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")

    def line_weight(self, position: float, tol: float = LINE_MERGE_TOL) -> complex:
        return sum(w for p, w in self.lines if abs(p - position) < tol)


def merge_lines(dist: SpectralDistribution,
                tol: float = LINE_MERGE_TOL) -> SpectralDistribution:
    """Sum coincident lines, drop numerically zero weights."""
    merged: List[Tuple[float, complex]] = []
    for pos, w in sorted(dist.lines, key=lambda t: t[0]):
        if merged and abs(pos - merged[-1][0]) < tol:
            merged[-1] = (merged[-1][0], merged[-1][1] + w)
        else:
            merged.append((pos, w))
    kept = [(p, w) for p, w in merged if abs(w) >= LINE_DROP_TOL]
    return SpectralDistribution(lines=kept, smooth=dist.smooth, label=dist.label)


def saturation(params: AtomFieldParams) -> float:
    """s = (rabi^2/2) / (detuning^2 + gamma^2/4), the convention anchor."""
    return (params.rabi ** 2 / 2) / (params.detuning ** 2 + params.gamma ** 2 / 4)
