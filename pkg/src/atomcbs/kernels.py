"""Emission and rescattering kernels of the driven atom.

Three kernels are assembled from the graded correlation transforms:

  p0(z)          emission spectrum of the driven atom (elastic line at 0
                 plus the smooth inelastic part),
  p1(nu, z)      first-order probe-emission cross kernel; smooth in the
                 probe slot nu, with elastic lines in the detected slot z
                 at positions {0, nu},
  p2(nu, z)      probe rescattering kernel (mixed second order); real,
                 sign-indefinite, with detected-slot lines at {0, nu, -nu}.

All detected-slot line weights are exposed separately so downstream
assembly can do the line algebra exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .params import AtomFieldParams, SpectralDistribution
from . import bloch
from .bloch import BlochSystem, build_bloch, correlation_transform, harmonic_response


@dataclass(frozen=True)
class KernelSet:
    """Lazy pointwise kernel evaluations for one parameter set."""

    params: AtomFieldParams
    sys: BlochSystem
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def _ct0(self):
        """Probe-free correlation transform, shared by repeated p0 calls."""
        if "ct0" not in self._cache:
            self._cache["ct0"] = correlation_transform(
                self.sys, harmonic_response(self.sys, 0.0))
        return self._cache["ct0"]

    def _p0_coeffs(self):
        if "p0c" not in self._cache:
            self._cache["p0c"] = bloch.emission_rational_coeffs(self.sys)
        return self._cache["p0c"]

    # -- steady-state scalars -------------------------------------------------
    def w0(self) -> float:
        """Elastic emission line weight |<sigma->ss|^2 (p0 line at 0)."""
        s = bloch.steady_state(self.sys)
        return float((s[1] * s[0]).real)

    def excited_population(self) -> float:
        return bloch.excited_population(self.sys)

    # -- smooth kernel parts --------------------------------------------------
    def p0_smooth(self, z) -> np.ndarray:
        n2, n1, n0, d2, d1, d0 = self._p0_coeffs()
        w = np.asarray(z, dtype=np.longdouble) * np.clongdouble(-1j)
        num = (n2 * w + n1) * w + n0
        den = ((w + d2) * w + d1) * w + d0
        return np.asarray(np.real(num / den), dtype=float) / np.pi

    def p1_smooth(self, nu, z) -> np.ndarray:
        """Smooth part of p1; both branches of the two-sided transform."""
        nu = np.asarray(nu, dtype=float)
        z = np.asarray(z, dtype=float)
        ct = correlation_transform(self.sys, harmonic_response(self.sys, nu))
        # backward branch transforms at the shifted frequency z - nu
        return (ct.gamma10(z) + np.conj(ct.gamma01(z - nu))) / (2 * np.pi)

    def p2_smooth(self, nu, z) -> np.ndarray:
        nu = np.asarray(nu, dtype=float)
        z = np.asarray(z, dtype=float)
        ct = correlation_transform(self.sys, harmonic_response(self.sys, nu))
        return np.real(ct.gamma11(z)) / np.pi

    # -- detected-slot line weights -------------------------------------------
    def p1_lines(self, nu) -> dict:
        """P1's elastic lines in the detected slot: {0: l10, nu: l1p}."""
        nu = np.asarray(nu, dtype=float)
        st = harmonic_response(self.sys, nu).coeffs
        l10 = st[(1, 0)][..., 1] * st[(0, 0)][..., 0]
        l1p = st[(0, 0)][..., 1] * st[(1, 0)][..., 0]
        return {"l10": l10, "l1p": l1p}

    def p2_lines(self, nu) -> dict:
        """P2's elastic lines in the detected slot: {0: l20, nu: l2p, -nu: l2m}."""
        nu = np.asarray(nu, dtype=float)
        st = harmonic_response(self.sys, nu).coeffs
        l20 = np.real(st[(0, 0)][..., 1] * st[(1, 1)][..., 0]
                      + st[(1, 1)][..., 1] * st[(0, 0)][..., 0])
        l2p = np.real(st[(0, 1)][..., 1] * st[(1, 0)][..., 0])
        l2m = np.real(st[(1, 0)][..., 1] * st[(0, 1)][..., 0])
        return {"l20": l20, "l2p": l2p, "l2m": l2m}


def kernel_set(params: AtomFieldParams) -> KernelSet:
    return KernelSet(params=params, sys=build_bloch(params))


def p0_spectrum(params: AtomFieldParams) -> SpectralDistribution:
    """Emission spectrum: elastic line at 0 plus the inelastic smooth part."""
    ks = kernel_set(params)
    return SpectralDistribution(lines=[(0.0, complex(ks.w0()))],
                                smooth=ks.p0_smooth, label="P0")


def p1_kernel(params: AtomFieldParams, omega, omega2):
    """Smooth p1 value(s); the probe slot is omega, detected slot omega2."""
    return kernel_set(params).p1_smooth(omega, omega2)


def p2_kernel(params: AtomFieldParams, omega, omega1):
    """Smooth p2 value(s); the probe slot is omega, detected slot omega1."""
    return kernel_set(params).p2_smooth(omega, omega1)
