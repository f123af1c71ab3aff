"""Single-atom optical Bloch equations with a weak bichromatic probe.

State vector ordering is s = (<sigma_minus>, <sigma_plus>, <sigma_z>).
The drive enters in the rotating frame at the laser frequency; the probe is
a perturbation value * exp(-i nu t) treated to the mixed second order.

The long-time periodic solution is organized by grade (p, q): the
coefficient of value^p conj(value)^q exp(-i (p-q) nu t). Two-time dipole
correlations follow from the quantum regression theorem and are evaluated
as resolvent expressions, exactly separating elastic (factorized) lines
from the smooth connected part.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .params import AtomFieldParams

I3 = np.eye(3)

GRADES = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class BlochSystem:
    """Generator m0, decay inhomogeneity b0, probe coupling Jacobians.

    resolvent_coeffs caches the characteristic polynomial and adjugate
    matrices of m0 so resolvent solves reduce to elementwise arithmetic.
    """

    m0: np.ndarray
    b0: np.ndarray
    mplus: np.ndarray
    mminus: np.ndarray
    params: AtomFieldParams
    resolvent_coeffs: tuple = None


@dataclass(frozen=True)
class GradedState:
    """Periodic-state coefficients S_pq at probe detuning nu."""

    coeffs: Dict[Tuple[int, int], np.ndarray]
    nu: float


def swap_conj(v: np.ndarray) -> np.ndarray:
    """Conjugation symmetry map: exchange the dipole components, conjugate."""
    out = np.empty_like(v)
    out[..., 0] = np.conj(v[..., 1])
    out[..., 1] = np.conj(v[..., 0])
    out[..., 2] = np.conj(v[..., 2])
    return out


def build_bloch(params: AtomFieldParams) -> BlochSystem:
    om, de, ga = params.rabi, params.detuning, params.gamma
    if not ga > 0:
        raise ValueError("gamma must be positive")
    m0 = np.array([
        [1j * de - ga / 2, 0.0, 1j * om / 2],
        [0.0, -1j * de - ga / 2, -1j * om / 2],
        [1j * om, -1j * om, -ga],
    ], dtype=complex)
    b0 = np.array([0.0, 0.0, -ga], dtype=complex)
    # probe coupling: v exp(-i nu t) acts like the drive term at amplitude v
    mplus = np.array([[0, 0, 1j], [0, 0, 0], [0, -2j, 0]], dtype=complex)
    mminus = np.array([[0, 0, 0], [0, 0, -1j], [2j, 0, 0]], dtype=complex)
    ev = np.linalg.eigvals(m0)
    if not np.all(ev.real < 0):
        raise ValueError(f"m0 is not relaxing, eigenvalues {ev}")
    t1 = np.trace(m0)
    m2 = m0 @ m0
    c2 = -t1
    c1 = (t1 * t1 - np.trace(m2)) / 2
    c0 = -np.linalg.det(m0)
    coeffs = (c2, c1, c0, (m0 + c2 * I3).T.copy(),
              (m2 + c2 * m0 + c1 * I3).T.copy(),
              np.linalg.inv(-m0).T.copy())
    return BlochSystem(m0=m0, b0=b0, mplus=mplus, mminus=mminus,
                       params=params, resolvent_coeffs=coeffs)


def steady_state(sys: BlochSystem) -> np.ndarray:
    try:
        return np.linalg.solve(sys.m0, -sys.b0)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular Bloch generator (unphysical input)") from exc


def excited_population(sys: BlochSystem) -> float:
    return float((1 + steady_state(sys)[2].real) / 2)


def elastic_dipole_weight(sys: BlochSystem) -> float:
    s = steady_state(sys)
    return float((s[1] * s[0]).real)


def resolvent_apply(sys: BlochSystem, z, rhs) -> np.ndarray:
    """Solve (-i z I - m0) x = rhs, batched over leading dimensions.

    z: scalar or array; rhs: (..., 3); shapes broadcast against each other.
    Uses the adjugate form adj(wI - M) = w^2 I + w(M - tr M I) + (M^2 -
    tr M M + c1 I) so large batches need only elementwise arithmetic; the
    shifted matrix is never singular for a relaxing generator.
    """
    rhs = np.asarray(rhs, dtype=complex)
    c2, c1, c0, b1t, b2t = sys.resolvent_coeffs[:5]
    ws = -1j * np.asarray(z, dtype=complex)
    w = ws[..., None]
    det = ((ws + c2) * ws + c1) * ws + c0
    num = w * w * rhs + w * (rhs @ b1t) + rhs @ b2t
    return num / det[..., None]


_E0 = np.array([1.0, 0.0, 0.0], dtype=complex)


def resolvent_first_row(sys: BlochSystem, z) -> np.ndarray:
    """First row of (-i z I - m0)^{-1}, shape z.shape + (3,).

    Contracting this row with a right-hand side gives the dipole component
    of the resolvent solution at a fraction of the full-solve cost.
    """
    c2, c1, c0, b1t, b2t = sys.resolvent_coeffs[:5]
    ws = -1j * np.asarray(z, dtype=complex)
    det = ((ws + c2) * ws + c1) * ws + c0
    w = ws[..., None]
    row = w * w * _E0 + w * b1t[:, 0] + b2t[:, 0]
    return row / det[..., None]


def harmonic_response(sys: BlochSystem, nu) -> GradedState:
    """Graded periodic-state coefficients at probe detuning nu.

    nu may be a scalar or an array; coefficient vectors get matching
    leading dimensions.
    """
    nu = np.asarray(nu, dtype=float)
    s00 = steady_state(sys)
    s10 = resolvent_apply(sys, nu, sys.mplus @ s00)
    s01 = swap_conj(s10)
    rhs11 = s01 @ sys.mplus.T + s10 @ sys.mminus.T
    s11 = rhs11 @ sys.resolvent_coeffs[5]   # resolvent at zero offset
    s00b = np.broadcast_to(s00, nu.shape + (3,))
    return GradedState(coeffs={(0, 0): s00b, (1, 0): s10,
                               (0, 1): s01, (1, 1): s11},
                       nu=nu if nu.ndim else float(nu))


def connected_initials(state: GradedState) -> Dict[Tuple[int, int], np.ndarray]:
    """Connected regression initial vectors per grade.

    The deformation rho sigma_plus has Bloch components fixed by the
    operator identities sigma+ sigma- = (1+sigma_z)/2, sigma+^2 = 0,
    sigma+ sigma_z = -sigma+. Disconnected products <sigma+> <...> at the
    matching total grade are subtracted.
    """
    s00 = state.coeffs[(0, 0)]
    s10 = state.coeffs[(1, 0)]
    s01 = state.coeffs[(0, 1)]
    s11 = state.coeffs[(1, 1)]

    def raw(s):
        u = np.empty_like(s)
        u[..., 0] = s[..., 2] / 2
        u[..., 1] = 0.0
        u[..., 2] = -s[..., 1]
        return u

    u00 = raw(s00).copy()
    u00[..., 0] = (1 + s00[..., 2]) / 2   # grade (0,0) carries the unit term
    c = {}
    c[(0, 0)] = u00 - s00[..., 1:2] * s00
    c[(1, 0)] = raw(s10) - (s00[..., 1:2] * s10 + s10[..., 1:2] * s00)
    c[(0, 1)] = raw(s01) - (s00[..., 1:2] * s01 + s01[..., 1:2] * s00)
    c[(1, 1)] = raw(s11) - (s00[..., 1:2] * s11 + s11[..., 1:2] * s00
                            + s10[..., 1:2] * s01 + s01[..., 1:2] * s10)
    return c


def emission_rational_coeffs(sys: BlochSystem) -> tuple:
    """Connected-emission transform as one rational function, 80-bit coeffs.

    gamma00(z) = (n2 w^2 + n1 w + n0) / (w^3 + d2 w^2 + d1 w + d0) with
    w = -i z. The connected initial subtracts the squared steady dipole
    from terms several orders larger at weak drive; extended precision in
    the coefficients keeps that cancellation benign.
    """
    ld = np.clongdouble
    m0 = sys.m0.astype(ld)
    b0 = sys.b0.astype(ld)
    adj = np.empty((3, 3), dtype=ld)
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != j]
            c = [k for k in range(3) if k != i]
            minor = (m0[r[0], c[0]] * m0[r[1], c[1]]
                     - m0[r[0], c[1]] * m0[r[1], c[0]])
            adj[i, j] = (-1) ** (i + j) * minor
    det_m = m0[0, 0] * adj[0, 0] + m0[0, 1] * adj[1, 0] + m0[0, 2] * adj[2, 0]
    s00 = adj @ (-b0) / det_m
    u = np.array([(1 + s00[2]) / 2, 0.0, -s00[1]], dtype=ld)
    c00 = u - s00[1] * s00
    tr = m0[0, 0] + m0[1, 1] + m0[2, 2]
    m2 = m0 @ m0
    d2 = -tr
    d1 = (tr * tr - (m2[0, 0] + m2[1, 1] + m2[2, 2])) / 2
    d0 = -det_m
    n2 = c00[0]
    n1 = m0[0, :] @ c00 + d2 * c00[0]
    n0 = m2[0, :] @ c00 + d2 * (m0[0, :] @ c00) + d1 * c00[0]
    return n2, n1, n0, d2, d1, d0


@dataclass(frozen=True)
class CorrelationTransform:
    """One-sided transforms of the connected dipole correlation, per grade.

    gamma_pq(z) is the tau >= 0 Fourier transform of
    <delta sigma+(t) delta sigma-(t+tau)> at probe grade (p, q), evaluated in
    the frame rotating at the detected offset z. Probe insertions between the
    two correlation times (first-order Dyson terms) are included in the
    first-order and mixed grades. The tau < 0 branch follows from Hermitian
    symmetry and is applied by the kernel assembly.

    Disconnected (factorized) dipole products are exposed as line weights.
    """

    sys: BlochSystem
    state: GradedState
    initials: Dict[Tuple[int, int], np.ndarray]

    def gamma00(self, z) -> np.ndarray:
        row = resolvent_first_row(self.sys, z)
        return np.sum(row * self.initials[(0, 0)], axis=-1)

    def gamma10(self, z) -> np.ndarray:
        """Grade (1,0): probe photon absorbed, harmonic n=+1."""
        nu = self.state.nu
        inner = resolvent_apply(self.sys, np.asarray(z) - nu, self.initials[(0, 0)])
        rhs = self.initials[(1, 0)] + inner @ self.sys.mplus.T
        return np.sum(resolvent_first_row(self.sys, z) * rhs, axis=-1)

    def gamma01(self, z) -> np.ndarray:
        nu = self.state.nu
        inner = resolvent_apply(self.sys, np.asarray(z) + nu, self.initials[(0, 0)])
        rhs = self.initials[(0, 1)] + inner @ self.sys.mminus.T
        return np.sum(resolvent_first_row(self.sys, z) * rhs, axis=-1)

    def gamma11(self, z) -> np.ndarray:
        nu = self.state.nu
        z = np.asarray(z)
        c00 = self.initials[(0, 0)]
        rz_c00 = resolvent_apply(self.sys, z, c00)
        up = self.initials[(0, 1)] + rz_c00 @ self.sys.mminus.T
        dn = self.initials[(1, 0)] + rz_c00 @ self.sys.mplus.T
        inner = (self.initials[(1, 1)]
                 + resolvent_apply(self.sys, z - nu, up) @ self.sys.mplus.T
                 + resolvent_apply(self.sys, z + nu, dn) @ self.sys.mminus.T)
        return np.sum(resolvent_first_row(self.sys, z) * inner, axis=-1)

    def line_weight_00(self) -> float:
        """Disconnected grade-(0,0) weight: |<sigma->ss|^2, line at offset 0."""
        s00 = self.state.coeffs[(0, 0)]
        w = s00[..., 1] * s00[..., 0]
        return w.real if w.ndim else float(w.real)


def correlation_transform(sys: BlochSystem, state: GradedState) -> CorrelationTransform:
    return CorrelationTransform(sys=sys, state=state,
                                initials=connected_initials(state))
