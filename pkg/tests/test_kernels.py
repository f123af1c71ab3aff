"""Emission and rescattering kernels: closed forms, limits, line algebra."""
import numpy as np
import pytest
from scipy.optimize import brentq

from atomcbs import AtomFieldParams, build_bloch, kernel_set, p0_spectrum, steady_state
from atomcbs.transport import integrate_total

from oracles import (elastic_weight_closed, excited_population_closed,
                     linear_amplitude, mollow_inelastic, saturation_closed)

FIG2_SETS = [(0.1, -5.0), (10.0, -5.0)]


@pytest.mark.parametrize("om,de", FIG2_SETS)
def test_inelastic_emission_closed_form(om, de):
    ks = kernel_set(AtomFieldParams(rabi=om, detuning=de))
    z = np.linspace(-25.0, 25.0, 2001)
    ref = mollow_inelastic(z, om, de)
    got = ks.p0_smooth(z)
    assert np.max(np.abs(got - ref) / np.abs(ref)) <= 1e-10


@pytest.mark.parametrize("om,de", FIG2_SETS + [(1.0, 0.0), (2.3, 1.7)])
def test_emission_symmetric_about_drive_frequency(om, de):
    ks = kernel_set(AtomFieldParams(rabi=om, detuning=de))
    z = np.linspace(0.1, 30.0, 57)
    # far-tail values sit behind a large real-part cancellation, so the
    # relative check needs a small absolute floor
    np.testing.assert_allclose(ks.p0_smooth(z), ks.p0_smooth(-z),
                               rtol=1e-12, atol=1e-18)


@pytest.mark.parametrize("om,de", FIG2_SETS + [(1.0, 0.0)])
def test_emission_nonnegative(om, de):
    ks = kernel_set(AtomFieldParams(rabi=om, detuning=de))
    z = np.linspace(-40.0, 40.0, 4001)
    assert np.min(ks.p0_smooth(z)) >= -1e-15


def test_strong_drive_triplet_shape():
    # sidebands at +-rabi, heights 1:3:1, half-widths 3/4 and 1/2 in the
    # strong-drive limit; at rabi = 100 the limit holds to a few percent
    ks = kernel_set(AtomFieldParams(rabi=100.0, detuning=0.0))
    h0 = float(ks.p0_smooth(np.array([0.0]))[0])
    hs = float(ks.p0_smooth(np.array([100.0]))[0])
    assert h0 / hs == pytest.approx(3.0, rel=0.02)
    hw_c = brentq(lambda z: float(ks.p0_smooth(np.array([z]))[0]) - h0 / 2,
                  0.01, 3.0)
    hw_s = brentq(lambda z: float(ks.p0_smooth(np.array([z]))[0]) - hs / 2,
                  100.01, 103.0) - 100.0
    assert hw_c == pytest.approx(0.5, rel=0.02)
    assert hw_s == pytest.approx(0.75, rel=0.03)


def test_elastic_weight_and_sum_rule_single_point():
    p = AtomFieldParams(rabi=2.3, detuning=1.7)
    ks = kernel_set(p)
    assert ks.w0() == pytest.approx(elastic_weight_closed(2.3, 1.7), rel=1e-12)
    total, elastic, inelastic, err = integrate_total(p0_spectrum(p), p)
    assert abs(elastic - elastic_weight_closed(2.3, 1.7)) <= 1e-8
    connected = excited_population_closed(2.3, 1.7) - elastic_weight_closed(2.3, 1.7)
    assert abs(inelastic - connected) <= 1e-8
    assert abs(total - excited_population_closed(2.3, 1.7)) <= 1e-8


def test_elastic_fraction_weak_detuned():
    # elastic weight over total emission is 1/(1+s); about 0.9998 here
    p = AtomFieldParams(rabi=0.1, detuning=-5.0)
    total, elastic, _, _ = integrate_total(p0_spectrum(p), p)
    frac = elastic / total
    assert frac == pytest.approx(1.0 / (1.0 + saturation_closed(0.1, -5.0)),
                                 abs=1e-8)
    assert frac == pytest.approx(0.9998, abs=1e-4)


def test_probe_kernel_weak_field_factorization():
    # the detected elastic line of p1 factorizes into the product of the
    # steady dipole and the linear probe amplitude; corrections are O(s)
    p = AtomFieldParams(rabi=0.01, detuning=0.0)
    ks = kernel_set(p)
    s00 = steady_state(build_bloch(p))
    nus = np.array([-2.0, -0.5, 0.0, 0.3, 1.5])
    l1p = ks.p1_lines(nus)["l1p"]
    pred = np.conj(s00[0]) * linear_amplitude(nus, 0.0, 1.0)
    assert np.max(np.abs(l1p / pred - 1.0)) <= 1e-3
    # pole structure: weight * (nu + detuning + i gamma/2) is nu-independent
    residue = l1p * ((nus + 0.0) + 0.5j)
    assert np.max(np.abs(residue / residue[0] - 1.0)) <= 1e-3


def test_zero_drive_probe_kernels():
    ks = kernel_set(AtomFieldParams(rabi=0.0, detuning=-5.0))
    z = np.linspace(-12.0, 12.0, 41)
    assert np.max(np.abs(ks.p1_smooth(3.0, z))) <= 1e-15
    assert np.max(np.abs(ks.p2_smooth(3.0, z))) <= 1e-15
    nus = np.array([3.0, -5.0, 0.0])
    lines = ks.p2_lines(nus)
    np.testing.assert_allclose(lines["l2p"],
                               np.abs(linear_amplitude(nus, -5.0, 1.0)) ** 2,
                               rtol=1e-12)
    assert np.max(np.abs(lines["l20"])) <= 1e-15
    assert np.max(np.abs(lines["l2m"])) <= 1e-15
    l1 = ks.p1_lines(nus)
    assert np.max(np.abs(l1["l1p"])) <= 1e-15
    assert np.max(np.abs(l1["l10"])) <= 1e-15


def test_zero_drive_rescattering_resonance():
    # the rescattering line weight |t(nu)|^2 peaks at the atomic resonance
    # nu = -detuning with the two-level Lorentzian half-width gamma/2
    ks = kernel_set(AtomFieldParams(rabi=0.0, detuning=-5.0))
    res = float(ks.p2_lines(np.array([5.0]))["l2p"][0])
    assert res == pytest.approx(4.0, rel=1e-12)
    for off in (-2.0, -0.7, 0.9, 3.0):
        assert float(ks.p2_lines(np.array([5.0 + off]))["l2p"][0]) < res
    half = float(ks.p2_lines(np.array([5.5]))["l2p"][0])
    assert half == pytest.approx(res / 2, rel=1e-12)


def test_strong_drive_rescattering_negative():
    ks = kernel_set(AtomFieldParams(rabi=10.0, detuning=-5.0))
    z = np.linspace(-25.0, 25.0, 201)
    og = AtomFieldParams(rabi=10.0, detuning=-5.0).generalized_rabi
    assert min(np.min(ks.p2_smooth(nu, z)) for nu in (0.0, og, -og)) < -1e-2


def test_detected_slot_hermitian_symmetry():
    # the reversed-path product f(nu) = p1(nu, z) conj(p1(z - nu, z))
    # satisfies f(z - nu) = conj(f(nu)); its integral is therefore real
    ks = kernel_set(AtomFieldParams(rabi=3.0, detuning=1.0))
    z = 1.7
    nus = np.array([-4.0, -0.9, 0.3, 2.2, 6.1])
    f = ks.p1_smooth(nus, z) * np.conj(ks.p1_smooth(z - nus, z))
    g = ks.p1_smooth(z - nus, z) * np.conj(ks.p1_smooth(nus, z))
    np.testing.assert_allclose(g, np.conj(f), rtol=1e-12, atol=1e-18)
