import numpy as np
import pytest

from oracles import freq_to_time_oracle
from snxp.cavity import (CavityParams, TwoPoleForm, cavity_reflection,
                         group_delay, linearized_reflection,
                         reflection_from_susceptibility,
                         scattering_amplitudes, susceptibility_map,
                         to_two_pole)
from snxp.core import FrequencyGrid, NS_PER_TIME_UNIT, numeric_derivative
from snxp.errors import ConfigurationError, DegenerateMappingError


def test_params_validation():
    with pytest.raises(ConfigurationError):
        CavityParams(kappa=0.0)
    with pytest.raises(ConfigurationError):
        CavityParams(kappa_r=-1.0)
    with pytest.raises(ConfigurationError):
        CavityParams(g2n=-1.0)
    with pytest.raises(ConfigurationError):
        CavityParams(linewidth=0.0)


def test_scattering_amplitude_poles():
    # F_plus has unit-weight pole at -(delta_g/2 + 3 delta_e/2); with the
    # default splittings that sits at -53.45, and the 1/3-weight pole at
    # (delta_g - delta_e)/2 = 8.65
    p = CavityParams()
    d = np.linspace(-80.0, 80.0, 160001)
    f_plus, f_minus = scattering_amplitudes(d, p)
    assert d[np.argmax(np.abs(f_plus))] == pytest.approx(-53.45, abs=0.01)
    assert d[np.argmax(np.abs(f_minus))] == pytest.approx(53.45, abs=0.01)
    # mirror symmetry of the level scheme: F_minus(-d) has the pole pattern
    # of F_plus(d) with the residues swapped between the two lines
    peaks_p = sorted(d[np.argsort(np.abs(f_plus))[-1:]])
    # 1/3-weight line: peak height (1/3)/(gamma/2) = 2/3
    assert np.abs(f_plus[np.abs(d - 8.65) < 5e-4]).max() == pytest.approx(
        2.0 / 3.0, rel=1e-3)
    assert peaks_p[0] == pytest.approx(-53.45, abs=0.01)


def test_two_pole_reduction_is_exact():
    rng = np.random.default_rng(7)
    p = CavityParams()
    d = rng.uniform(-300.0, 300.0, size=1000)
    fp, fm = scattering_amplitudes(d, p)
    rp = to_two_pole(p, "plus").evaluate(d)
    rm = to_two_pole(p, "minus").evaluate(d)
    full = cavity_reflection(d, p)
    scale = np.max(np.abs(full))
    np.testing.assert_allclose(rp - rm, full, atol=1e-12 * scale)


def test_two_pole_branch_swap_invariance():
    # time_response must not depend on which pole is labeled 1
    f = TwoPoleForm(c0=0.3 - 0.8j, c1=1.2 + 0.1j, c2=0.4 - 0.2j,
                    delta1=-10.0, delta2=25.0)
    g = TwoPoleForm(c0=f.c0, c1=f.c2, c2=f.c1, delta1=f.delta2,
                    delta2=f.delta1)
    t = np.linspace(-0.5, 3.0, 301)
    np.testing.assert_allclose(f.time_response(t), g.time_response(t),
                               rtol=1e-10, atol=1e-12)
    d = np.linspace(-60.0, 60.0, 121)
    np.testing.assert_allclose(f.evaluate(d), g.evaluate(d), rtol=1e-12)


def test_two_pole_time_response_matches_fft():
    p = CavityParams()
    form = to_two_pole(p, "plus")
    t, vals = freq_to_time_oracle(form.evaluate)
    sel = (t > 0.005) & (t < 3.0)
    ref = form.time_response(t[sel])
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(vals[sel] - ref)) < 1e-6 * scale
    # causality
    assert np.max(np.abs(vals[t < -0.01])) < 1e-6 * scale


def test_cavity_time_response_matches_fft():
    # difference of the two channel responses vs FFT of R_Cavity
    p = CavityParams()
    fp = to_two_pole(p, "plus")
    fm = to_two_pole(p, "minus")

    def spec(d):
        return cavity_reflection(d, p)

    t, vals = freq_to_time_oracle(spec)
    sel = (t > 0.005) & (t < 3.0)
    ref = fp.time_response(t[sel]) - fm.time_response(t[sel])
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(vals[sel] - ref)) < 1e-6 * scale


def test_time_response_degenerate_omega_branch():
    # delta1 = delta2, c1 = -c2, c0 arbitrary: omega_tilde = 0 exactly
    f = TwoPoleForm(c0=0.5, c1=1.0, c2=-1.0, delta1=3.0, delta2=3.0)
    assert abs(f.omega_tilde) < 1e-12
    t = np.linspace(0.0, 2.0, 50)
    v = f.time_response(t)
    # compare with a nearby nondegenerate form (continuity in delta2)
    f_eps = TwoPoleForm(c0=0.5, c1=1.0, c2=-1.0, delta1=3.0,
                        delta2=3.0 + 1e-7)
    np.testing.assert_allclose(v, f_eps.time_response(t), atol=1e-5)
    with pytest.raises(DegenerateMappingError):
        f.domega_dc0


def test_group_delay_at_resonance_is_tens_of_ns():
    p = CavityParams()
    res = group_delay(0.0, p)
    assert res.reliable
    tau_ns = res.tau * NS_PER_TIME_UNIT
    assert 20.0 < tau_ns < 50.0
    assert float(res) == res.tau


def test_group_delay_matches_numeric_phase_derivative():
    p = CavityParams()
    g = FrequencyGrid(n_samples=2**12, spacing=0.01, center=5.0)
    d = g.deltas()
    phase = np.unwrap(np.angle(cavity_reflection(d, p)))
    dphi = numeric_derivative(phase, g)
    for idx in [500, 2048, 3500]:
        assert group_delay(float(d[idx]), p).tau == pytest.approx(
            dphi[idx], rel=1e-4)


def test_group_delay_unreliable_far_off_resonance():
    p = CavityParams()
    assert not group_delay(1e6, p).reliable
    assert group_delay(200.0, p).reliable


def test_zero_coupling_gives_zero_reflection():
    p = CavityParams(g2n=0.0)
    d = np.linspace(-60.0, 60.0, 121)
    np.testing.assert_array_equal(cavity_reflection(d, p), 0.0)
    res = group_delay(0.0, p)
    assert not res.reliable


def test_to_two_pole_validation():
    p = CavityParams()
    with pytest.raises(ConfigurationError):
        to_two_pole(p, "sideways")


def test_linearized_reflection_is_locally_exact():
    p = CavityParams()
    dd = 3.0
    r_lin = linearized_reflection(np.array([dd]), dd, p)[0]
    r_full = cavity_reflection(np.array([dd]), p)[0]
    assert r_lin == pytest.approx(r_full, rel=1e-12)
    # first-order phase agreement at small offsets
    eps = 1e-3
    lin = linearized_reflection(np.array([dd + eps]), dd, p)[0]
    full = cavity_reflection(np.array([dd + eps]), p)[0]
    assert np.angle(lin / full) == pytest.approx(0.0, abs=1e-5)


def test_susceptibility_roundtrip():
    p = CavityParams()
    length = 10e-6
    omega0 = 2.19e19  # 14.4 keV in rad/s
    for dd in [0.0, 2.0, -15.0]:
        chi_im, dchi = susceptibility_map(dd, p, length, omega0)
        mag, slope = reflection_from_susceptibility(chi_im, dchi, length,
                                                    omega0)
        r0 = cavity_reflection(np.array([dd]), p)[0]
        assert mag == pytest.approx(abs(r0), rel=1e-12)
        assert slope == pytest.approx(group_delay(dd, p).tau, abs=1e-10)
    with pytest.raises(ConfigurationError):
        susceptibility_map(0.0, p, 0.0, omega0)
