import numpy as np
import pytest

from entangle_sense.dynamics import (
    DecoherenceEnvelope,
    DriveTerm,
    DrivenDecayModel,
    FieldModel,
    HamiltonianSpec,
    OUNoiseModel,
    apply_envelope,
    driven_decay,
    expm_hermitian,
    monte_carlo_propagate,
    optical_pump,
    ou_phase_variance,
    ou_trajectory,
    propagate,
    pump_kraus_identity_deviation,
)
from entangle_sense.spinsys import (
    DensityState,
    build_operator,
    layout,
    polarized_state,
    pure_state,
)

TWO = layout("NV", "Xe")


def _random_state(seed, lay=TWO):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(lay.dim, lay.dim)) + 1j * rng.normal(size=(lay.dim, lay.dim))
    mat = a @ a.conj().T
    return DensityState(lay, mat / np.trace(mat).real)


def test_propagate_zero_hamiltonian_identity():
    rho = _random_state(0)
    ham = HamiltonianSpec(layout=TWO, drives={}, coupling_hz=0.0)
    out = propagate(rho, ham, 3.7e-6)
    assert np.allclose(out.matrix, rho.matrix, atol=1e-12)


def test_propagate_pi_pulse_inverts_population():
    lay = layout("NV")
    omega = 2 * np.pi * 1.0e6
    ham = HamiltonianSpec(layout=lay, drives={"NV": DriveTerm(rabi=omega)}, coupling_hz=0.0)
    rho = polarized_state(lay, {"NV": 1.0})
    out = propagate(rho, ham, np.pi / omega)
    assert out.matrix[1, 1].real == pytest.approx(1.0, abs=1e-10)


def test_hh_exchange_in_dressed_frame():
    # matched drives at Omega = 2*pi*500 kHz, d = 58 kHz: full dressed-frame
    # population exchange at 1/(2d) = 8.62 us within 5%
    d = 58.0e3
    omega = 2 * np.pi * 500.0e3
    ham = HamiltonianSpec(
        layout=TWO,
        drives={"NV": DriveTerm(rabi=omega), "Xe": DriveTerm(rabi=omega)},
        coupling_hz=d,
    )
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    rho = pure_state(TWO, np.kron(plus, minus))
    target = pure_state(TWO, np.kron(minus, plus))
    t_grid = np.linspace(6.0e-6, 11.0e-6, 251)
    overlaps = []
    h = ham.assemble()
    for t in t_grid:
        u = expm_hermitian(h, t)
        overlaps.append(np.real(np.trace(target.matrix @ u @ rho.matrix @ u.conj().T)))
    t_star = t_grid[int(np.argmax(overlaps))]
    assert max(overlaps) > 0.95
    assert abs(t_star - 1.0 / (2 * d)) / (1.0 / (2 * d)) < 0.05


def test_exchange_frequency_matches_coupling():
    d = 58.0e3
    omega = 20.0 * 2 * np.pi * d
    ham = HamiltonianSpec(
        layout=TWO,
        drives={"NV": DriveTerm(rabi=omega), "Xe": DriveTerm(rabi=omega)},
        coupling_hz=d,
    )
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    rho0 = pure_state(TWO, np.kron(plus, minus)).matrix
    proj = pure_state(TWO, np.kron(plus, minus)).matrix
    h = ham.assemble()
    t_grid = np.linspace(0.0, 4.0 / d, 1024)
    sig = np.empty(len(t_grid))
    for k, t in enumerate(t_grid):
        u = expm_hermitian(h, t)
        sig[k] = np.real(np.trace(proj @ u @ rho0 @ u.conj().T))
    freqs = np.fft.rfftfreq(len(t_grid), t_grid[1] - t_grid[0])
    spec = np.abs(np.fft.rfft(sig - sig.mean()))
    f_peak = freqs[int(np.argmax(spec))]
    assert abs(f_peak - d) / d < 0.05


def test_propagate_preserves_trace_hermiticity_spectrum():
    rho = _random_state(3)
    omega = 2 * np.pi * 300e3
    ham = HamiltonianSpec(
        layout=TWO,
        drives={"NV": DriveTerm(rabi=omega, phase=0.4), "Xe": DriveTerm(rabi=omega)},
        coupling_hz=40e3,
    )
    out = propagate(rho, ham, 5e-6)
    assert abs(np.trace(out.matrix) - 1.0) < 1e-10
    assert np.max(np.abs(out.matrix - out.matrix.conj().T)) < 1e-10
    eig_in = np.sort(np.linalg.eigvalsh(rho.matrix))
    eig_out = np.sort(np.linalg.eigvalsh(out.matrix))
    assert np.max(np.abs(eig_in - eig_out)) < 1e-9


def test_propagate_composition_time_independent():
    rho = _random_state(4)
    ham = HamiltonianSpec(
        layout=TWO,
        drives={"NV": DriveTerm(rabi=2 * np.pi * 1e5)},
        coupling_hz=58e3,
    )
    once = propagate(rho, ham, 7e-6)
    twice = propagate(propagate(rho, ham, 3e-6), ham, 4e-6)
    assert np.max(np.abs(once.matrix - twice.matrix)) < 1e-9


def test_propagate_rejects_negative_time():
    rho = _random_state(5)
    ham = HamiltonianSpec(layout=TWO, drives={}, coupling_hz=0.0)
    with pytest.raises(ValueError):
        propagate(rho, ham, -1e-6)


def test_optical_pump_full_reset():
    rho = _random_state(6)
    out = optical_pump(rho, 1.0)
    nv_pop = out.matrix[0, 0] + out.matrix[1, 1]
    assert np.real(nv_pop) == pytest.approx(1.0, abs=1e-10)


def test_optical_pump_identity_at_zero():
    rho = _random_state(7)
    assert np.allclose(optical_pump(rho, 0.0).matrix, rho.matrix, atol=1e-12)


def test_optical_pump_partial_efficiency():
    lay = layout("NV")
    rho = polarized_state(lay, {"NV": 0.0})
    out = optical_pump(rho, 0.86)
    assert np.allclose(np.diag(out.matrix).real, [0.93, 0.07], atol=1e-12)


def test_optical_pump_kraus_identity():
    assert pump_kraus_identity_deviation(0.37) < 1e-12


def test_optical_pump_leaves_x_untouched():
    rho = polarized_state(TWO, {"NV": -0.5, "Xe": 0.62})
    out = optical_pump(rho, 0.9)
    x_pol = 2 * out.expectation(build_operator(TWO, {"NV": "I", "Xe": "Sz"}))
    assert x_pol == pytest.approx(0.62, abs=1e-12)


def test_apply_envelope_zero_time_identity():
    rho = _random_state(8)
    env = DecoherenceEnvelope(1.0, 22e3, 1.6)
    out = apply_envelope(rho, env, "NV", 0.0)
    assert np.allclose(out.matrix, rho.matrix, atol=1e-12)


def test_apply_envelope_stretch_factor_oracle():
    # exp(-(22 kHz * 19 us)**1.6) = exp(-(0.418)**1.6) = 0.780589...
    env = DecoherenceEnvelope(1.0, 22e3, 1.6)
    expected = np.exp(-(0.418**1.6))
    assert env.decay(19e-6) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.7806136552652768, rel=1e-10)
    rho = pure_state(layout("NV"), np.array([1.0, 1.0]) / np.sqrt(2))
    out = apply_envelope(rho, env, "NV", 19e-6)
    assert abs(out.matrix[0, 1]) == pytest.approx(0.5 * expected, rel=1e-10)


def test_apply_envelope_exponential_composes_stretched_does_not():
    rho = pure_state(layout("NV"), np.array([1.0, 1.0]) / np.sqrt(2))
    exp_env = DecoherenceEnvelope(1.0, 30e3, 1.0)
    once = apply_envelope(rho, exp_env, "NV", 10e-6)
    split = apply_envelope(apply_envelope(rho, exp_env, "NV", 6e-6), exp_env, "NV", 4e-6)
    assert np.allclose(once.matrix, split.matrix, atol=1e-12)
    st_env = DecoherenceEnvelope(1.0, 30e3, 1.6)
    once = apply_envelope(rho, st_env, "NV", 10e-6)
    split = apply_envelope(apply_envelope(rho, st_env, "NV", 6e-6), st_env, "NV", 4e-6)
    assert abs(once.matrix[0, 1]) != pytest.approx(abs(split.matrix[0, 1]), rel=1e-3)


def test_apply_envelope_double_quantum_block():
    psi = np.array([1.0, 0.0, 0.0, -1.0j]) / np.sqrt(2)
    rho = pure_state(TWO, psi)
    env = DecoherenceEnvelope(1.0, 37e3, 1.6)
    out = apply_envelope(rho, env, "double", 19e-6)
    factor = env.decay(19e-6)
    assert abs(out.matrix[0, 3]) == pytest.approx(0.5 * factor, rel=1e-10)
    assert out.matrix[0, 0].real == pytest.approx(0.5, abs=1e-12)


def test_driven_decay_limits():
    psi = np.array([0.0, 1.0, 0.0, 0.0])
    rho = pure_state(TWO, psi)
    model = DrivenDecayModel(132e-6)
    # long-time limit: exchange block fully mixed
    out = driven_decay(rho, model, 1.0, block="zq")
    assert out.matrix[1, 1].real == pytest.approx(0.5, abs=1e-6)
    assert out.matrix[2, 2].real == pytest.approx(0.5, abs=1e-6)
    # contrast factors
    assert model.contrast(132e-6) == pytest.approx(np.exp(-1.0), rel=1e-12)
    assert model.contrast(8.6e-6) == pytest.approx(0.937, abs=5e-4)


def test_monte_carlo_zero_noise_equals_propagate():
    rho = pure_state(layout("NV"), np.array([1.0, 1.0]) / np.sqrt(2))
    ham = HamiltonianSpec(layout=layout("NV"), drives={}, coupling_hz=0.0)
    noise = OUNoiseModel(sigma_b_gauss=0.0, tau_c_s=10e-6, trajectories=5)
    out = monte_carlo_propagate(rho, ham, 5e-6, noise, seed=1)
    ref = propagate(rho, ham, 5e-6)
    assert np.allclose(out.matrix, ref.matrix, atol=1e-12)


def test_monte_carlo_deterministic_per_seed():
    rho = pure_state(layout("NV"), np.array([1.0, 1.0]) / np.sqrt(2))
    ham = HamiltonianSpec(layout=layout("NV"), drives={}, coupling_hz=0.0)
    noise = OUNoiseModel(sigma_b_gauss=0.02, tau_c_s=5e-6, trajectories=64)
    a = monte_carlo_propagate(rho, ham, 8e-6, noise, seed=9)
    b = monte_carlo_propagate(rho, ham, 8e-6, noise, seed=9)
    assert np.array_equal(a.matrix, b.matrix)


def test_ou_phase_variance_against_trajectories():
    # free-evolution coherence decay matches exp(-variance/2) of the OU
    # phase integral within trajectory statistics
    from entangle_sense.spinsys import CONSTANTS

    noise = OUNoiseModel(sigma_b_gauss=0.015, tau_c_s=8e-6, trajectories=4000)
    t = 12e-6
    n_traj, n_steps = noise.trajectories, 240
    rng = np.random.default_rng(13)
    dt = t / n_steps
    phases = np.empty(n_traj)
    for j in range(n_traj):
        x = ou_trajectory(noise, n_steps, dt, rng)
        phases[j] = CONSTANTS.gamma_e * np.sum(x) * dt
    mc = np.mean(np.exp(1j * phases)).real
    var = ou_phase_variance(noise, t)
    analytic = np.exp(-var / 2.0)
    stat_err = np.std(np.cos(phases)) / np.sqrt(n_traj)
    assert abs(mc - analytic) < 3.5 * stat_err + 0.01


def test_monte_carlo_convergence_in_trajectories():
    rho = pure_state(layout("NV"), np.array([1.0, 1.0]) / np.sqrt(2))
    ham = HamiltonianSpec(layout=layout("NV"), drives={}, coupling_hz=0.0)
    t = 10e-6
    from entangle_sense.spinsys import CONSTANTS

    var = ou_phase_variance(OUNoiseModel(0.02, 5e-6, 1), t)
    target = 0.5 * np.exp(-var / 2.0)
    devs = []
    for n in (100, 10000):
        noise = OUNoiseModel(sigma_b_gauss=0.02, tau_c_s=5e-6, trajectories=n)
        out = monte_carlo_propagate(rho, ham, t, noise, seed=21)
        devs.append(abs(abs(out.matrix[0, 1]) - target))
    assert devs[1] < devs[0]


def test_field_model_validation():
    with pytest.raises(ValueError):
        FieldModel(amplitude_gauss=0.1, frequency_hz=-5.0)


def test_hamiltonian_hermitian():
    ham = HamiltonianSpec(
        layout=TWO,
        drives={"NV": DriveTerm(rabi=1e6, phase=1.1, detuning=3e4)},
        coupling_hz=58e3,
        field=FieldModel(amplitude_gauss=0.05, frequency_hz=1e5),
    )
    h = ham.assemble(t=1.3e-6)
    assert np.max(np.abs(h - h.conj().T)) < 1e-12
