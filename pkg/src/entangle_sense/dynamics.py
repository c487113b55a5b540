"""Time evolution: unitary propagation, dissipative channels, decoherence envelopes.

Everything is expressed in the doubly rotating frame of the microwave
carriers (rotating-wave approximation): drive terms are static, the
dipolar coupling enters through its secular ZZ part, and a time-varying
magnetic field appears as a common Sz term on the electronic spins.

Coupling convention: the exchange rate d (Hz) is defined as the observed
dressed-frame flip-flop rate, so the assembled ZZ coefficient is
2*pi*(2*d).  The RWA halves the bare coefficient in the dressed frame,
which puts the full population transfer at t = 1/(2*d).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .spinsys import (
    CONSTANTS,
    DensityState,
    LayoutError,
    SpinLayout,
    build_operator,
    PhysicalConstants,
)

HAMILTONIAN_HERMITICITY_TOL = 1e-12
FIELD_SUBSTEPS_PER_PERIOD = 200


@dataclass(frozen=True)
class FieldModel:
    """Sinusoidal or constant magnetic field along the quantization axis."""

    amplitude_gauss: float = 0.0
    frequency_hz: float = 0.0
    phase_rad: float = 0.0
    kind: str = "sinusoid"  # "sinusoid" | "constant"

    def __post_init__(self) -> None:
        if self.frequency_hz < 0:
            raise ValueError("field frequency must be >= 0")
        if self.kind not in ("sinusoid", "constant"):
            raise ValueError(f"unknown field kind {self.kind!r}")

    def value(self, t: float | np.ndarray) -> float | np.ndarray:
        if self.kind == "constant":
            return self.amplitude_gauss * np.ones_like(np.asarray(t, dtype=float))
        return self.amplitude_gauss * np.sin(2.0 * np.pi * self.frequency_hz * np.asarray(t) + self.phase_rad)

    @property
    def is_static(self) -> bool:
        return self.kind == "constant" or self.frequency_hz == 0.0 or self.amplitude_gauss == 0.0


@dataclass(frozen=True)
class DriveTerm:
    """Resonant microwave drive on one spin: Omega*(cos(phi)Sx + sin(phi)Sy) + delta*Sz."""

    rabi: float  # angular frequency, rad/s
    phase: float = 0.0  # rad
    detuning: float = 0.0  # angular frequency, rad/s

    def __post_init__(self) -> None:
        for name in ("rabi", "phase", "detuning"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"drive {name} must be finite")


@dataclass(frozen=True)
class HamiltonianSpec:
    """Piecewise-constant rotating-frame Hamiltonian for a spin layout."""

    layout: SpinLayout
    drives: Mapping[str, DriveTerm] = field(default_factory=dict)
    coupling_hz: float = 0.0  # dressed-frame exchange rate d, between NV and Xe
    field: FieldModel | None = None
    constants: PhysicalConstants = CONSTANTS

    def __post_init__(self) -> None:
        if not np.isfinite(self.coupling_hz):
            raise ValueError("coupling must be finite")
        for label in self.drives:
            self.layout.index(label)
        if self.coupling_hz != 0.0 and not ("NV" in self.layout and "Xe" in self.layout):
            raise LayoutError("ZZ coupling requires both NV and Xe in the layout")

    def _single(self, label: str, symbol: str) -> np.ndarray:
        spec = {lbl: "I" for lbl in self.layout.subsystems}
        spec[label] = symbol
        return build_operator(self.layout, spec).matrix

    def assemble(self, t: float = 0.0) -> np.ndarray:
        """Hamiltonian matrix (rad/s) at time t."""
        h = np.zeros((self.layout.dim, self.layout.dim), dtype=complex)
        for label, drv in self.drives.items():
            h += drv.rabi * (
                np.cos(drv.phase) * self._single(label, "Sx")
                + np.sin(drv.phase) * self._single(label, "Sy")
            )
            h += drv.detuning * self._single(label, "Sz")
        if self.coupling_hz != 0.0:
            spec = {lbl: "I" for lbl in self.layout.subsystems}
            spec["NV"] = "Sz"
            spec["Xe"] = "Sz"
            zz = build_operator(self.layout, spec).matrix
            h += 2.0 * np.pi * (2.0 * self.coupling_hz) * zz
        if self.field is not None:
            b = float(np.asarray(self.field.value(t)))
            sz_sum = sum(
                self._single(lbl, "Sz")
                for lbl in self.layout.subsystems
                if lbl in ("NV", "Xe")
            )
            h += self.constants.gamma_e * b * sz_sum
        dev = np.max(np.abs(h - h.conj().T))
        if dev > HAMILTONIAN_HERMITICITY_TOL:
            raise ValueError(f"assembled Hamiltonian deviates from Hermitian by {dev:.3e}")
        return h

    @property
    def time_dependent(self) -> bool:
        return self.field is not None and not self.field.is_static


@dataclass(frozen=True)
class DecoherenceEnvelope:
    """Stretched-exponential amplitude model exp(-(gamma2*t)**p)."""

    alpha0: float = 1.0
    gamma2_hz: float = 0.0
    p: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha0 <= 1.0:
            raise ValueError("alpha0 must be in [0, 1]")
        if self.gamma2_hz < 0:
            raise ValueError("gamma2 must be >= 0")
        if self.p <= 0:
            raise ValueError("decay exponent p must be positive")

    def decay(self, t):
        """Coherence decay factor over a contiguous interval t (no alpha0).

        Accepts scalars or arrays; returns the same shape.
        """
        if self.gamma2_hz == 0.0:
            return np.ones_like(t, dtype=float) if np.ndim(t) else 1.0
        out = np.exp(-((self.gamma2_hz * np.asarray(t, dtype=float)) ** self.p))
        return out if np.ndim(t) else float(out)

    def amplitude(self, t):
        """Nominal amplitude alpha0 times the decay factor."""
        return self.alpha0 * self.decay(t)


@dataclass(frozen=True)
class DrivenDecayModel:
    """Exponential damping of exchange oscillations under continuous drive."""

    t1rho_s: float

    def __post_init__(self) -> None:
        if self.t1rho_s <= 0:
            raise ValueError("t1rho must be positive")

    def contrast(self, t: float) -> float:
        return float(np.exp(-t / self.t1rho_s))


@dataclass(frozen=True)
class OUNoiseModel:
    """Ornstein-Uhlenbeck field noise for Monte Carlo dephasing."""

    sigma_b_gauss: float
    tau_c_s: float
    trajectories: int = 100

    def __post_init__(self) -> None:
        if self.sigma_b_gauss < 0:
            raise ValueError("sigma_b must be >= 0")
        if self.tau_c_s <= 0:
            raise ValueError("tau_c must be positive")
        if self.trajectories < 1:
            raise ValueError("need at least one trajectory")


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i*h*t) for Hermitian h via eigendecomposition."""
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1.0j * evals * t)) @ evecs.conj().T


def _evolve(mat: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ mat @ u.conj().T


def propagate(state: DensityState, ham: HamiltonianSpec, t: float) -> DensityState:
    """Unitary evolution rho -> U rho U+ with U = exp(-i H t).

    Time-dependent field terms are handled by piecewise-constant
    sub-stepping with at least FIELD_SUBSTEPS_PER_PERIOD steps per field
    period (midpoint sampling).
    """
    if t < 0:
        raise ValueError("propagation time must be >= 0")
    if ham.layout != state.layout:
        raise LayoutError("Hamiltonian layout does not match state layout")
    if t == 0.0:
        return state
    mat = state.matrix
    if not ham.time_dependent:
        u = expm_hermitian(ham.assemble(0.0), t)
        mat = _evolve(mat, u)
    else:
        period = 1.0 / ham.field.frequency_hz
        n_steps = max(1, int(np.ceil(t / period * FIELD_SUBSTEPS_PER_PERIOD)))
        dt = t / n_steps
        for k in range(n_steps):
            u = expm_hermitian(ham.assemble((k + 0.5) * dt), dt)
            mat = _evolve(mat, u)
    return DensityState(layout=state.layout, matrix=mat)


def optical_pump(state: DensityState, efficiency: float) -> DensityState:
    """Kraus channel resetting the NV qubit toward |0>, other spins untouched."""
    if not 0.0 <= efficiency <= 1.0:
        raise ValueError("pump efficiency must be in [0, 1]")
    lay = state.layout
    if "NV" not in lay:
        raise LayoutError("optical pump requires an NV subsystem")
    kraus = [np.sqrt(1.0 - efficiency) * np.eye(2, dtype=complex)]
    reset0 = np.zeros((2, 2), dtype=complex)
    reset0[0, 0] = 1.0
    reset1 = np.zeros((2, 2), dtype=complex)
    reset1[0, 1] = 1.0
    kraus += [np.sqrt(efficiency) * reset0, np.sqrt(efficiency) * reset1]

    def lift(k2: np.ndarray) -> np.ndarray:
        full = np.array([[1.0 + 0.0j]])
        for lbl in lay.subsystems:
            full = np.kron(full, k2 if lbl == "NV" else np.eye(2, dtype=complex))
        return full

    lifted = [lift(k) for k in kraus]
    out = sum(_evolve(state.matrix, k) for k in lifted)
    return DensityState(layout=lay, matrix=out)


def pump_kraus_identity_deviation(efficiency: float) -> float:
    """Max deviation of sum K+K from identity for the pump channel (should be ~0)."""
    k0 = np.sqrt(1.0 - efficiency) * np.eye(2, dtype=complex)
    k1 = np.zeros((2, 2), dtype=complex)
    k1[0, 0] = np.sqrt(efficiency)
    k2 = np.zeros((2, 2), dtype=complex)
    k2[0, 1] = np.sqrt(efficiency)
    total = sum(k.conj().T @ k for k in (k0, k1, k2))
    return float(np.max(np.abs(total - np.eye(2))))


def _coherence_mask(lay: SpinLayout, basis: str, factor: float) -> np.ndarray:
    """Elementwise decay mask selecting which off-diagonal entries shrink."""
    n = lay.n_spins
    dim = lay.dim
    mask = np.ones((dim, dim))
    bits = [[(idx >> (n - 1 - k)) & 1 for k in range(n)] for idx in range(dim)]
    if basis == "double":
        if not ("NV" in lay and "Xe" in lay):
            raise LayoutError("double-quantum basis requires NV and Xe")
        i_nv, i_xe = lay.index("NV"), lay.index("Xe")
        for a in range(dim):
            for b in range(dim):
                if bits[a][i_nv] != bits[b][i_nv] and bits[a][i_xe] != bits[b][i_xe] and bits[a][i_nv] == bits[a][i_xe]:
                    mask[a, b] = factor
    else:
        pos = lay.index(basis)
        for a in range(dim):
            for b in range(dim):
                differs = bits[a][pos] != bits[b][pos]
                others_same = all(bits[a][k] == bits[b][k] for k in range(n) if k != pos)
                if differs and others_same:
                    mask[a, b] = factor
    return mask


def apply_envelope(state: DensityState, env: DecoherenceEnvelope, basis: str, t: float) -> DensityState:
    """Multiply the selected coherence block by exp(-(gamma2*t)**p).

    basis: a subsystem label for its single-quantum coherences, or
    "double" for the Bell (double-quantum) block.  Applied once per
    contiguous sensing interval; populations are untouched.
    """
    if t < 0:
        raise ValueError("duration must be >= 0")
    factor = env.decay(t)
    mask = _coherence_mask(state.layout, basis, factor)
    return DensityState(layout=state.layout, matrix=state.matrix * mask)


def _block_indices(lay: SpinLayout, block: str) -> tuple[int, int]:
    """Basis indices of the exchange subspace on (NV, Xe)."""
    if lay.n_spins != 2 or set(lay.subsystems) != {"NV", "Xe"}:
        raise LayoutError("exchange blocks are defined on the (NV, Xe) pair")
    nv_first = lay.subsystems[0] == "NV"
    if block == "zq":  # |01>, |10>
        return (1, 2) if nv_first else (2, 1)
    if block == "dq":  # |00>, |11>
        return (0, 3)
    raise ValueError(f"unknown exchange block {block!r}")


def driven_decay(state: DensityState, model: DrivenDecayModel, t: float, block: str = "zq") -> DensityState:
    """Damp exchange-oscillation contrast within one exchange subspace.

    Mixture of the identity (weight exp(-t/T1rho)) with a channel that
    dephases the block against its complement and replaces the block
    content by its equal-population fixed point.
    """
    if t < 0:
        raise ValueError("duration must be >= 0")
    f = model.contrast(t)
    i, j = _block_indices(state.layout, block)
    dim = state.layout.dim
    p = np.zeros((dim, dim))
    p[i, i] = p[j, j] = 1.0
    q = np.eye(dim) - p
    mat = state.matrix
    block_trace = mat[i, i] + mat[j, j]
    fixed = np.zeros_like(mat)
    fixed[i, i] = fixed[j, j] = block_trace / 2.0
    collapsed = fixed + q @ mat @ q
    return DensityState(layout=state.layout, matrix=f * mat + (1.0 - f) * collapsed)


def ou_trajectory(noise: OUNoiseModel, n_steps: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    """Exactly discretized stationary OU path, one value per sub-step."""
    decay = np.exp(-dt / noise.tau_c_s)
    diffuse = noise.sigma_b_gauss * np.sqrt(1.0 - decay**2)
    x = np.empty(n_steps)
    x_cur = noise.sigma_b_gauss * rng.standard_normal()
    for k in range(n_steps):
        x[k] = x_cur
        x_cur = x_cur * decay + diffuse * rng.standard_normal()
    return x


def ou_phase_variance(noise: OUNoiseModel, t: float, gamma_e: float = CONSTANTS.gamma_e) -> float:
    """Variance of the accumulated phase gamma_e * integral x(t') dt' for stationary OU."""
    sigma_w = gamma_e * noise.sigma_b_gauss
    tc = noise.tau_c_s
    return 2.0 * sigma_w**2 * tc * (t - tc * (1.0 - np.exp(-t / tc)))


def monte_carlo_propagate(
    state: DensityState,
    ham: HamiltonianSpec,
    t: float,
    noise: OUNoiseModel,
    seed: int,
) -> DensityState:
    """Average unitary evolutions over OU field-noise trajectories.

    The noise enters as a fluctuating common Sz field on the electronic
    spins.  Per-trajectory seeds derive deterministically from the master
    seed, so results do not depend on evaluation order.
    """
    if t < 0:
        raise ValueError("propagation time must be >= 0")
    if noise.sigma_b_gauss == 0.0:
        return propagate(state, ham, t)
    n_steps = max(10, int(np.ceil(t / (noise.tau_c_s / 10.0))))
    if ham.time_dependent:
        period = 1.0 / ham.field.frequency_hz
        n_steps = max(n_steps, int(np.ceil(t / period * FIELD_SUBSTEPS_PER_PERIOD)))
    dt = t / n_steps
    sz_sum = ham._single("NV", "Sz") if "NV" in ham.layout else 0.0
    if "Xe" in ham.layout:
        sz_sum = sz_sum + ham._single("Xe", "Sz")
    acc = np.zeros_like(state.matrix)
    for traj in range(noise.trajectories):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(traj,)))
        path = ou_trajectory(noise, n_steps, dt, rng)
        mat = state.matrix
        for k in range(n_steps):
            h = ham.assemble((k + 0.5) * dt) + ham.constants.gamma_e * path[k] * sz_sum
            mat = _evolve(mat, expm_hermitian(h, dt))
        acc = acc + mat
    return DensityState(layout=state.layout, matrix=acc / noise.trajectories)
