"""Pulse-sequence IR, gate library, and sequence executor.

Gates derived from the cross-polarization sequence are applied as their
dressed-frame effective unitaries expressed in the computational basis:
a rotation by theta = 2*pi*d*t inside one exchange subspace, either the
zero-quantum block {|01>, |10>} (SWAP-like polarization transfer) or the
double-quantum block {|00>, |11>} (entangling exchange).  Which relative
drive phase realizes which block is not hard-coded: it is verified
numerically against full-Hamiltonian propagation at startup, see
:func:`verify_phase_recipes`.

Gate imperfections are modeled as a depolarizing admixture with weight
epsilon_g per gate, plus contrast damping at the driven-decay time T1rho
over the drive duration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import integrate

from .spinsys import (
    CONSTANTS,
    DensityState,
    LayoutError,
    SpinLayout,
    build_operator,
    layout,
    polarized_state,
    pure_state,
)
from .dynamics import (
    DecoherenceEnvelope,
    DriveTerm,
    DrivenDecayModel,
    FieldModel,
    HamiltonianSpec,
    apply_envelope,
    driven_decay,
    expm_hermitian,
    optical_pump,
    propagate,
)

TWO_SPIN_LAYOUT = layout("NV", "Xe")

ZQ_BLOCK = (1, 2)  # |01>, |10> on (NV, Xe)
DQ_BLOCK = (0, 3)  # |00>, |11>


class SequenceError(ValueError):
    """Raised for malformed pulse sequences."""


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class GateParams:
    """Exchange-gate parameters: coupling, unitary error, driven decay."""

    d_hz: float
    epsilon: float = 0.0
    t1rho_s: float | None = None

    def __post_init__(self) -> None:
        if self.d_hz <= 0:
            raise ValueError("coupling d must be positive")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("gate error must be in [0, 1]")
        if self.t1rho_s is not None and self.t1rho_s <= 0:
            raise ValueError("t1rho must be positive")

    @property
    def swap_time(self) -> float:
        return 1.0 / (2.0 * self.d_hz)

    @property
    def entangle_time(self) -> float:
        return 1.0 / (4.0 * self.d_hz)


@dataclass(frozen=True)
class NuclearFactor:
    """Scalar contrast model for the unresolved ancilla nuclear spin."""

    polarization: float = 0.0
    transitions: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.polarization <= 1.0:
            raise ValueError("nuclear polarization must be in [0, 1]")
        if self.transitions not in (1, 2):
            raise ValueError("addressed transitions must be 1 or 2")

    @property
    def amplitude_factor(self) -> float:
        if self.transitions == 2:
            return 1.0
        q = self.polarization
        return q + (1.0 - q) / 2.0


@dataclass(frozen=True)
class MicrowaveDrive:
    targets: tuple[str, ...]
    rabi: float  # rad/s, matched magnitude on every target
    phases: tuple[float, ...]
    duration: float
    phase_mod_hz: tuple[float, ...] | None = None  # linear phase ramp per target

    kind = "microwave_drive"


@dataclass(frozen=True)
class LaserPulse:
    duration: float
    efficiency: float

    kind = "laser_pulse"


@dataclass(frozen=True)
class Delay:
    duration: float

    kind = "delay"


@dataclass(frozen=True)
class SensingWindow:
    duration: float
    field: FieldModel
    targets: tuple[str, ...]
    pi_fractions: tuple[float, ...] = (0.5,)

    kind = "sensing_window"


Segment = MicrowaveDrive | LaserPulse | Delay | SensingWindow


@dataclass(frozen=True)
class PulseSequence:
    """Ordered, timed protocol segments."""

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        for seg in self.segments:
            if seg.duration < 0:
                raise SequenceError("segment durations must be >= 0")
            if isinstance(seg, MicrowaveDrive):
                if len(seg.targets) != len(seg.phases):
                    raise SequenceError("one phase per drive target required")
                if seg.phase_mod_hz is not None and len(seg.phase_mod_hz) != len(seg.targets):
                    raise SequenceError("one modulation frequency per target required")
                if not all(np.isfinite(seg.phases)):
                    raise SequenceError("phase ramps must be finite")

    @property
    def total_duration(self) -> float:
        return float(sum(seg.duration for seg in self.segments))

    def to_json(self) -> str:
        return json.dumps([_segment_to_dict(s) for s in self.segments], indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PulseSequence":
        return cls(segments=tuple(_segment_from_dict(d) for d in json.loads(text)))


def _segment_to_dict(seg: Segment) -> dict:
    if isinstance(seg, MicrowaveDrive):
        out = {
            "type": seg.kind,
            "targets": list(seg.targets),
            "rabi_rad_per_s": seg.rabi,
            "phases_rad": list(seg.phases),
            "duration_s": seg.duration,
        }
        if seg.phase_mod_hz is not None:
            out["phase_mod_hz"] = list(seg.phase_mod_hz)
        return out
    if isinstance(seg, LaserPulse):
        return {"type": seg.kind, "duration_s": seg.duration, "efficiency": seg.efficiency}
    if isinstance(seg, Delay):
        return {"type": seg.kind, "duration_s": seg.duration}
    if isinstance(seg, SensingWindow):
        return {
            "type": seg.kind,
            "duration_s": seg.duration,
            "targets": list(seg.targets),
            "pi_fractions": list(seg.pi_fractions),
            "field": {
                "amplitude_gauss": seg.field.amplitude_gauss,
                "frequency_hz": seg.field.frequency_hz,
                "phase_rad": seg.field.phase_rad,
                "kind": seg.field.kind,
            },
        }
    raise SequenceError(f"unknown segment {seg!r}")


def _segment_from_dict(d: Mapping) -> Segment:
    t = d["type"]
    if t == "microwave_drive":
        return MicrowaveDrive(
            targets=tuple(d["targets"]),
            rabi=d["rabi_rad_per_s"],
            phases=tuple(d["phases_rad"]),
            duration=d["duration_s"],
            phase_mod_hz=tuple(d["phase_mod_hz"]) if "phase_mod_hz" in d else None,
        )
    if t == "laser_pulse":
        return LaserPulse(duration=d["duration_s"], efficiency=d["efficiency"])
    if t == "delay":
        return Delay(duration=d["duration_s"])
    if t == "sensing_window":
        f = d["field"]
        return SensingWindow(
            duration=d["duration_s"],
            targets=tuple(d["targets"]),
            pi_fractions=tuple(d["pi_fractions"]),
            field=FieldModel(
                amplitude_gauss=f["amplitude_gauss"],
                frequency_hz=f["frequency_hz"],
                phase_rad=f["phase_rad"],
                kind=f["kind"],
            ),
        )
    raise SequenceError(f"unknown segment type {t!r}")


# ---------------------------------------------------------------------------
# Effective gate algebra


def exchange_unitary(theta: float, phase: float, block: str) -> np.ndarray:
    """Rotation by theta inside one exchange subspace of the (NV, Xe) pair."""
    if block == "zq":
        i, j = ZQ_BLOCK
    elif block == "dq":
        i, j = DQ_BLOCK
    else:
        raise ValueError(f"unknown exchange block {block!r}")
    u = np.eye(4, dtype=complex)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    u[i, i] = u[j, j] = c
    u[i, j] = -1.0j * np.exp(1.0j * phase) * s
    u[j, i] = -1.0j * np.exp(-1.0j * phase) * s
    return u


def _depolarize(state: DensityState, epsilon: float) -> DensityState:
    if epsilon == 0.0:
        return state
    dim = state.layout.dim
    mixed = np.eye(dim, dtype=complex) / dim
    return DensityState(state.layout, (1.0 - epsilon) * state.matrix + epsilon * mixed)


def apply_exchange_gate(
    state: DensityState,
    params: GateParams,
    duration: float,
    block: str,
    phase: float = 0.0,
) -> DensityState:
    """Exchange rotation + driven-decay damping + depolarizing error."""
    if state.layout != TWO_SPIN_LAYOUT:
        raise LayoutError("exchange gates act on the (NV, Xe) pair")
    theta = 2.0 * np.pi * params.d_hz * duration
    u = exchange_unitary(theta, phase, block)
    out = DensityState(state.layout, u @ state.matrix @ u.conj().T)
    if params.t1rho_s is not None:
        out = driven_decay(out, DrivenDecayModel(params.t1rho_s), duration, block=block)
    return _depolarize(out, params.epsilon)


def single_spin_rotation(state: DensityState, target: str, angle: float, phase: float = 0.0) -> DensityState:
    """Perfect resonant rotation about the in-plane axis set by phase."""
    lay = state.layout
    spec_x = {lbl: "I" for lbl in lay.subsystems}
    spec_x[target] = "Sx"
    spec_y = dict(spec_x)
    spec_y[target] = "Sy"
    gen = np.cos(phase) * build_operator(lay, spec_x).matrix + np.sin(phase) * build_operator(lay, spec_y).matrix
    u = expm_hermitian(gen, angle)
    return DensityState(lay, u @ state.matrix @ u.conj().T)


@lru_cache(maxsize=8)
def verify_phase_recipes(d_hz: float, rabi_over_coupling: float = 20.0) -> dict[str, float]:
    """Determine numerically which relative drive phase drives which block.

    Propagates the full two-spin drive+coupling Hamiltonian for relative
    phases 0 and pi and checks, in the dressed basis, which one realizes
    the zero-quantum flip-flop and which the double-quantum exchange.
    Returns {"zq": relative_phase, "dq": relative_phase}.
    """
    omega = rabi_over_coupling * 2.0 * np.pi * d_hz
    t_swap = 1.0 / (2.0 * d_hz)
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
    out: dict[str, float] = {}
    for rel_phase in (0.0, np.pi):
        ham = HamiltonianSpec(
            layout=TWO_SPIN_LAYOUT,
            drives={"NV": DriveTerm(rabi=omega), "Xe": DriveTerm(rabi=omega, phase=rel_phase)},
            coupling_hz=d_hz,
        )
        u = expm_hermitian(ham.assemble(), t_swap)
        zq_in, zq_out = np.kron(plus, minus), np.kron(minus, plus)
        dq_in, dq_out = np.kron(plus, plus), np.kron(minus, minus)
        p_zq = abs(zq_out.conj() @ u @ zq_in) ** 2
        p_dq = abs(dq_out.conj() @ u @ dq_in) ** 2
        if p_zq > 0.95 and p_dq < 0.05:
            out["zq"] = rel_phase
        elif p_dq > 0.95 and p_zq < 0.05:
            out["dq"] = rel_phase
    if set(out) != {"zq", "dq"}:
        raise RuntimeError(f"phase-recipe verification failed: {out}")
    return out


# ---------------------------------------------------------------------------
# Sequence construction and execution


def hhcp(duration: float, phase_recipe: str, params: GateParams, rabi: float | None = None) -> PulseSequence:
    """Simultaneous matched drives on NV and Xe realizing one exchange gate.

    phase_recipe: "swap" (zero-quantum) or "entangle" (double-quantum).
    """
    if duration <= 0:
        raise SequenceError("HHCP duration must be positive")
    if phase_recipe not in ("swap", "entangle"):
        raise SequenceError(f"unknown phase recipe {phase_recipe!r}")
    recipes = verify_phase_recipes(params.d_hz)
    rel = recipes["zq"] if phase_recipe == "swap" else recipes["dq"]
    omega = rabi if rabi is not None else 20.0 * 2.0 * np.pi * params.d_hz
    return PulseSequence(
        segments=(
            MicrowaveDrive(targets=("NV", "Xe"), rabi=omega, phases=(0.0, rel), duration=duration),
        )
    )


@dataclass(frozen=True)
class ExecutionContext:
    """Models and parameters the executor needs beyond the IR itself."""

    gate_params: GateParams
    envelopes: Mapping[str, DecoherenceEnvelope] = field(default_factory=dict)
    constants = CONSTANTS


def _drive_block(seg: MicrowaveDrive, params: GateParams) -> tuple[str, float]:
    """Classify a two-target matched drive into its exchange block and phase."""
    recipes = verify_phase_recipes(params.d_hz)
    rel = (seg.phases[1] - seg.phases[0]) % (2.0 * np.pi)
    if abs(rel - recipes["zq"]) < 1e-9 or abs(rel - recipes["zq"] - 2 * np.pi) < 1e-9:
        block = "zq"
        phase = seg.phases[0] - seg.phases[1]
    elif abs(rel - recipes["dq"]) < 1e-9:
        block = "dq"
        phase = seg.phases[0] + seg.phases[1]
    else:
        raise SequenceError(f"matched drive with unsupported relative phase {rel}")
    return block, phase


def execute(state: DensityState, seq: PulseSequence, ctx: ExecutionContext) -> DensityState:
    """Map sequence IR to dynamics calls; pure in (state, seq, ctx)."""
    current = state
    for seg in seq.segments:
        if isinstance(seg, MicrowaveDrive):
            if len(seg.targets) == 2:
                block, phase = _drive_block(seg, ctx.gate_params)
                if seg.phase_mod_hz is not None:
                    # linear phase ramps add coherently on the block phase
                    ramp = sum(2.0 * np.pi * f * seg.duration for f in seg.phase_mod_hz)
                    phase = phase + (ramp if block == "dq" else 0.0)
                current = apply_exchange_gate(current, ctx.gate_params, seg.duration, block, phase)
            else:
                angle = seg.rabi * seg.duration
                current = single_spin_rotation(current, seg.targets[0], angle, seg.phases[0])
        elif isinstance(seg, LaserPulse):
            current = optical_pump(current, seg.efficiency)
        elif isinstance(seg, Delay):
            pass
        elif isinstance(seg, SensingWindow):
            env_key = "double" if len(seg.targets) == 2 else seg.targets[0]
            env = ctx.envelopes.get(env_key)
            current = echo_sense(
                current,
                seg.duration,
                seg.field,
                seg.targets,
                envelope=env,
                pi_fractions=seg.pi_fractions,
            )
        else:
            raise SequenceError(f"unknown segment {seg!r}")
    return current


# ---------------------------------------------------------------------------
# Named protocol operations


def x_polarization(state: DensityState) -> float:
    spec = {lbl: "I" for lbl in state.layout.subsystems}
    spec["Xe"] = "Sz"
    return float(2.0 * state.expectation(build_operator(state.layout, spec)))


def nv_polarization(state: DensityState) -> float:
    spec = {lbl: "I" for lbl in state.layout.subsystems}
    spec["NV"] = "Sz"
    return float(2.0 * state.expectation(build_operator(state.layout, spec)))


def polarization_transfer(
    n_rounds: int,
    pump_efficiency: float,
    params: GateParams,
    initial_x_polarization: float,
    initial_nv_polarization: float = 0.0,
) -> tuple[DensityState, list[float]]:
    """Alternate NV optical pumping with SWAP-type exchange gates.

    Returns the final state and the X polarization after each round
    (index 0 is the initial polarization).
    """
    if n_rounds < 0:
        raise ValueError("round count must be >= 0")
    state = polarized_state(
        TWO_SPIN_LAYOUT,
        {"NV": initial_nv_polarization, "Xe": initial_x_polarization},
    )
    trace = [x_polarization(state)]
    for _ in range(n_rounds):
        state = optical_pump(state, pump_efficiency)
        state = apply_exchange_gate(state, params, params.swap_time, block="zq")
        trace.append(x_polarization(state))
    return state, trace


def prepare_entangled(state: DensityState, params: GateParams, phase: float = 0.0) -> DensityState:
    """Half-exchange entangling gate creating Bell-block coherence."""
    if state.layout != TWO_SPIN_LAYOUT:
        raise LayoutError("prepare_entangled acts on the (NV, Xe) pair")
    return apply_exchange_gate(state, params, params.entangle_time, block="dq", phase=phase)


def disentangle(state: DensityState, params: GateParams, phase: float = 0.0) -> DensityState:
    """Half-exchange gate converting Bell-block coherence back to populations."""
    return apply_exchange_gate(state, params, params.entangle_time, block="dq", phase=phase)


def modulated_disentangle_scan(
    rho_phi: DensityState,
    f_nv_hz: float,
    f_x_hz: float,
    t_grid: np.ndarray,
    params: GateParams,
) -> np.ndarray:
    """NV population signal vs scan time with phase-ramped disentangling gates.

    The pulse phases of the disentangling gate ramp at f_nv and f_x; on
    the double-quantum block they add, so the signal oscillates at the
    sum frequency.
    """
    if f_nv_hz < 0 or f_x_hz < 0:
        raise ValueError("modulation frequencies must be >= 0")
    p0_nv = build_operator(TWO_SPIN_LAYOUT, {"NV": "P0", "Xe": "I"})
    signal = np.empty(len(t_grid))
    for k, t in enumerate(np.asarray(t_grid, dtype=float)):
        phase = 2.0 * np.pi * (f_nv_hz + f_x_hz) * t
        out = disentangle(rho_phi, params, phase=phase)
        signal[k] = float(out.expectation(p0_nv))
    return signal


def dominant_frequency(t_grid: np.ndarray, signal: np.ndarray) -> float:
    """Peak of the discrete spectrum of a uniformly sampled real signal (Hz)."""
    t = np.asarray(t_grid, dtype=float)
    y = np.asarray(signal, dtype=float) - np.mean(signal)
    dt = t[1] - t[0]
    spectrum = np.abs(np.fft.rfft(y))
    freqs = np.fft.rfftfreq(len(y), dt)
    return float(freqs[np.argmax(spectrum)])


def overlap_factor(
    pi_fractions: Sequence[float],
    tau: float,
    field: FieldModel,
) -> float:
    """Overlap between the toggled echo modulation and the sinusoidal field.

    f_hat = (1/tau) * |integral_0^tau s(t) sin(2 pi nu t + phi0) dt| with
    s(t) = +-1 toggled at each pi-pulse time; adaptive quadrature per
    toggling interval.  Phase-matched echo over one period gives 2/pi.
    """
    if tau <= 0:
        raise ValueError("sensing duration must be positive")
    times = sorted(float(f) * tau for f in pi_fractions)
    if any(not 0.0 <= x <= tau for x in times):
        raise ValueError("pi-pulse fractions must lie in [0, 1]")
    edges = [0.0] + times + [tau]
    if field.kind == "constant":
        wave = lambda t: 1.0  # noqa: E731
    else:
        wave = lambda t: np.sin(2.0 * np.pi * field.frequency_hz * t + field.phase_rad)  # noqa: E731
    total = 0.0
    sign = 1.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            val, _ = integrate.quad(wave, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
            total += sign * val
        sign = -sign
    return abs(total) / tau


def echo_sense(
    state: DensityState,
    tau: float,
    field: FieldModel,
    targets: Sequence[str],
    envelope: DecoherenceEnvelope | None = None,
    pi_fractions: Sequence[float] = (0.5,),
    constants=CONSTANTS,
) -> DensityState:
    """Phase accumulation and decoherence over one contiguous sensing window.

    Each participating spin's coherence acquires phi = gamma_e * f_hat *
    tau * b; the Bell block therefore accumulates twice the single-spin
    phase.  The envelope, if given, is applied exactly once for the
    whole window (stretched exponentials do not compose across splits).
    """
    if tau <= 0:
        raise ValueError("sensing duration must be positive")
    f_hat = overlap_factor(pi_fractions, tau, field)
    phi = constants.gamma_e * f_hat * tau * field.amplitude_gauss
    lay = state.layout
    gen = np.zeros((lay.dim, lay.dim), dtype=complex)
    for target in targets:
        spec = {lbl: "I" for lbl in lay.subsystems}
        spec[target] = "Sz"
        gen += build_operator(lay, spec).matrix
    u = expm_hermitian(gen, phi)
    out = DensityState(lay, u @ state.matrix @ u.conj().T)
    if envelope is not None:
        basis = "double" if len(targets) == 2 else targets[0]
        out = apply_envelope(out, envelope, basis, tau)
    return out


def _conditional_phase(phi: float) -> np.ndarray:
    """diag phase +-phi/2 on aligned/anti-aligned (NV, Xe) states."""
    return np.diag(
        [
            np.exp(1.0j * phi / 2.0),
            np.exp(-1.0j * phi / 2.0),
            np.exp(-1.0j * phi / 2.0),
            np.exp(1.0j * phi / 2.0),
        ]
    ).astype(complex)


def _rot(angle: float, axis: str) -> np.ndarray:
    half = angle / 2.0
    if axis == "x":
        return np.array(
            [[np.cos(half), -1.0j * np.sin(half)], [-1.0j * np.sin(half), np.cos(half)]]
        )
    if axis == "y":
        return np.array([[np.cos(half), -np.sin(half)], [np.sin(half), np.cos(half)]], dtype=complex)
    raise ValueError(axis)


def _mapping_unitary() -> np.ndarray:
    """pi/2 -- conditional phase -- pi/2 block mapping X population onto NV."""
    rx = np.kron(_rot(np.pi / 2.0, "x"), np.eye(2))
    ry = np.kron(_rot(np.pi / 2.0, "y"), np.eye(2))
    return ry @ _conditional_phase(np.pi / 2.0) @ rx


def _project_nv(state: DensityState) -> DensityState:
    """Dephase NV coherences (projective measurement, outcome unrecorded)."""
    mask = np.array([[1.0, 1.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0]])
    return DensityState(state.layout, state.matrix * mask)


def recoupled_readout(
    state: DensityState,
    params: GateParams,
    pump_efficiency: float = 1.0,
) -> tuple[DensityState, float]:
    """Map the X population difference onto the NV and read it out.

    A coupling-driven conditional-phase echo block of duration 1/(2d),
    sandwiched by NV pi/2 pulses, rotates the NV conditionally on the X
    state.  Returns the post-measurement state (NV projected, repumped;
    X populations preserved up to the gate error) and the NV signal
    (population of NV |0>).
    """
    if state.layout != TWO_SPIN_LAYOUT:
        raise LayoutError("recoupled readout acts on the (NV, Xe) pair")
    u = _mapping_unitary()
    mapped = DensityState(state.layout, u @ state.matrix @ u.conj().T)
    mapped = _depolarize(mapped, params.epsilon)
    p0 = build_operator(TWO_SPIN_LAYOUT, {"NV": "P0", "Xe": "I"})
    signal = float(mapped.expectation(p0))
    out = _project_nv(mapped)
    out = optical_pump(out, pump_efficiency)
    return out, signal


def repetitive_readout(
    state: DensityState,
    m: int,
    params: GateParams,
    readout_model=None,
    pump_efficiency: float = 1.0,
) -> list[float]:
    """Amplitude ladder a_0..a_m from one direct plus m recoupled readouts.

    The first readout is free: the disentangling gate has already mapped
    the field-dependent phase onto both spin populations, so the NV is
    read directly.  Each later readout costs one mapping gate.  With a
    ReadoutModel the amplitudes are returned in mean-count units
    (n0 * contrast * population amplitude); otherwise dimensionless.
    """
    if m < 0:
        raise ValueError("repetition count must be >= 0")
    scale = 1.0 if readout_model is None else readout_model.n0 * readout_model.contrast
    sz_nv = build_operator(TWO_SPIN_LAYOUT, {"NV": "Sz", "Xe": "I"})
    amplitudes = [abs(2.0 * float(state.expectation(sz_nv)))]
    current = optical_pump(_project_nv(state), pump_efficiency)
    for _ in range(m):
        u = _mapping_unitary()
        mapped = DensityState(current.layout, u @ current.matrix @ u.conj().T)
        mapped = _depolarize(mapped, params.epsilon)
        amplitudes.append(abs(2.0 * float(mapped.expectation(sz_nv))))
        current = optical_pump(_project_nv(mapped), pump_efficiency)
    return [a * scale for a in amplitudes]


def calibrate_gate_error(
    p1_target: float,
    pump_efficiency: float,
    d_hz: float,
    t1rho_s: float,
    initial_x_polarization: float,
) -> GateParams:
    """Solve for the depolarizing weight reproducing a one-round transfer.

    The (pump efficiency, gate error) pair is not identifiable from a
    single transfer point, so the pump efficiency is pinned and epsilon
    is found by root-bracketing on the simulated one-round X
    polarization.
    """
    from scipy.optimize import brentq

    def residual(eps: float) -> float:
        params = GateParams(d_hz=d_hz, epsilon=eps, t1rho_s=t1rho_s)
        _, trace = polarization_transfer(1, pump_efficiency, params, initial_x_polarization)
        return trace[1] - p1_target

    eps = brentq(residual, 0.0, 0.5, xtol=1e-12)
    return GateParams(d_hz=d_hz, epsilon=float(eps), t1rho_s=t1rho_s)


def nuclear_contrast(
    signal: np.ndarray | float,
    factor: NuclearFactor,
    renormalize: bool = False,
) -> tuple[np.ndarray | float, bool]:
    """Scale a two-spin signal by the nuclear-spectator contrast factor.

    With one addressed hyperfine transition the amplitude scales by
    q + (1-q)/2; driving both transitions leaves it unchanged.  When
    `renormalize` is set (display convention: baseline-subtracted signal
    multiplied by two), the returned flag records that the scaling was
    compensated.
    """
    scale = factor.amplitude_factor
    applied_renorm = False
    if renormalize and factor.transitions == 1:
        scale *= 2.0
        applied_renorm = True
    return signal * scale if not isinstance(signal, (int, float)) else float(signal) * scale, applied_renorm
