"""Curve fitting, sensitivity metrics, and the gain parameter sweep.

The fitter is a damped least-squares engine on the normal equations
(Levenberg-Marquardt with lambda-scaled diagonal augmentation and a
Nielsen gain-ratio update).  Sinusoid and stretched-exponential models
supply analytic Jacobians; the stretched exponent p is kept in (0.5, 3)
by a sigmoid reparameterization and the rate by a log transform.

Sensitivity accounting follows the slope estimator: the minimum
detectable field is the signal noise divided by |amplitude * rate|, so
with state-independent noise the two-spin gain reduces to an
amplitude-slope ratio, bounded by 2.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .dynamics import DecoherenceEnvelope
from .protocols import NuclearFactor
from .readout import snr_gain
from .spinsys import CONSTANTS

F_HAT_ECHO = 2.0 / np.pi


class FitError(RuntimeError):
    """Raised when a fit cannot be set up (not for mere non-convergence)."""


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class MagnetometryCurve:
    """Signal vs field amplitude for an n-spin phase estimator."""

    b_gauss: np.ndarray
    signal: np.ndarray
    sigma: np.ndarray
    tau_s: float
    n_spins: int

    def __post_init__(self) -> None:
        b = np.asarray(self.b_gauss, dtype=float)
        s = np.asarray(self.signal, dtype=float)
        e = np.asarray(self.sigma, dtype=float)
        if not (len(b) == len(s) == len(e)):
            raise ValueError("field, signal, and sigma grids must have equal length")
        if np.any(e <= 0):
            raise ValueError("per-point sigma must be positive")
        object.__setattr__(self, "b_gauss", b)
        object.__setattr__(self, "signal", s)
        object.__setattr__(self, "sigma", e)


@dataclass(frozen=True)
class FitResult:
    parameters: dict[str, float]
    covariance: np.ndarray
    residual_norm: float
    n_iter: int
    converged: bool
    message: str = ""

    def stderr(self, name: str) -> float:
        idx = list(self.parameters).index(name)
        return float(np.sqrt(max(self.covariance[idx, idx], 0.0)))


@dataclass(frozen=True)
class TimingBudget:
    """Per-shot dead times around one sensing window of duration tau."""

    tau_s: float
    tau_nv_s: float = 5.7e-6
    tau_phi_s: float = 21.0e-6
    tau_rr_s: float = 6.1e-6
    repetitions: int = 1

    def __post_init__(self) -> None:
        if min(self.tau_s, self.tau_nv_s, self.tau_phi_s, self.tau_rr_s) < 0:
            raise ValueError("times must be >= 0")
        if self.repetitions < 0:
            raise ValueError("repetition count must be >= 0")

    @property
    def shot_time(self) -> float:
        extra = max(self.repetitions - 1, 0) * self.tau_rr_s
        return self.tau_s + self.tau_nv_s + self.tau_phi_s + extra


@dataclass(frozen=True)
class SensitivityReport:
    delta_b_gauss: float
    eta_gauss_rthz: float
    g: float
    h: float
    g_tilde: float
    snr_gain: float
    repetitions: int
    assumptions: dict

    def to_json(self) -> str:
        payload = {
            "delta_b_gauss": self.delta_b_gauss,
            "eta_gauss_sqrt_s": self.eta_gauss_rthz,
            "gain_performance": self.g,
            "overhead_factor": self.h,
            "gain_sensitivity": self.g_tilde,
            "snr_gain": self.snr_gain,
            "repetitions": self.repetitions,
            "assumptions": self.assumptions,
        }
        return json.dumps(payload, sort_keys=True, indent=2)


@dataclass(frozen=True)
class SweepGrid:
    """Max gain-in-sensitivity map over coupling and decoherence ratio."""

    d_axis_hz: np.ndarray
    ratio_axis: np.ndarray
    values: np.ndarray  # shape (len(ratio_axis), len(d_axis))
    fixed_inputs: dict

    def __post_init__(self) -> None:
        d = np.asarray(self.d_axis_hz, dtype=float)
        r = np.asarray(self.ratio_axis, dtype=float)
        if np.any(np.diff(d) <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("sweep axes must be strictly increasing")
        if self.values.shape != (len(r), len(d)):
            raise ValueError("value grid shape must be (ratios, couplings)")
        object.__setattr__(self, "d_axis_hz", d)
        object.__setattr__(self, "ratio_axis", r)

    def cell(self, d_hz: float, ratio: float) -> float:
        i = int(np.argmin(np.abs(self.ratio_axis - ratio)))
        j = int(np.argmin(np.abs(self.d_axis_hz - d_hz)))
        return float(self.values[i, j])

    def to_json(self) -> str:
        payload = {
            "d_axis_hz": self.d_axis_hz.tolist(),
            "ratio_axis": self.ratio_axis.tolist(),
            "max_gain_sensitivity": self.values.tolist(),
            "fixed_inputs": self.fixed_inputs,
        }
        return json.dumps(payload, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# Damped least-squares engine


def _lm_minimize(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    max_iter: int = 200,
    gtol: float = 1e-12,
    xtol: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray, float, int, bool, str]:
    """Levenberg-Marquardt with Nielsen's gain-ratio damping update.

    Returns (x, covariance, residual_norm, iterations, converged, message).
    The covariance is (J^T J)^-1 at the optimum; residuals are assumed
    already noise-weighted.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = residual(x)
    jac = jacobian(x)
    a = jac.T @ jac
    grad = jac.T @ r
    cost = 0.5 * float(r @ r)
    lam = 1e-3  # dimensionless: damping scales with diag(J^T J)
    nu = 2.0
    converged = False
    message = "max iterations reached"
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(grad)) < gtol:
            converged, message = True, "gradient tolerance reached"
            break
        aug = a + lam * np.diag(np.clip(np.diag(a), 1e-300, None))
        try:
            step = np.linalg.solve(aug, -grad)
        except np.linalg.LinAlgError:
            converged, message = False, "rank-deficient normal equations"
            break
        if np.linalg.norm(step) < xtol * (np.linalg.norm(x) + xtol):
            converged, message = True, "step tolerance reached"
            break
        x_new = x + step
        r_new = residual(x_new)
        cost_new = 0.5 * float(r_new @ r_new)
        predicted = 0.5 * float(step @ (lam * np.diag(a) * step - grad))
        rho = (cost - cost_new) / predicted if predicted > 0 else -1.0
        if rho > 0:
            x, r, cost = x_new, r_new, cost_new
            jac = jacobian(x)
            a = jac.T @ jac
            grad = jac.T @ r
            lam *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
        else:
            lam *= nu
            nu *= 2.0
    try:
        cov = np.linalg.inv(a)
    except np.linalg.LinAlgError:
        cov = np.full_like(a, np.nan)
        converged = False
        message = "singular Jacobian at optimum"
    return x, cov, float(np.sqrt(2.0 * cost)), it, converged, message


def check_jacobian(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    rel_tol: float = 1e-5,
) -> float:
    """Max relative deviation of the analytic Jacobian from central differences."""
    x = np.asarray(x, dtype=float)
    jac = jacobian(x)
    num = np.empty_like(jac)
    for k in range(len(x)):
        hk = 1e-6 * max(abs(x[k]), 1e-3)
        xp, xm = x.copy(), x.copy()
        xp[k] += hk
        xm[k] -= hk
        num[:, k] = (residual(xp) - residual(xm)) / (2.0 * hk)
    scale = max(np.max(np.abs(jac)), 1e-12)
    return float(np.max(np.abs(jac - num)) / scale)


# ---------------------------------------------------------------------------
# Model fits


def fit_sinusoid(curve: MagnetometryCurve) -> FitResult:
    """Fit S(b) = alpha * sin(nu * b + phi) + c by damped least squares.

    nu is the phase-per-gauss precession rate; initialization comes from
    the discrete spectrum of the detrended signal.
    """
    b, y, sig = curve.b_gauss, curve.signal, curve.sigma
    if len(b) < 6:
        raise FitError("need at least 6 points for a sinusoid fit")
    detrended = y - np.mean(y)
    # zero-padded discrete spectrum on the (assumed near-uniform) field grid
    db = np.mean(np.diff(b))
    n_pad = 32 * len(b)
    spectrum = np.abs(np.fft.rfft(detrended, n=n_pad))
    freqs = np.fft.rfftfreq(n_pad, db)
    k = int(np.argmax(spectrum[1:])) + 1
    nu0 = 2.0 * np.pi * freqs[k]
    if nu0 * (b[-1] - b[0]) < np.pi:
        raise FitError("data spans less than half a period")

    def projections(nu: float) -> tuple[float, float]:
        cs = float(np.sum(detrended * np.cos(nu * b)))
        sn = float(np.sum(detrended * np.sin(nu * b)))
        return np.arctan2(cs, sn), np.hypot(cs, sn)

    phi0, _ = projections(nu0)
    alpha0 = np.sqrt(2.0) * float(np.std(detrended))
    x0 = np.array([alpha0, nu0, phi0, float(np.mean(y))])

    def residual(x: np.ndarray) -> np.ndarray:
        alpha, nu, phi, c = x
        return (alpha * np.sin(nu * b + phi) + c - y) / sig

    def jacobian(x: np.ndarray) -> np.ndarray:
        alpha, nu, phi, c = x
        arg = nu * b + phi
        jac = np.empty((len(b), 4))
        jac[:, 0] = np.sin(arg) / sig
        jac[:, 1] = alpha * b * np.cos(arg) / sig
        jac[:, 2] = alpha * np.cos(arg) / sig
        jac[:, 3] = 1.0 / sig
        return jac

    x, cov, rnorm, it, ok, msg = _lm_minimize(residual, jacobian, x0)
    alpha, nu, phi, c = x
    if alpha < 0:  # canonical sign convention
        alpha, phi = -alpha, phi + np.pi
    if nu < 0:
        nu, phi = -nu, np.pi - phi
    phi = (phi + np.pi) % (2.0 * np.pi) - np.pi
    if abs(alpha) < 1e-9 * max(np.max(np.abs(y)), 1.0):
        ok, msg = False, "degenerate fit: vanishing amplitude"
    params = {"amplitude": float(alpha), "rate_rad_per_gauss": float(nu), "phase_rad": float(phi), "offset": float(c)}
    return FitResult(params, cov, rnorm, it, ok, msg)


def _p_transform(v: float | np.ndarray) -> float | np.ndarray:
    return 0.5 + 2.5 / (1.0 + np.exp(-v))


def _p_inverse(p: float) -> float:
    if not 0.5 < p < 3.0:
        raise FitError("stretch exponent must start inside (0.5, 3)")
    frac = (p - 0.5) / 2.5
    return float(np.log(frac / (1.0 - frac)))


def fit_stretched_exp(
    times: np.ndarray,
    signals: np.ndarray,
    sigma: np.ndarray | float = 1.0,
    p_fixed: float | None = None,
) -> FitResult:
    """Fit S(t) = alpha0 * exp(-(gamma2 * t)^p).

    gamma2 is log-transformed and p sigmoid-bounded to (0.5, 3) inside
    the optimizer; reported parameters and covariance are in physical
    units (delta method for the covariance).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(signals, dtype=float)
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), y.shape).copy()
    if len(t) < 5:
        raise FitError("need at least 5 points for a stretched-exponential fit")
    if np.any(t <= 0):
        raise FitError("times must be positive")
    if np.any(sig <= 0):
        raise FitError("sigma must be positive")

    # log-log linearization for the starting point
    a0_init = max(float(np.max(y)) * 1.02, 1e-6)
    mask = (y > 1e-3 * a0_init) & (y < a0_init)
    z = np.log(-np.log(np.clip(y[mask] / a0_init, 1e-12, 1.0 - 1e-12)))
    slope, intercept = np.polyfit(np.log(t[mask]), z, 1)
    p_init = float(np.clip(slope, 0.55, 2.95))
    g_init = float(np.exp(intercept / p_init))

    fixed_p = p_fixed is not None

    def unpack(x: np.ndarray) -> tuple[float, float, float]:
        a0, u = x[0], x[1]
        p = p_fixed if fixed_p else _p_transform(x[2])
        return a0, float(np.exp(u)), float(p)

    def residual(x: np.ndarray) -> np.ndarray:
        a0, g, p = unpack(x)
        return (a0 * np.exp(-((g * t) ** p)) - y) / sig

    def jacobian(x: np.ndarray) -> np.ndarray:
        a0, g, p = unpack(x)
        w = (g * t) ** p
        core = np.exp(-w)
        jac = np.empty((len(t), len(x)))
        jac[:, 0] = core / sig
        jac[:, 1] = a0 * core * (-p * w) / sig  # d/du with gamma = e^u
        if not fixed_p:
            s_v = 1.0 / (1.0 + np.exp(-x[2]))
            dp_dv = 2.5 * s_v * (1.0 - s_v)
            jac[:, 2] = a0 * core * (-w * np.log(g * t)) * dp_dv / sig
        return jac

    x0 = [a0_init, np.log(g_init)]
    if not fixed_p:
        x0.append(_p_inverse(p_init))
    x, cov_t, rnorm, it, ok, msg = _lm_minimize(residual, jacobian, np.asarray(x0))
    a0, g, p = unpack(x)
    if abs(a0) < 1e-9:
        ok, msg = False, "degenerate fit: vanishing amplitude"
    # delta-method transform of the covariance to physical parameters
    n_par = len(x)
    tmat = np.eye(n_par)
    tmat[1, 1] = g  # dgamma/du
    if not fixed_p:
        s_v = 1.0 / (1.0 + np.exp(-x[2]))
        tmat[2, 2] = 2.5 * s_v * (1.0 - s_v)
    cov = tmat @ cov_t @ tmat.T
    params = {"alpha0": float(a0), "gamma2_hz": float(g), "p": float(p)}
    if fixed_p:
        cov = np.pad(cov, ((0, 1), (0, 1)))
    return FitResult(params, cov, rnorm, it, ok, msg)


# ---------------------------------------------------------------------------
# Sensitivity accounting


def min_field(alpha: float, nu_slope: float, sigma_s: float) -> float:
    """Smallest resolvable field: sigma_S / |alpha * nu_slope|."""
    slope = alpha * nu_slope
    if slope == 0:
        raise ValueError("zero signal slope; field not resolvable")
    return abs(sigma_s / slope)


def precession_rate(n_spins: int, tau_s: float, f_hat: float = F_HAT_ECHO) -> float:
    """Signal phase per gauss: n * gamma_e * f_hat * tau (rad/G)."""
    return n_spins * CONSTANTS.gamma_e * f_hat * tau_s


def gain_performance(
    tau_s: float,
    envelope_nv: DecoherenceEnvelope,
    envelope_two: DecoherenceEnvelope,
    factor: NuclearFactor,
) -> float:
    """Fixed-shot-number gain: 2 * amplitude ratio * nuclear factor, <= 2."""
    if tau_s <= 0:
        raise ValueError("sensing time must be positive")
    ratio = envelope_two.amplitude(tau_s) / envelope_nv.amplitude(tau_s)
    return 2.0 * ratio * factor.amplitude_factor


def overhead_factor(budget: TimingBudget) -> float:
    """Dead-time penalty h = sqrt(sensing+prep time over full shot time)."""
    useful = budget.tau_s + budget.tau_nv_s
    return float(np.sqrt(useful / budget.shot_time))


def gain_sensitivity(
    tau_s: float,
    envelope_nv: DecoherenceEnvelope,
    envelope_two: DecoherenceEnvelope,
    factor: NuclearFactor,
    budget: TimingBudget,
    ladder: Sequence[float],
    m: int,
    sigma_s: float = 0.05,
) -> SensitivityReport:
    """Fixed-total-time gain g~ = g * SNR-gain(m) * h(tau, m) with report."""
    ladder = np.asarray(ladder, dtype=float)
    if m < 0 or m >= len(ladder):
        raise ValueError("repetition count outside the ladder range")
    g = gain_performance(tau_s, envelope_nv, envelope_two, factor)
    budget_m = TimingBudget(
        tau_s=tau_s,
        tau_nv_s=budget.tau_nv_s,
        tau_phi_s=budget.tau_phi_s,
        tau_rr_s=budget.tau_rr_s,
        repetitions=m,
    )
    h = overhead_factor(budget_m)
    snr = float(snr_gain(ladder[: m + 1])[-1])
    alpha_two = envelope_two.amplitude(tau_s) * factor.amplitude_factor
    db = min_field(alpha_two, precession_rate(2, tau_s), sigma_s) / snr
    eta = db * np.sqrt(budget_m.shot_time)
    return SensitivityReport(
        delta_b_gauss=float(db),
        eta_gauss_rthz=float(eta),
        g=float(g),
        h=float(h),
        g_tilde=float(g * snr * h),
        snr_gain=snr,
        repetitions=m,
        assumptions={
            "n_spins": 2,
            "nuclear_polarization": factor.polarization,
            "transitions_addressed": factor.transitions,
            "sigma_s": sigma_s,
            "f_hat": F_HAT_ECHO,
        },
    )


def snr_bound_check(report: SensitivityReport) -> tuple[bool, list[str]]:
    """Verify g <= n and g * SNR-gain <= n * SNR-gain; list any violations."""
    n = int(report.assumptions.get("n_spins", 2))
    issues: list[str] = []
    if report.g > n + 1e-12:
        issues.append(f"gain in performance {report.g:.4f} exceeds the n-spin bound {n}")
    g_rr = report.g * report.snr_gain
    if g_rr > n * report.snr_gain + 1e-12:
        issues.append(
            f"repetitive-readout gain {g_rr:.4f} exceeds n*SNR(m) = {n * report.snr_gain:.4f}"
        )
    if not 0.0 < report.h <= 1.0:
        issues.append(f"overhead factor {report.h:.4f} outside (0, 1]")
    return (not issues, issues)


# ---------------------------------------------------------------------------
# Parameter-space sweep


def _max_gain_cell(
    d_hz: float,
    ratio: float,
    tau_grid: np.ndarray,
    snr_ladder: np.ndarray,
    alpha0_nv: float,
    alpha0_two: float,
    gamma2_nv_hz: float,
    p: float,
    tau_nv_s: float,
    tau_phi_exp_s: float,
    d_exp_hz: float,
    tau_rr_s: float,
    use_rr: bool,
) -> float:
    gamma2_two = gamma2_nv_hz * (1.0 + ratio)
    amp_ratio = (alpha0_two / alpha0_nv) * np.exp(
        (gamma2_nv_hz * tau_grid) ** p - (gamma2_two * tau_grid) ** p
    )
    g = 2.0 * amp_ratio  # q = 1: nuclear factor unity
    tau_phi = tau_phi_exp_s * (d_exp_hz / d_hz)
    useful = tau_grid + tau_nv_s
    if not use_rr:
        h = np.sqrt(useful / (useful + tau_phi))
        return float(np.max(g * h))
    m = np.arange(len(snr_ladder))
    extra = np.maximum(m - 1, 0)[:, None] * tau_rr_s
    h = np.sqrt(useful[None, :] / (useful[None, :] + tau_phi + extra))
    snr = np.sqrt(np.cumsum(snr_ladder**2) / snr_ladder[0] ** 2)
    return float(np.max(snr[:, None] * g[None, :] * h))


def sweep_gain_map(
    d_axis_hz: Sequence[float],
    ratio_axis: Sequence[float],
    use_repetitive_readout: bool,
    alpha0_nv: float = 0.96,
    alpha0_two: float = 0.78,
    gamma2_nv_hz: float = 22.0e3,
    p: float = 1.6,
    tau_nv_s: float = 5.7e-6,
    tau_phi_exp_s: float = 21.0e-6,
    d_exp_hz: float = 58.0e3,
    tau_rr_s: float = 6.1e-6,
    ladder_ratio: float | None = None,
    m_max: int = 30,
    tau_points: int = 600,
) -> SweepGrid:
    """Max gain-in-sensitivity over (tau, m) per (coupling, ratio) cell.

    The two-spin preparation time scales inversely with the coupling; the
    two-spin decoherence rate is additive, Gamma2 = Gamma2_NV * (1 +
    ratio); nuclear polarization q = 1 throughout.  The repetitive-
    readout ladder is geometric with the given decay ratio.
    """
    from .readout import geometric_ratio_for_gain

    d_axis = np.asarray(d_axis_hz, dtype=float)
    ratios = np.asarray(ratio_axis, dtype=float)
    if ladder_ratio is None:
        ladder_ratio = geometric_ratio_for_gain(1.91, 9)
    ladder = ladder_ratio ** np.arange(m_max + 1)
    tau_grid = np.geomspace(1e-6, 5.0 / gamma2_nv_hz, tau_points)
    values = np.empty((len(ratios), len(d_axis)))
    for i, ratio in enumerate(ratios):
        for j, d in enumerate(d_axis):
            values[i, j] = _max_gain_cell(
                d, ratio, tau_grid, ladder, alpha0_nv, alpha0_two,
                gamma2_nv_hz, p, tau_nv_s, tau_phi_exp_s, d_exp_hz, tau_rr_s,
                use_rr=use_repetitive_readout,
            )
    return SweepGrid(
        d_axis_hz=d_axis,
        ratio_axis=ratios,
        values=values,
        fixed_inputs={
            "alpha0_nv": alpha0_nv,
            "alpha0_two_spin": alpha0_two,
            "gamma2_nv_hz": gamma2_nv_hz,
            "p": p,
            "tau_nv_s": tau_nv_s,
            "tau_phi_at_d_exp_s": tau_phi_exp_s,
            "d_exp_hz": d_exp_hz,
            "tau_rr_s": tau_rr_s,
            "nuclear_polarization": 1.0,
            "repetitive_readout": use_repetitive_readout,
            "ladder_ratio": ladder_ratio,
            "m_max": m_max,
        },
    )


def unity_crossing(x: np.ndarray, y: np.ndarray) -> float:
    """First x where y crosses 1 from above, by linear interpolation."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    below = np.nonzero(y < 1.0)[0]
    if len(below) == 0 or below[0] == 0:
        raise ValueError("curve does not cross unity from above on this grid")
    k = below[0]
    x0, x1, y0, y1 = x[k - 1], x[k], y[k - 1], y[k]
    return float(x0 + (1.0 - y0) * (x1 - x0) / (y1 - y0))


def required_amplitude_ratio_scale(
    envelope_nv: DecoherenceEnvelope,
    envelope_two: DecoherenceEnvelope,
    factor: NuclearFactor,
    budget: TimingBudget,
    tau_grid: np.ndarray | None = None,
) -> float:
    """Scale on the two-spin amplitude needed for max-over-tau g~ = 1 (m = 1).

    Reported rather than asserted: quantifies how much better the
    coherent-amplitude ratio would have to be for a net sensitivity gain
    without repetitive readout.
    """
    if tau_grid is None:
        tau_grid = np.geomspace(1e-6, 5.0 / envelope_nv.gamma2_hz, 2000)
    g = np.array([gain_performance(t, envelope_nv, envelope_two, factor) for t in tau_grid])
    h = np.array(
        [
            overhead_factor(
                TimingBudget(t, budget.tau_nv_s, budget.tau_phi_s, budget.tau_rr_s, repetitions=1)
            )
            for t in tau_grid
        ]
    )
    peak = float(np.max(g * h))
    if peak <= 0:
        raise ValueError("gain profile is degenerate")
    return 1.0 / peak


# ---------------------------------------------------------------------------
# Export helpers


def write_curve_csv(path: str, columns: Mapping[str, Sequence[float]]) -> None:
    """CSV with `name[unit]` headers, '.' decimals, LF endings, %.12g floats."""
    names = list(columns)
    arrays = [np.asarray(columns[name], dtype=float) for name in names]
    if len({len(a) for a in arrays}) != 1:
        raise ValueError("all CSV columns must have equal length")
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*arrays):
            writer.writerow([f"{v:.12g}" for v in row])


def write_grid_csv(path: str, grid: SweepGrid) -> None:
    """One row per (coupling, ratio) cell."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["d[Hz]", "gamma2_ratio[1]", "max_gain_sensitivity[1]"])
        for i, ratio in enumerate(grid.ratio_axis):
            for j, d in enumerate(grid.d_axis_hz):
                writer.writerow([f"{d:.12g}", f"{ratio:.12g}", f"{grid.values[i, j]:.12g}"])
