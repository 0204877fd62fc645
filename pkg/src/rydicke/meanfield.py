"""Semiclassical dynamics: equations of motion, fixed points, stability,
critical couplings and the phase-diagram scanner.

The equations of motion follow from factorizing photon-atom and atom-atom
products over distinct sites.  Their linear stability at the two poles
reproduces the closed-form critical couplings exactly; that equivalence is
enforced by the acceptance suite and certifies the reconstruction.

State layout for all Jacobian work is the real 5-vector
(Re alpha, Im alpha, sx, sy, sz).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import root as scipy_root

from .params import ModelParams
from .series import ScanResult, TimeSeries, format_value

STABILITY_TOL = 1e-9
THRESHOLD_TIE_TOL = 1e-12

# Oscillation detector: last 20% of a T = 1e3 run, peak-to-peak of s_z above
# 1e-3 N, with less than 5% amplitude loss across the window.
OSC_T_FINAL = 1.0e3
OSC_WINDOW_FRACTION = 0.2
OSC_AMPLITUDE_FLOOR = 1.0e-3
OSC_DECAY_LIMIT = 0.05

DEFAULT_TILT = 1.0e-2


class IntegrationError(RuntimeError):
    pass


class Stability(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


class Branch(str, Enum):
    G_POLARIZED = "g_polarized"
    SD_POLARIZED = "sd_polarized"
    SUPERRADIANT_PLUS = "superradiant_plus"
    SUPERRADIANT_MINUS = "superradiant_minus"
    # alpha = 0 transverse (spin along +-y) fixed points at Delta_MF = 0;
    # not part of the figure branches but needed for a complete stability
    # census in the interacting regime.
    TRANSVERSE_PLUS = "transverse_plus"
    TRANSVERSE_MINUS = "transverse_minus"


@dataclass
class MeanFieldState:
    """Semiclassical phase-space point (alpha, <S_x>, <S_y>, <S_z>)."""

    alpha: complex
    sx: float
    sy: float
    sz: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.alpha.real, self.alpha.imag, self.sx, self.sy, self.sz]
        )

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "MeanFieldState":
        return cls(complex(y[0], y[1]), float(y[2]), float(y[3]), float(y[4]))

    def spin_length(self) -> float:
        return math.sqrt(self.sx**2 + self.sy**2 + self.sz**2)


@dataclass
class FixedPoint:
    state: MeanFieldState
    stability: Stability
    eigenvalues: np.ndarray
    branch: Branch

    @property
    def is_stable(self) -> bool:
        return self.stability is Stability.STABLE


def pole_state(params: ModelParams, pole: str) -> MeanFieldState:
    s = 0.5 * params.n_atoms
    if pole == "g":
        return MeanFieldState(0j, 0.0, 0.0, -s)
    if pole == "sd":
        return MeanFieldState(0j, 0.0, 0.0, +s)
    raise ValueError("pole must be 'g' or 'sd'")


def tilted_pole(params: ModelParams, pole: str, tilt: float = DEFAULT_TILT) -> MeanFieldState:
    """Pole perturbed by a polar tilt (the poles themselves never move)."""
    s = 0.5 * params.n_atoms
    sign = -1.0 if pole == "g" else 1.0
    return MeanFieldState(0j, s * math.sin(tilt), 0.0, sign * s * math.cos(tilt))


# ---------------------------------------------------------------------------
# Equations of motion
# ---------------------------------------------------------------------------

def delta_mf(sz: float, params: ModelParams) -> float:
    """Interaction-renormalized detuning omega_a + V (1/2 + sz/N)."""
    return params.omega_a + params.v_int * (0.5 + sz / params.n_atoms)


def _rhs(y: np.ndarray, params: ModelParams) -> np.ndarray:
    x, xi, sx, sy, sz = y
    c = 2.0 * params.lam / math.sqrt(params.n_atoms)
    dmf = delta_mf(sz, params)
    return np.array(
        [
            -params.kappa * x + params.omega_c * xi,
            -params.omega_c * x - params.kappa * xi - c * sx,
            -dmf * sy,
            dmf * sx - 2.0 * c * x * sz,
            2.0 * c * x * sy,
        ]
    )


def mf_rhs(state: MeanFieldState, params: ModelParams) -> MeanFieldState:
    """Time derivative of the mean-field state.

    d alpha/dt = -(kappa + i omega_c) alpha - i (2 lam/sqrt N) sx
    d sx/dt    = -Delta_MF(sz) sy
    d sy/dt    =  Delta_MF(sz) sx - (2 lam/sqrt N)(alpha + alpha*) sz
    d sz/dt    =  (2 lam/sqrt N)(alpha + alpha*) sy
    """
    d = _rhs(state.as_vector(), params)
    return MeanFieldState.from_vector(d)


def jacobian(state: MeanFieldState | np.ndarray, params: ModelParams) -> np.ndarray:
    """5x5 real Jacobian of the flow at the given point."""
    y = state.as_vector() if isinstance(state, MeanFieldState) else np.asarray(state)
    x, _, sx, sy, sz = y
    c = 2.0 * params.lam / math.sqrt(params.n_atoms)
    dmf = delta_mf(sz, params)
    dd = params.v_int / params.n_atoms  # d Delta_MF / d sz
    jac = np.zeros((5, 5))
    jac[0] = [-params.kappa, params.omega_c, 0.0, 0.0, 0.0]
    jac[1] = [-params.omega_c, -params.kappa, -c, 0.0, 0.0]
    jac[2] = [0.0, 0.0, 0.0, -dmf, -dd * sy]
    jac[3] = [-2.0 * c * sz, 0.0, dmf, 0.0, dd * sx - 2.0 * c * x]
    jac[4] = [2.0 * c * sy, 0.0, 0.0, 2.0 * c * x, 0.0]
    return jac


def integrate_mf(
    state0: MeanFieldState,
    params: ModelParams,
    t_span: tuple[float, float],
    rel_tol: float = 1e-10,
    t_eval: np.ndarray | None = None,
    n_out: int = 2001,
) -> TimeSeries:
    """Adaptive integration of the mean-field flow with dense output.

    The relative spin-length drift per unit time is recorded in
    ``meta['spin_drift_per_time']`` and must stay below the integrator
    tolerance budget (1e-6 per unit time).
    """
    if not 1e-12 <= rel_tol <= 1e-4:
        raise ValueError("rel_tol must lie in [1e-12, 1e-4]")
    if t_eval is None:
        t_eval = np.linspace(t_span[0], t_span[1], n_out)
    sol = solve_ivp(
        lambda t, y: _rhs(y, params),
        t_span,
        state0.as_vector(),
        method="DOP853",
        rtol=rel_tol,
        atol=rel_tol * 1e-2,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise IntegrationError(
            f"mean-field integration failed at t={sol.t[-1] if sol.t.size else t_span[0]}: "
            f"{sol.message}"
        )
    length = np.sqrt(sol.y[2] ** 2 + sol.y[3] ** 2 + sol.y[4] ** 2)
    target = state0.spin_length()
    elapsed = max(t_span[1] - t_span[0], np.finfo(float).eps)
    drift = float(np.max(np.abs(length - target)) / max(target, 1.0) / elapsed)
    return TimeSeries(
        sol.t,
        {
            "re_alpha": sol.y[0],
            "im_alpha": sol.y[1],
            "sx": sol.y[2],
            "sy": sol.y[3],
            "sz": sol.y[4],
        },
        meta={"params": params.to_dict(), "spin_drift_per_time": drift},
    )


# ---------------------------------------------------------------------------
# Critical couplings and stability criterion
# ---------------------------------------------------------------------------

def stability_criterion(sz: float, params: ModelParams) -> float:
    """lambda_c^2(sz) = -(sz / (N/2)) (kappa^2 + omega_c^2)/(4 omega_c) Delta_MF(sz).

    Positive values are physical thresholds; negative values signal that the
    corresponding pole has no instability threshold at that sz.
    """
    if params.omega_c == 0.0:
        raise ZeroDivisionError("stability criterion singular at omega_c = 0")
    prefactor = (params.kappa**2 + params.omega_c**2) / (4.0 * params.omega_c)
    return -(sz / (0.5 * params.n_atoms)) * prefactor * delta_mf(sz, params)


@dataclass(frozen=True)
class CriticalCouplings:
    lambda_down: float
    lambda_up: float | None

    def coincide(self, tol: float = 1e-14) -> bool:
        return self.lambda_up is not None and abs(self.lambda_up - self.lambda_down) < tol


def critical_couplings(params: ModelParams) -> CriticalCouplings:
    """Closed-form thresholds of the two poles.

    lambda_down^2 = omega_a (kappa^2 + omega_c^2) / (4 omega_c) is
    V-independent; lambda_up^2 = -(omega_a + V)(kappa^2 + omega_c^2)/(4 omega_c)
    exists only for omega_a + V < 0.
    """
    if params.omega_c == 0.0:
        raise ZeroDivisionError("critical couplings singular at omega_c = 0")
    prefactor = (params.kappa**2 + params.omega_c**2) / (4.0 * params.omega_c)
    lower = params.omega_a * prefactor
    if lower < 0:
        raise ValueError("lambda_down is not real for omega_c * omega_a < 0")
    lam_down = math.sqrt(lower)
    lam_up = None
    if params.omega_a + params.v_int < 0:
        lam_up = math.sqrt(-(params.omega_a + params.v_int) * prefactor)
    return CriticalCouplings(lam_down, lam_up)


def classify_eigenvalues(
    eigs: np.ndarray, tol: float = STABILITY_TOL, drop_conserved: bool = True
) -> Stability:
    """Stability verdict from Jacobian eigenvalues.

    The flow conserves the spin length, so the Jacobian of any fixed point on
    the sphere carries one structural zero eigenvalue (left null vector along
    the spin radial direction).  That mode says nothing about dynamical
    stability and is dropped before applying the Re < -tol / Re > tol split;
    a *second* near-zero eigenvalue (a genuine threshold) still yields
    'marginal'.
    """
    eigs = np.asarray(eigs)
    if drop_conserved and eigs.size:
        scale = max(1.0, float(np.max(np.abs(eigs))))
        idx = int(np.argmin(np.abs(eigs)))
        if abs(eigs[idx]) < 1e-10 * scale:
            eigs = np.delete(eigs, idx)
    re = eigs.real
    if np.all(re < -tol):
        return Stability.STABLE
    if np.any(re > tol):
        return Stability.UNSTABLE
    return Stability.MARGINAL


def _fixed_point(params: ModelParams, state: MeanFieldState, branch: Branch) -> FixedPoint:
    eigs = np.linalg.eigvals(jacobian(state, params))
    return FixedPoint(state, classify_eigenvalues(eigs), eigs, branch)


def superradiant_roots(params: ModelParams, polish: bool = True) -> list[FixedPoint]:
    """The alpha != 0 branch, seeded from its closed form.

    Setting the flow to zero with sy = 0 gives
    sz* = -N (omega_a + V/2) / (V + 2 g),   g = 4 lam^2 omega_c/(kappa^2+omega_c^2),
    sx*^2 = (N/2)^2 - sz*^2, and alpha follows from the cavity equation.
    The pitchforks at lambda_down / lambda_up correspond to |sz*| reaching N/2.
    """
    n = params.n_atoms
    scale = params.kappa**2 + params.omega_c**2
    if scale == 0.0 or params.lam == 0.0:
        return []
    g = 4.0 * params.lam**2 * params.omega_c / scale
    den = params.v_int + 2.0 * g
    if abs(den) < 1e-14:
        return []
    sz_star = -n * (params.omega_a + 0.5 * params.v_int) / den
    half = 0.5 * n
    if abs(sz_star) > half * (1.0 - 1e-12):
        return []
    sx_mag = math.sqrt(half**2 - sz_star**2)
    c = 2.0 * params.lam / math.sqrt(n)
    out = []
    for sign, branch in ((+1.0, Branch.SUPERRADIANT_PLUS), (-1.0, Branch.SUPERRADIANT_MINUS)):
        sx = sign * sx_mag
        alpha = -1j * c * sx / (params.kappa + 1j * params.omega_c)
        seed = MeanFieldState(alpha, sx, 0.0, sz_star)
        state = seed
        if polish:
            sol = scipy_root(lambda y: _rhs(y, params), seed.as_vector())
            seed_resid = float(np.max(np.abs(_rhs(seed.as_vector(), params))))
            resid = float(np.max(np.abs(_rhs(sol.x, params))))
            if resid <= seed_resid:
                state, best_resid = MeanFieldState.from_vector(sol.x), resid
            else:
                best_resid = seed_resid
            if best_resid > 1e-8 * max(1.0, n):
                # flagged missing rather than fabricated
                continue
        out.append(_fixed_point(params, state, branch))
    return out


def transverse_roots(params: ModelParams) -> list[FixedPoint]:
    """alpha = 0, sx = 0 fixed points with the spin along +-y at Delta_MF = 0.

    They exist for |sz0| <= N/2 with sz0 = -N (omega_a + V/2)/V, i.e. only in
    the interacting regime V <= -omega_a, and organize the bistable basins.
    """
    if params.v_int == 0.0:
        return []
    n = params.n_atoms
    sz0 = -n * (params.omega_a + 0.5 * params.v_int) / params.v_int
    half = 0.5 * n
    if abs(sz0) > half * (1.0 - 1e-12):
        return []
    sy_mag = math.sqrt(half**2 - sz0**2)
    return [
        _fixed_point(params, MeanFieldState(0j, 0.0, sign * sy_mag, sz0), branch)
        for sign, branch in ((+1.0, Branch.TRANSVERSE_PLUS), (-1.0, Branch.TRANSVERSE_MINUS))
    ]


def find_fixed_points(params: ModelParams, include_transverse: bool = True) -> list[FixedPoint]:
    """Both poles (always), superradiant roots and transverse roots."""
    points = [
        _fixed_point(params, pole_state(params, "g"), Branch.G_POLARIZED),
        _fixed_point(params, pole_state(params, "sd"), Branch.SD_POLARIZED),
    ]
    points.extend(superradiant_roots(params))
    if include_transverse:
        points.extend(transverse_roots(params))
    return points


def detect_pole_threshold(
    params: ModelParams,
    pole: str,
    lam_max: float | None = None,
    rel_tol: float = 1e-8,
) -> float:
    """Numerically detected instability threshold of a pole.

    Bisects the smallest lambda at which the pole Jacobian acquires an
    eigenvalue with positive real part.  Used to certify the reconstructed
    equations of motion against the closed-form couplings.
    """
    state = pole_state(params, pole)

    def unstable(lam: float) -> bool:
        eigs = np.linalg.eigvals(jacobian(state, params.with_(lam=lam)))
        return bool(np.max(eigs.real) > 1e-12)

    cc = critical_couplings(params)
    ref = cc.lambda_down if pole == "g" else (cc.lambda_up or cc.lambda_down)
    hi = lam_max if lam_max is not None else 4.0 * ref + 1.0
    lo = 1e-9
    if unstable(lo):
        return 0.0
    if not unstable(hi):
        raise RuntimeError(f"pole {pole} remains stable up to lambda = {hi}")
    while (hi - lo) > rel_tol * max(hi, 1e-30):
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def mf_frequency(params: ModelParams, point: FixedPoint) -> tuple[float, bool]:
    """Largest |Im| over the Jacobian spectrum at the fixed point.

    A linearization proxy for the near-critical oscillation frequency.
    Returns (omega, oscillatory_flag); the flag is False when the spectrum
    is entirely real.
    """
    im = np.abs(point.eigenvalues.imag)
    if np.max(im) < 1e-12:
        return 0.0, False
    return float(np.max(im)), True


# ---------------------------------------------------------------------------
# Phase classification
# ---------------------------------------------------------------------------

PHASE_LABELS = ("normal", "bistable", "sd_only", "superradiant", "oscillatory", "unresolved")


@dataclass
class PhaseDiagnostics:
    g_pole: Stability
    sd_pole: Stability
    superradiant: Stability | None
    oscillation_amplitude: float | None = None
    oscillation_decay: float | None = None
    note: str = ""


def _detect_oscillation(params: ModelParams) -> tuple[bool, float, float]:
    """Long-run limit-cycle detector.

    Starts from a strongly tilted g-pole (0.3 rad; the detector probes the
    attractor, so the small figure-trajectory tilt would only lengthen the
    transient) and inspects the trailing window.  If the amplitude is still
    growing at the end of the run, the run is extended once.
    """
    series = integrate_mf(
        tilted_pole(params, "g", tilt=0.3),
        params,
        (0.0, OSC_T_FINAL),
        rel_tol=1e-9,
        n_out=4001,
    )
    tail = series.window(OSC_WINDOW_FRACTION)
    szv = tail["sz"]
    half = len(szv) // 2
    amp = float(szv.max() - szv.min())
    amp1 = float(szv[:half].max() - szv[:half].min())
    amp2 = float(szv[half:].max() - szv[half:].min())
    decay = (amp1 - amp2) / amp1 if amp1 > 0 else 1.0
    persistent = amp > OSC_AMPLITUDE_FLOOR * params.n_atoms and decay < OSC_DECAY_LIMIT
    return persistent, amp, decay


def classify_phase(
    params: ModelParams, return_diagnostics: bool = False
) -> str | tuple[str, PhaseDiagnostics]:
    """Label the long-time mean-field behaviour at the given parameters.

    normal / bistable / sd_only follow from pole stability, superradiant from
    a stable alpha != 0 root, oscillatory from persistent large-amplitude
    dynamics when no fixed point is stable.  lambda = 0 decouples the model
    (pure spin precession); it is classified in the lambda -> 0+ limit.
    """
    if params.lam == 0.0:
        g_st = Stability.STABLE
        sd_st = (
            Stability.STABLE
            if params.omega_a + params.v_int < 0
            else (Stability.MARGINAL if params.omega_a + params.v_int == 0 else Stability.UNSTABLE)
        )
        sr = None
        diag = PhaseDiagnostics(g_st, sd_st, None, note="lambda=0 classified in the lambda->0+ limit")
        label = "bistable" if sd_st is Stability.STABLE else "normal"
        return (label, diag) if return_diagnostics else label

    points = find_fixed_points(params)
    g_pole = next(p for p in points if p.branch is Branch.G_POLARIZED)
    sd_pole = next(p for p in points if p.branch is Branch.SD_POLARIZED)
    sr_points = [p for p in points if p.branch in (Branch.SUPERRADIANT_PLUS, Branch.SUPERRADIANT_MINUS)]
    other_stable = [
        p for p in points
        if p.branch in (Branch.TRANSVERSE_PLUS, Branch.TRANSVERSE_MINUS) and p.is_stable
    ]
    diag = PhaseDiagnostics(
        g_pole.stability,
        sd_pole.stability,
        sr_points[0].stability if sr_points else None,
    )

    if g_pole.is_stable and sd_pole.is_stable:
        label = "bistable"
    elif g_pole.is_stable:
        label = "normal"
    elif sd_pole.is_stable:
        label = "sd_only"
    elif any(p.is_stable for p in sr_points):
        label = "superradiant"
    elif other_stable:
        diag.note = f"stable non-superradiant root on branch {other_stable[0].branch.value}"
        label = "unresolved"
    else:
        persistent, amp, decay = _detect_oscillation(params)
        diag.oscillation_amplitude = amp
        diag.oscillation_decay = decay
        if persistent:
            label = "oscillatory"
        else:
            diag.note = "no stable fixed point and no persistent oscillation detected"
            label = "unresolved"
    return (label, diag) if return_diagnostics else label


# ---------------------------------------------------------------------------
# Phase-diagram scan
# ---------------------------------------------------------------------------

@dataclass
class PhaseMap:
    v_values: np.ndarray
    lambda_values: np.ndarray
    labels: np.ndarray  # shape (len(v_values), len(lambda_values)), dtype object/str
    lambda_down: float
    lambda_up: np.ndarray  # per V value, nan when absent
    meta: dict = field(default_factory=dict)

    def to_scan_result(self) -> ScanResult:
        rows = []
        for i, v in enumerate(self.v_values):
            for j, lam in enumerate(self.lambda_values):
                rows.append(
                    {
                        "v_over_omega_a": v,
                        "lambda": lam,
                        "label": self.labels[i, j],
                        "lambda_down": self.lambda_down,
                        "lambda_up": self.lambda_up[i],
                    }
                )
        return ScanResult(
            ["v_over_omega_a", "lambda", "label", "lambda_down", "lambda_up"],
            rows,
            meta=self.meta,
        )

    def write_csv(self, path) -> None:
        self.to_scan_result().write_csv(path)

    def write_json(self, path) -> None:
        self.to_scan_result().write_json(path)


def _grid(values_range: tuple[float, float], n: int, snap_to=()) -> np.ndarray:
    grid = np.linspace(values_range[0], values_range[1], n)
    for target in snap_to:
        if values_range[0] <= target <= values_range[1]:
            grid[np.argmin(np.abs(grid - target))] = target
    return grid


def _classify_column(args) -> tuple[int, list[str]]:
    i, v, lambda_values, base_dict = args
    base = ModelParams.from_dict(base_dict)
    labels = []
    for lam in lambda_values:
        labels.append(classify_phase(base.with_(v_int=v, lam=lam)))
    return i, labels


def scan_phase_diagram(
    v_range: tuple[float, float],
    lambda_range: tuple[float, float],
    resolution: tuple[int, int],
    params_base: ModelParams,
    snap_v_to: tuple[float, ...] = (),
    n_workers: int = 1,
) -> PhaseMap:
    """Grid of classify_phase labels over (V/omega_a, lambda).

    ``snap_v_to`` moves the nearest grid column onto the listed exact V
    values (the marked verticals V_b = -omega_a, V_c = -2 omega_a need to be
    sampled exactly: the oscillation phase lives on the resonance line).
    Columns are independent work units; results merge by index.
    """
    nv, nl = resolution
    if nv < 2 or nl < 2:
        raise ValueError("resolution must be >= 2 per axis")
    v_values = _grid(v_range, nv, snap_v_to)
    lambda_values = _grid(lambda_range, nl)
    labels = np.empty((nv, nl), dtype=object)
    jobs = [(i, v, lambda_values, params_base.to_dict()) for i, v in enumerate(v_values)]
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for i, col in pool.map(_classify_column, jobs, chunksize=4):
                labels[i, :] = col
    else:
        for job in jobs:
            i, col = _classify_column(job)
            labels[i, :] = col
    lam_down = critical_couplings(params_base.with_(v_int=0.0)).lambda_down
    lam_up = np.array(
        [
            (critical_couplings(params_base.with_(v_int=v)).lambda_up or math.nan)
            for v in v_values
        ]
    )
    return PhaseMap(
        v_values,
        lambda_values,
        labels,
        lam_down,
        lam_up,
        meta={"params_base": params_base.to_dict(), "resolution": [nv, nl]},
    )
