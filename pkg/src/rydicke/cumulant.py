"""Second-order cumulant dynamics with Gaussian closure of third moments.

The tracked set is the 15-component collective moment vector (4 first
moments, photon moments <a+a> and <aa>, photon-spin cross moments <a S_b>,
and the 6 symmetrized spin covariances).  The equations of motion live in
``_moment_eqs`` and are generated symbolically by
``tools/derive_moment_eqs.py``; all finite-size commutator terms are exact,
only fully symmetrized third-order moments are closed.

Closure breakdown (loss of positive semidefiniteness of the spin covariance)
is a reported outcome, not a silent correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ._moment_eqs import MOMENT_NAMES, moment_rhs
from .hilbert import DensityMatrix, collective_operators
from .params import ModelParams
from .series import TimeSeries

_IDX = {name: i for i, name in enumerate(MOMENT_NAMES)}

PSD_WARN_TOL = -1e-8
PSD_ABORT_TOL = -1e-6


class ClosureBreakdownError(RuntimeError):
    """Gaussian closure produced an unphysical covariance."""

    def __init__(self, time: float, min_eigenvalue: float):
        super().__init__(
            f"closure breakdown at t={time:.6g}: spin covariance eigenvalue "
            f"{min_eigenvalue:.3e}"
        )
        self.time = time
        self.min_eigenvalue = min_eigenvalue


@dataclass
class MomentVector:
    """First and second collective moments, stored as a complex 15-vector."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex).reshape(-1)
        if self.data.size != len(MOMENT_NAMES):
            raise ValueError(f"expected {len(MOMENT_NAMES)} moments")

    def __getattr__(self, name):
        idx = _IDX.get(name)
        if idx is None:
            raise AttributeError(name)
        return self.data[idx]

    def as_dict(self) -> dict[str, complex]:
        return {name: complex(v) for name, v in zip(MOMENT_NAMES, self.data)}

    def spin_covariance(self) -> np.ndarray:
        """Mean-subtracted symmetrized spin covariance (real 3x3)."""
        s = np.array([self.sx, self.sy, self.sz])
        m = np.array(
            [
                [self.mxx, self.mxy, self.mxz],
                [self.mxy, self.myy, self.myz],
                [self.mxz, self.myz, self.mzz],
            ]
        )
        return np.real(m - np.outer(s, s))

    def min_covariance_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.spin_covariance()).min())

    def casimir(self) -> float:
        """<S^2> = mxx + myy + mzz (conserved by the closed flow)."""
        return float(np.real(self.mxx + self.myy + self.mzz))

    def f_squared(self, n_atoms: int) -> float:
        """Normalized S_z variance (<Sz^2> - <Sz>^2)/N."""
        return float(np.real(self.mzz - self.sz**2)) / n_atoms

    @classmethod
    def product_state(
        cls,
        n_atoms: int,
        alpha: complex = 0j,
        sx: float = 0.0,
        sy: float = 0.0,
        sz: float | None = None,
    ) -> "MomentVector":
        """Moments of (single-atom state)^N (x) coherent photon state.

        The defaults give the g-pole with photon vacuum.  The spin covariance
        of a product state is N delta_ab/4 + (N-1)/N s_a s_b, and photon-spin
        correlations factorize.
        """
        if sz is None:
            sz = -0.5 * n_atoms
        svec = np.array([sx, sy, sz], dtype=float)
        if svec @ svec > (0.5 * n_atoms) ** 2 * (1 + 1e-12):
            raise ValueError("spin expectation exceeds N/2")
        cov = np.eye(3) * n_atoms / 4.0 + (n_atoms - 1) / n_atoms * np.outer(svec, svec)
        data = np.array(
            [
                alpha, sx, sy, sz,
                abs(alpha) ** 2, alpha**2,
                alpha * sx, alpha * sy, alpha * sz,
                cov[0, 0], cov[0, 1], cov[0, 2], cov[1, 1], cov[1, 2], cov[2, 2],
            ],
            dtype=complex,
        )
        return cls(data)

    @classmethod
    def from_density_matrix(cls, rho: DensityMatrix) -> "MomentVector":
        """Exact moments of a finite-dimensional state (test oracle)."""
        ops = collective_operators(rho.basis)
        a = ops["a"].toarray()
        spins = {k: ops[k].toarray() for k in ("sx", "sy", "sz")}
        e = rho.expect
        m = {
            "alpha": e(a),
            "sx": e(spins["sx"]), "sy": e(spins["sy"]), "sz": e(spins["sz"]),
            "nph": e(a.conj().T @ a),
            "aa": e(a @ a),
            "asx": e(a @ spins["sx"]),
            "asy": e(a @ spins["sy"]),
            "asz": e(a @ spins["sz"]),
        }
        for name, (o1, o2) in {
            "mxx": ("sx", "sx"), "mxy": ("sx", "sy"), "mxz": ("sx", "sz"),
            "myy": ("sy", "sy"), "myz": ("sy", "sz"), "mzz": ("sz", "sz"),
        }.items():
            m[name] = e(0.5 * (spins[o1] @ spins[o2] + spins[o2] @ spins[o1]))
        return cls(np.array([m[name] for name in MOMENT_NAMES]))


def _effective_params(params: ModelParams) -> tuple[float, float, float, float, float]:
    n = params.n_atoms
    eta = params.v_int / (2.0 * (n - 1)) if n > 1 else 0.0
    return (
        params.omega_c,
        params.omega_a + 0.5 * params.v_int if n > 1 else params.omega_a,
        eta,
        2.0 * params.lam / math.sqrt(n),
        params.kappa,
    )


def cumulant_rhs(moments: MomentVector, params: ModelParams) -> MomentVector:
    """Closed time derivative of the tracked moments."""
    return MomentVector(moment_rhs(moments.data, *_effective_params(params)))


# ---------------------------------------------------------------------------
# Gaussian closure (inspection / testing surface)
# ---------------------------------------------------------------------------

_OPERATOR_LABELS = ("a", "a_dag", "sx", "sy", "sz")
_SPIN_EPS = {
    ("sx", "sy"): ("sz", 1.0), ("sy", "sx"): ("sz", -1.0),
    ("sy", "sz"): ("sx", 1.0), ("sz", "sy"): ("sx", -1.0),
    ("sz", "sx"): ("sy", 1.0), ("sx", "sz"): ("sy", -1.0),
}


def _first_moment(m: MomentVector, label: str) -> complex:
    if label == "a":
        return complex(m.alpha)
    if label == "a_dag":
        return complex(np.conj(m.alpha))
    return complex(getattr(m, label))


def _pair_moment(m: MomentVector, a: str, b: str, symmetrize: bool) -> complex:
    """<AB> in the written order (or the symmetrized pair moment)."""
    pair = (a, b)
    if {a, b} <= {"a", "a_dag"}:
        if pair == ("a", "a"):
            return complex(m.aa)
        if pair == ("a_dag", "a_dag"):
            return complex(np.conj(m.aa))
        sym = complex(m.nph) + 0.5
        if symmetrize:
            return sym
        return complex(m.nph) + (1.0 if pair == ("a", "a_dag") else 0.0)
    if a in ("a", "a_dag") or b in ("a", "a_dag"):
        photon, spin = (a, b) if a in ("a", "a_dag") else (b, a)
        base = complex(getattr(m, {"sx": "asx", "sy": "asy", "sz": "asz"}[spin]))
        return base if photon == "a" else complex(np.conj(base))
    # spin pair
    key = "m" + "".join(sorted(a[-1] + b[-1]))
    sym = complex(getattr(m, key))
    if symmetrize or a == b:
        return sym
    comp, sign = _SPIN_EPS[(a, b)]
    return sym + 0.5j * sign * _first_moment(m, comp)


def gaussian_closure(
    moments: MomentVector,
    triple: tuple[str, str, str],
    symmetrize: bool = False,
) -> complex:
    """<ABC> ~ <AB><C> + <AC><B> + <BC><A> - 2 <A><B><C>.

    ``triple`` is a tuple of operator labels from
    {'a', 'a_dag', 'sx', 'sy', 'sz'}; pair moments are taken in the written
    order, or as symmetrized pair moments when ``symmetrize`` is set (the
    symmetrized form is invariant under permutations of the triple).
    """
    a, b, c = triple
    for label in triple:
        if label not in _OPERATOR_LABELS:
            raise ValueError(f"unknown operator label {label!r}")
    return (
        _pair_moment(moments, a, b, symmetrize) * _first_moment(moments, c)
        + _pair_moment(moments, a, c, symmetrize) * _first_moment(moments, b)
        + _pair_moment(moments, b, c, symmetrize) * _first_moment(moments, a)
        - 2.0
        * _first_moment(moments, a)
        * _first_moment(moments, b)
        * _first_moment(moments, c)
    )


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def integrate_cumulant(
    m0: MomentVector,
    params: ModelParams,
    t_grid: np.ndarray,
    rel_tol: float = 1e-9,
    psd_abort_tol: float = PSD_ABORT_TOL,
) -> TimeSeries:
    """Integrate the closed moment equations on the given output grid.

    The spin covariance is monitored at every output sample; a negative
    eigenvalue beyond ``psd_abort_tol`` (scaled by the covariance trace)
    aborts with ClosureBreakdownError.  F^2(t) is emitted alongside the raw
    moments.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    eff = _effective_params(params)
    cov0 = m0.min_covariance_eigenvalue()
    if cov0 < PSD_WARN_TOL * max(1.0, abs(np.trace(m0.spin_covariance()))):
        raise ValueError(f"initial covariance not PSD (min eig {cov0:.2e})")
    sol = solve_ivp(
        lambda t, y: moment_rhs(y, *eff),
        (t_grid[0], t_grid[-1]),
        m0.data,
        method="DOP853",
        rtol=rel_tol,
        atol=rel_tol * 1e-2,
        t_eval=t_grid,
    )
    if not sol.success:
        raise ClosureBreakdownError(float(sol.t[-1]) if sol.t.size else t_grid[0], math.nan)
    columns: dict[str, np.ndarray] = {}
    for i, name in enumerate(MOMENT_NAMES):
        columns[name] = sol.y[i]
    f2 = np.empty(len(sol.t))
    for k in range(len(sol.t)):
        mv = MomentVector(sol.y[:, k])
        scale = max(1.0, abs(np.trace(mv.spin_covariance())))
        w = mv.min_covariance_eigenvalue()
        if w < psd_abort_tol * scale:
            raise ClosureBreakdownError(float(sol.t[k]), w)
        f2[k] = mv.f_squared(params.n_atoms)
    columns["f_squared"] = f2
    return TimeSeries(
        sol.t,
        columns,
        meta={"params": params.to_dict(), "moment_names": list(MOMENT_NAMES)},
    )
