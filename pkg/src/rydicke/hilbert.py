"""Truncated Hilbert space, collective operators, Hamiltonian and Liouvillian.

The model lives in the maximal collective-spin sector J = N/2 tensored with
a truncated photon Fock space of dimension M.  Every term of the Hamiltonian
is a function of collective operators only, so the restriction to J = N/2 is
exact (checked numerically through the Casimir invariant [H, S^2] = 0).

Conventions fixed here and relied on everywhere else:

* basis ordering: ``index = spin_index * M + photon_index`` with
  ``spin_index = 0`` corresponding to m = -N/2 (ascending m);
* superoperators are column-stacked, ``vec(rho) = rho.ravel(order="F")``;
* dissipator ``kappa * (2 a rho a+ - a+a rho - rho a+a)``, equivalent to a
  single jump operator ``sqrt(2 kappa) a`` with ``H_eff = H - i kappa a+a``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.sparse as sp

from .params import ModelParams

# Above this Hilbert-space dimension operators are built sparse.
DENSE_DIM_LIMIT = 512

# Default memory budget for materializing the superoperator.
DEFAULT_MEMORY_BUDGET_GB = 4.0

MatrixLike = Union[np.ndarray, sp.spmatrix]


class CutoffViolationError(RuntimeError):
    """Raised when the population of the top photon level exceeds tolerance."""


@dataclass(frozen=True)
class BasisDescriptor:
    """Truncated product basis |J=N/2, m> (x) |n_photon>."""

    n_atoms: int
    photon_cutoff: int

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")
        if self.photon_cutoff < 1:
            raise ValueError("photon_cutoff must be >= 1")

    @property
    def spin_dim(self) -> int:
        return self.n_atoms + 1

    @property
    def total_dim(self) -> int:
        return self.spin_dim * self.photon_cutoff

    def index(self, spin_index: int, photon_index: int) -> int:
        return spin_index * self.photon_cutoff + photon_index

    def m_values(self) -> np.ndarray:
        """Spin projection quantum numbers m, ascending from -N/2."""
        j = 0.5 * self.n_atoms
        return np.arange(self.spin_dim) - j

    def parity_signs(self) -> np.ndarray:
        """(-1)^(excitation number) per basis state.

        The excitation number ``n_i + n_photon = (m + N/2) + n_photon`` is
        conserved modulo 2 by the Hamiltonian (Z2 parity of the model).
        """
        spin_exc = np.arange(self.spin_dim)
        ph = np.arange(self.photon_cutoff)
        return np.where((spin_exc[:, None] + ph[None, :]) % 2 == 0, 1, -1).ravel()


@dataclass
class OperatorMatrix:
    """A complex matrix tagged with the basis it acts on.

    ``basis`` is None for bare spin-block or photon-block operators.
    """

    data: MatrixLike
    basis: BasisDescriptor | None = None
    hermitian: bool = False

    def __post_init__(self):
        n, m = self.data.shape
        if n != m:
            raise ValueError("operator must be square")
        if self.basis is not None and n != self.basis.total_dim:
            raise ValueError(
                f"shape {n} does not match basis dimension {self.basis.total_dim}"
            )
        if self.hermitian and herm_defect(self.data) > 1e-12:
            raise ValueError("operator marked hermitian but A - A+ is not negligible")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def toarray(self) -> np.ndarray:
        return self.data.toarray() if sp.issparse(self.data) else np.asarray(self.data)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.data.conj().T, self.basis, self.hermitian)


def herm_defect(a: MatrixLike) -> float:
    """Max elementwise |A - A+|."""
    d = a - a.conj().T
    if sp.issparse(d):
        return abs(d).max() if d.nnz else 0.0
    return float(np.abs(d).max()) if d.size else 0.0


def _maybe_sparse(mat: np.ndarray, dim: int) -> MatrixLike:
    return sp.csr_matrix(mat) if dim > DENSE_DIM_LIMIT else mat


# ---------------------------------------------------------------------------
# Block operators
# ---------------------------------------------------------------------------

def spin_operators(n_atoms: int) -> dict[str, OperatorMatrix]:
    """Collective spin matrices for J = N/2 in the |J, m> basis (m ascending).

    Returns the dict {'sx', 'sy', 'sz', 'sp', 'sm'} of (N+1) x (N+1)
    operators with Sx = (Sp + Sm)/2 and Sy = (Sp - Sm)/(2i).
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    j = 0.5 * n_atoms
    m = np.arange(n_atoms + 1) - j
    sz = np.diag(m).astype(complex)
    # <m+1| S+ |m> = sqrt(J(J+1) - m(m+1))
    ladder = np.sqrt(j * (j + 1.0) - m[:-1] * (m[:-1] + 1.0))
    sp_ = np.zeros((n_atoms + 1, n_atoms + 1), dtype=complex)
    sp_[np.arange(1, n_atoms + 1), np.arange(n_atoms)] = ladder
    sm = sp_.conj().T
    sx = 0.5 * (sp_ + sm)
    sy = -0.5j * (sp_ - sm)
    return {
        "sx": OperatorMatrix(sx, hermitian=True),
        "sy": OperatorMatrix(sy, hermitian=True),
        "sz": OperatorMatrix(sz, hermitian=True),
        "sp": OperatorMatrix(sp_),
        "sm": OperatorMatrix(sm),
    }


def photon_operators(photon_cutoff: int) -> dict[str, OperatorMatrix]:
    """Truncated single-mode operators {'a', 'a_dag', 'n_ph'} of dimension M.

    On the truncated space [a, a+] = I - M |M-1><M-1| (the top-level defect
    is the standard finite-cutoff artifact; the cutoff-adequacy monitor keeps
    its weight negligible).
    """
    if photon_cutoff < 1:
        raise ValueError("photon_cutoff must be >= 1")
    n = np.arange(photon_cutoff)
    a = np.zeros((photon_cutoff, photon_cutoff), dtype=complex)
    if photon_cutoff > 1:
        a[np.arange(photon_cutoff - 1), np.arange(1, photon_cutoff)] = np.sqrt(
            n[1:]
        )
    return {
        "a": OperatorMatrix(a),
        "a_dag": OperatorMatrix(a.conj().T),
        "n_ph": OperatorMatrix(np.diag(n).astype(complex), hermitian=True),
    }


def embed_spin(op: np.ndarray, basis: BasisDescriptor) -> MatrixLike:
    """Lift a spin-block operator to the product space (op (x) I_photon)."""
    full = np.kron(op, np.eye(basis.photon_cutoff, dtype=complex))
    return _maybe_sparse(full, basis.total_dim)

def embed_photon(op: np.ndarray, basis: BasisDescriptor) -> MatrixLike:
    """Lift a photon-block operator to the product space (I_spin (x) op)."""
    full = np.kron(np.eye(basis.spin_dim, dtype=complex), op)
    return _maybe_sparse(full, basis.total_dim)


def collective_operators(basis: BasisDescriptor) -> dict[str, OperatorMatrix]:
    """All collective operators lifted to the product space."""
    s_ops = spin_operators(basis.n_atoms)
    p_ops = photon_operators(basis.photon_cutoff)
    out = {}
    for name in ("sx", "sy", "sz", "sp", "sm"):
        out[name] = OperatorMatrix(
            embed_spin(s_ops[name].toarray(), basis), basis,
            hermitian=s_ops[name].hermitian,
        )
    for name in ("a", "a_dag", "n_ph"):
        out[name] = OperatorMatrix(
            embed_photon(p_ops[name].toarray(), basis), basis,
            hermitian=p_ops[name].hermitian,
        )
    return out


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------

def collective_interaction_operator(
    params: ModelParams, basis: BasisDescriptor
) -> OperatorMatrix:
    """All-to-all dressed-state interaction, diagonal in the spin basis.

    With the population operator Nhat = N/2 + Sz and the per-pair strength
    V/(N-1), the pair sum reduces through the projector identity n_i^2 = n_i
    to ``V/(2(N-1)) * (Nhat^2 - Nhat) (x) I_photon``.
    """
    if basis.n_atoms != params.n_atoms:
        raise ValueError("basis/params atom number mismatch")
    n = params.n_atoms
    if n == 1:
        warnings.warn(
            "collective interaction is identically zero for a single atom",
            stacklevel=2,
        )
        dim = basis.total_dim
        zero = sp.csr_matrix((dim, dim), dtype=complex) if dim > DENSE_DIM_LIMIT \
            else np.zeros((dim, dim), dtype=complex)
        return OperatorMatrix(zero, basis, hermitian=True)
    nhat = np.arange(basis.spin_dim, dtype=float)  # N/2 + m = 0..N
    diag_spin = params.v_int / (2.0 * (n - 1)) * (nhat**2 - nhat)
    return OperatorMatrix(
        embed_spin(np.diag(diag_spin).astype(complex), basis), basis, hermitian=True
    )


def hamiltonian(params: ModelParams, basis: BasisDescriptor) -> OperatorMatrix:
    """Collective Hamiltonian on the product basis.

    H = omega_c a+a + omega_a (N/2 + Sz) + (2 lam / sqrt(N)) Sx (a + a+) + H_int.

    The c-number omega_a N/2 (and the interaction offset) are kept so that
    absolute eigenvalues match hand calculations; they drop out of every
    observable.
    """
    if basis.n_atoms != params.n_atoms:
        raise ValueError("basis/params atom number mismatch")
    ops = collective_operators(basis)
    n = params.n_atoms
    eye = sp.identity(basis.total_dim, format="csr", dtype=complex) \
        if basis.total_dim > DENSE_DIM_LIMIT else np.eye(basis.total_dim, dtype=complex)
    coupling = 2.0 * params.lam / math.sqrt(n)
    h = (
        params.omega_c * ops["n_ph"].data
        + params.omega_a * (0.5 * n * eye + ops["sz"].data)
        + coupling * (ops["sx"].data @ (ops["a"].data + ops["a_dag"].data))
    )
    if n >= 2:
        h = h + collective_interaction_operator(params, basis).data
    return OperatorMatrix(h, basis, hermitian=True)


def choose_photon_cutoff(
    params: ModelParams,
    minimum: int = 8,
    probe: "DensityMatrix | StateVector | None" = None,
) -> int:
    """Initial photon cutoff from the superradiant photon-number scale.

    M0 = max(minimum, ceil(4 lam^2 N / (kappa^2 + omega_c^2))).  Propagation
    routines monitor the top-level population and callers double M on a
    cutoff violation.
    """
    scale = params.kappa**2 + params.omega_c**2
    if scale <= 0:
        return minimum
    m0 = math.ceil(4.0 * params.lam**2 * params.n_atoms / scale)
    return max(minimum, m0)


def default_basis(params: ModelParams, photon_cutoff: int | None = None) -> BasisDescriptor:
    return BasisDescriptor(
        params.n_atoms,
        photon_cutoff if photon_cutoff is not None else choose_photon_cutoff(params),
    )


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass
class StateVector:
    """Pure state on a BasisDescriptor."""

    basis: BasisDescriptor
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex).reshape(-1)
        if self.data.size != self.basis.total_dim:
            raise ValueError("state size does not match basis")

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalized(self) -> "StateVector":
        return StateVector(self.basis, self.data / self.norm())

    def expect(self, op: MatrixLike) -> complex:
        return complex(np.vdot(self.data, op @ self.data))

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, np.outer(self.data, self.data.conj()))

    def top_photon_population(self) -> float:
        block = self.data.reshape(self.basis.spin_dim, self.basis.photon_cutoff)
        return float(np.sum(np.abs(block[:, -1]) ** 2))


@dataclass
class DensityMatrix:
    """Mixed state on a BasisDescriptor with trace/hermiticity invariants."""

    basis: BasisDescriptor
    data: np.ndarray

    TRACE_TOL = 1e-8
    HERM_TOL = 1e-10
    POSITIVITY_TOL = -1e-8

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (self.basis.total_dim, self.basis.total_dim):
            raise ValueError("density matrix shape does not match basis")

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def expect(self, op: MatrixLike) -> complex:
        if sp.issparse(op):
            return complex((op @ self.data).diagonal().sum())
        return complex(np.einsum("ij,ji->", op, self.data))

    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.data, self.data)))

    def validate(self, check_positivity: bool = True) -> None:
        if abs(self.trace() - 1.0) >= self.TRACE_TOL:
            raise ValueError(f"trace defect {abs(self.trace() - 1.0):.2e}")
        defect = herm_defect(self.data)
        if defect >= self.HERM_TOL:
            raise ValueError(f"hermiticity defect {defect:.2e}")
        if check_positivity:
            w = np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))
            if w.min() <= self.POSITIVITY_TOL:
                raise ValueError(f"negative eigenvalue {w.min():.2e}")

    def top_photon_population(self) -> float:
        m = self.basis.photon_cutoff
        idx = np.arange(self.basis.spin_dim) * m + (m - 1)
        return float(np.real(self.data[idx, idx].sum()))


def basis_state(basis: BasisDescriptor, spin_index: int, photon_index: int) -> StateVector:
    vec = np.zeros(basis.total_dim, dtype=complex)
    vec[basis.index(spin_index, photon_index)] = 1.0
    return StateVector(basis, vec)


def polarized_vacuum(basis: BasisDescriptor, pole: str = "g") -> StateVector:
    """Fully-polarized spin state (g: m=-N/2, sd: m=+N/2) with photon vacuum."""
    if pole not in ("g", "sd"):
        raise ValueError("pole must be 'g' or 'sd'")
    spin_index = 0 if pole == "g" else basis.n_atoms
    return basis_state(basis, spin_index, 0)


# ---------------------------------------------------------------------------
# Liouvillian
# ---------------------------------------------------------------------------

def vec_density(rho: np.ndarray) -> np.ndarray:
    """Column-stacked vectorization."""
    return rho.ravel(order="F")


def unvec_density(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape((dim, dim), order="F")


@dataclass
class SuperoperatorMatrix:
    """Column-stacked superoperator acting on vec(rho)."""

    data: sp.spmatrix
    basis: BasisDescriptor

    @property
    def dim(self) -> int:
        return self.data.shape[0]


def liouvillian(
    params: ModelParams,
    basis: BasisDescriptor,
    memory_budget_gb: float = DEFAULT_MEMORY_BUDGET_GB,
) -> SuperoperatorMatrix:
    """Materialized Lindblad generator, column-stacking convention.

    L = -i (I (x) H - H^T (x) I)
        + kappa (2 conj(a) (x) a - I (x) a+a - (a+a)^T (x) I)

    Raises MemoryError with a hint towards apply_liouvillian when the
    estimated size exceeds the budget.
    """
    d = basis.total_dim
    # H has <= ~6 nonzeros per row (diagonal + Sx(a+a+) neighbours), so
    # nnz(L) ~ 13 d^2 at ~24 bytes per stored entry.
    est_bytes = 13.0 * d * d * 24.0
    if est_bytes > memory_budget_gb * 1e9:
        raise MemoryError(
            f"superoperator for total_dim={d} exceeds the {memory_budget_gb} GB "
            "budget; use apply_liouvillian (matrix-free) instead"
        )
    h = hamiltonian(params, basis).data
    h = sp.csr_matrix(h)
    a = sp.csr_matrix(embed_photon(photon_operators(basis.photon_cutoff)["a"].toarray(), basis))
    n_ph = (a.conj().T @ a).tocsr()
    eye = sp.identity(d, format="csr", dtype=complex)
    lio = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    if params.kappa != 0.0:
        lio = lio + params.kappa * (
            2.0 * sp.kron(a.conj(), a)
            - sp.kron(eye, n_ph)
            - sp.kron(n_ph.T, eye)
        )
    return SuperoperatorMatrix(lio.tocsr(), basis)


class LindbladApplier:
    """Matrix-free action of the Lindblad generator on dense rho.

    Prebuilds H, a, a+a once; apply() is then a handful of matrix products.
    Identical action to the materialized superoperator to 1e-12.
    """

    def __init__(self, params: ModelParams, basis: BasisDescriptor):
        self.params = params
        self.basis = basis
        self.h = hamiltonian(params, basis).data
        self.a = embed_photon(photon_operators(basis.photon_cutoff)["a"].toarray(), basis)
        self.a_dag = self.a.conj().T
        self.n_ph = (
            (self.a_dag @ self.a)
            if not sp.issparse(self.a)
            else (self.a_dag @ self.a).tocsr()
        )

    def apply(self, rho: np.ndarray) -> np.ndarray:
        h, a, adag, n_ph, kappa = self.h, self.a, self.a_dag, self.n_ph, self.params.kappa
        out = -1j * (h @ rho - rho @ h)
        if kappa != 0.0:
            out += kappa * (2.0 * (a @ rho) @ adag - n_ph @ rho - rho @ n_ph)
        return out

    def effective_hamiltonian(self) -> MatrixLike:
        """Non-Hermitian drift H - i kappa a+a (jump operator sqrt(2 kappa) a)."""
        return self.h - 1j * self.params.kappa * self.n_ph


def apply_liouvillian(
    params: ModelParams, basis: BasisDescriptor, rho: DensityMatrix
) -> DensityMatrix:
    """Matrix-free L[rho]; see LindbladApplier for repeated application."""
    return DensityMatrix(basis, LindbladApplier(params, basis).apply(rho.data))


# ---------------------------------------------------------------------------
# Debug export
# ---------------------------------------------------------------------------

def write_operator_text(op: OperatorMatrix | SuperoperatorMatrix, path) -> None:
    """Write a matrix in a plain text format: header 'rows cols nnz', then
    one 'row col re im' line per stored entry.
    """
    mat = sp.coo_matrix(op.data)
    with open(path, "w") as f:
        f.write(f"{mat.shape[0]} {mat.shape[1]} {mat.nnz}\n")
        for r, c, v in zip(mat.row, mat.col, mat.data):
            f.write(f"{r} {c} {v.real:.17e} {v.imag:.17e}\n")
