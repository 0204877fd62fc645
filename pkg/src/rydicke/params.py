"""Physical model parameters shared by every backend.

All frequencies are quoted in units of the atomic splitting ``omega_a``
(so ``omega_a = 1.0`` by convention) and time in units of ``1/omega_a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the Rydberg-dressed open Dicke model.

    Attributes:
        omega_c: cavity detuning (units of omega_a).
        lam: collective light-matter coupling strength, >= 0.
        v_int: collective dressed-state interaction V (units of omega_a).
        kappa: cavity field decay rate, >= 0. The photon number decays
            at rate ``2*kappa``.
        n_atoms: number of two-level atoms N, >= 1.
        omega_a: atomic splitting; fixes the unit system (default 1.0).
    """

    omega_c: float
    lam: float
    v_int: float
    kappa: float
    n_atoms: int
    omega_a: float = 1.0

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        for name in ("omega_c", "lam", "v_int", "kappa", "omega_a"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def spin_j(self) -> float:
        """Collective spin length J = N/2."""
        return 0.5 * self.n_atoms

    def with_(self, **changes) -> "ModelParams":
        """Return a copy with the given fields replaced."""
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "omega_c": self.omega_c,
            "omega_a": self.omega_a,
            "lambda": self.lam,
            "v_int": self.v_int,
            "kappa": self.kappa,
            "n_atoms": self.n_atoms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(
            omega_c=float(d["omega_c"]),
            lam=float(d["lambda"]),
            v_int=float(d["v_int"]),
            kappa=float(d["kappa"]),
            n_atoms=int(d["n_atoms"]),
            omega_a=float(d.get("omega_a", 1.0)),
        )
