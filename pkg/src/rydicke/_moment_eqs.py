"""Second-order moment equations for the collective model.

GENERATED by tools/derive_moment_eqs.py -- do not edit by hand.
Regenerate (or verify) with:  python tools/derive_moment_eqs.py [--check]

State layout (complex): [alpha, sx, sy, sz, nph, aa, asx, asy, asz,
                         mxx, mxy, mxz, myy, myz, mzz]
with nph = <a+a>, aa = <aa>, as* = <a S_*> and m** the symmetrized spin
covariances <{S_a, S_b}>/2.  Effective parameters: omega_z = omega_a + V/2,
eta = V/(2(N-1)), coup = 2 lambda / sqrt(N).
"""

import numpy as np

MOMENT_NAMES = (
    "alpha", "sx", "sy", "sz", "nph", "aa", "asx", "asy", "asz",
    "mxx", "mxy", "mxz", "myy", "myz", "mzz",
)


def moment_rhs(y, omega_c, omega_z, eta, coup, kappa):
    """Time derivative of the tracked moment vector."""
    (alpha, sx, sy, sz, nph, aa, asx, asy, asz,
     mxx, mxy, mxz, myy, myz, mzz) = y
    conjugate = np.conjugate

    d_alpha = -alpha*kappa - 1j*alpha*omega_c - 1j*coup*sx
    d_sx = -2*eta*myz - omega_z*sy
    d_sy = -asz*coup - coup*conjugate(asz) + 2*eta*mxz + omega_z*sx
    d_sz = coup*(asy + conjugate(asy))
    d_nph = 1j*asx*coup - 1j*coup*conjugate(asx) - 2*kappa*nph
    d_aa = -2*aa*kappa - 2*1j*aa*omega_c - 2*1j*asx*coup
    d_asx = -2*alpha*eta*myz + 4*alpha*eta*sy*sz - asx*kappa - 1j*asx*omega_c - 2*asy*eta*sz - asy*omega_z - 2*asz*eta*sy - 1j*coup*mxx
    d_asy = -aa*coup*sz + 2*alpha**2*coup*sz - 2*alpha*asz*coup + 2*alpha*coup*sz*conjugate(alpha) - alpha*coup*conjugate(asz) + 2*alpha*eta*mxz - 4*alpha*eta*sx*sz + 2*asx*eta*sz + asx*omega_z - asy*kappa - 1j*asy*omega_c - asz*coup*conjugate(alpha) + 2*asz*eta*sx - 1j*coup*mxy - coup*nph*sz - 1/2*coup*sz
    d_asz = aa*coup*sy - 2*alpha**2*coup*sy + 2*alpha*asy*coup - 2*alpha*coup*sy*conjugate(alpha) + alpha*coup*conjugate(asy) + asy*coup*conjugate(alpha) - asz*kappa - 1j*asz*omega_c - 1j*coup*mxz + coup*nph*sy + (1/2)*coup*sy
    d_mxx = -4*eta*mxy*sz - 4*eta*mxz*sy - 4*eta*myz*sx + 8*eta*sx*sy*sz - 2*mxy*omega_z
    d_mxy = -alpha*coup*mxz + 2*alpha*coup*sx*sz - asx*coup*sz - asz*coup*sx - coup*mxz*conjugate(alpha) + 2*coup*sx*sz*conjugate(alpha) - coup*sx*conjugate(asz) - coup*sz*conjugate(asx) + 2*eta*mxx*sz + 4*eta*mxz*sx - 2*eta*myy*sz - 4*eta*myz*sy - 4*eta*sx**2*sz + 4*eta*sy**2*sz + mxx*omega_z - myy*omega_z
    d_mxz = alpha*coup*mxy - 2*alpha*coup*sx*sy + asx*coup*sy + asy*coup*sx + coup*mxy*conjugate(alpha) - 2*coup*sx*sy*conjugate(alpha) + coup*sx*conjugate(asy) + coup*sy*conjugate(asx) - 4*eta*myz*sz - 2*eta*mzz*sy + 4*eta*sy*sz**2 + (1/6)*eta*sy - myz*omega_z
    d_myy = -2*alpha*coup*myz + 4*alpha*coup*sy*sz - 2*asy*coup*sz - 2*asz*coup*sy - 2*coup*myz*conjugate(alpha) + 4*coup*sy*sz*conjugate(alpha) - 2*coup*sy*conjugate(asz) - 2*coup*sz*conjugate(asy) + 4*eta*mxy*sz + 4*eta*mxz*sy + 4*eta*myz*sx - 8*eta*sx*sy*sz + 2*mxy*omega_z
    d_myz = alpha*coup*myy - alpha*coup*mzz - 2*alpha*coup*sy**2 + 2*alpha*coup*sz**2 + 2*asy*coup*sy - 2*asz*coup*sz + coup*myy*conjugate(alpha) - coup*mzz*conjugate(alpha) - 2*coup*sy**2*conjugate(alpha) + 2*coup*sy*conjugate(asy) + 2*coup*sz**2*conjugate(alpha) - 2*coup*sz*conjugate(asz) + 4*eta*mxz*sz + 2*eta*mzz*sx - 4*eta*sx*sz**2 - 1/6*eta*sx + mxz*omega_z
    d_mzz = 2*coup*(alpha*myz - 2*alpha*sy*sz + asy*sz + asz*sy + myz*conjugate(alpha) - 2*sy*sz*conjugate(alpha) + sy*conjugate(asz) + sz*conjugate(asy))
    return np.array([d_alpha, d_sx, d_sy, d_sz, d_nph, d_aa, d_asx, d_asy, d_asz, d_mxx, d_mxy, d_mxz, d_myy, d_myz, d_mzz])
