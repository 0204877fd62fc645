#!/usr/bin/env python3
"""Derive the second-order moment equations and generate
``src/rydicke/_moment_eqs.py``.

The derivation works in the *-algebra generated by {a, a+} and the
collective spin components {Sx, Sy, Sz} with [a, a+] = 1 and
[S_a, S_b] = i eps_abc S_c.  Every tracked moment O is differentiated via
the adjoint Lindblad generator

    d<O>/dt = i <[H, O]> + kappa <2 a+ O a - a+a O - O a+a>,

with H = omega_c a+a + omega_z Sz + eta Sz^2 + coup (a + a+) Sx, where
omega_z = omega_a + V/2, eta = V / (2 (N-1)) and coup = 2 lambda / sqrt(N)
absorb the collective-interaction reduction.

Mapping expectation values onto the tracked set:

* degree <= 2 canonical monomials map exactly (ordered spin pairs are
  reconstructed from symmetrized covariances plus commutators);
* every degree-3 monomial is split exactly into its fully symmetrized part
  plus a lower-degree remainder; only the symmetrized part is closed with
  the Gaussian rule  <ABC> ~ <AB><C> + <AC><B> + <BC><A> - 2<A><B><C>
  over symmetrized pair moments, so all finite-size commutator terms are
  retained exactly.

The script asserts symbolically that the closed system conserves the spin
Casimir (d(mxx+myy+mzz)/dt = 0).

Run:  python tools/derive_moment_eqs.py [--check]

--check regenerates the equations and verifies they match the committed
module instead of overwriting it.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from collections import defaultdict
from pathlib import Path

import sympy as sy

I = sy.I

SPIN = ("x", "y", "z")
EPS = {
    ("x", "y"): ("z", 1), ("y", "x"): ("z", -1),
    ("y", "z"): ("x", 1), ("z", "y"): ("x", -1),
    ("z", "x"): ("y", 1), ("x", "z"): ("y", -1),
}
ORDER = {"ad": 0, "a": 1, "x": 2, "y": 3, "z": 4}


# ---------------------------------------------------------------------------
# normal-ordered operator algebra: dict {generator tuple: sympy coefficient}
# ---------------------------------------------------------------------------

def normalize(seq, coeff=sy.Integer(1)):
    out = defaultdict(lambda: sy.Integer(0))
    stack = [(list(seq), coeff)]
    while stack:
        s, c = stack.pop()
        idx = next(
            (i for i in range(len(s) - 1) if ORDER[s[i]] > ORDER[s[i + 1]]), None
        )
        if idx is None:
            out[tuple(s)] += c
            continue
        g1, g2 = s[idx], s[idx + 1]
        swapped = s[:idx] + [g2, g1] + s[idx + 2:]
        stack.append((swapped, c))
        if g1 == "a" and g2 == "ad":
            stack.append((s[:idx] + s[idx + 2:], c))  # a a+ = a+ a + 1
        elif g1 in SPIN and g2 in SPIN:
            comp, sign = EPS[(g2, g1)]
            stack.append((s[:idx] + [comp] + s[idx + 2:], -c * I * sign))
        # photon and spin generators commute: plain swap, no extra term
    return dict(out)


def op(*seq, coeff=sy.Integer(1)):
    return normalize(seq, coeff)


def add(*ops):
    out = defaultdict(lambda: sy.Integer(0))
    for o in ops:
        for k, v in o.items():
            out[k] += v
    return {k: sy.expand(v) for k, v in out.items() if sy.expand(v) != 0}


def scale(o, factor):
    return {k: v * factor for k, v in o.items()}


def mul(o1, o2):
    out = defaultdict(lambda: sy.Integer(0))
    for k1, v1 in o1.items():
        for k2, v2 in o2.items():
            for k, v in normalize(list(k1) + list(k2), v1 * v2).items():
                out[k] += v
    return {k: sy.expand(v) for k, v in out.items() if sy.expand(v) != 0}


def commutator(o1, o2):
    return add(mul(o1, o2), scale(mul(o2, o1), -1))


# ---------------------------------------------------------------------------
# tracked moments and their symbols
# ---------------------------------------------------------------------------

alpha, nph, aa = sy.symbols("alpha nph aa", complex=True)
sx, sy_, sz = sy.symbols("sx sy sz", complex=True)
asx, asy, asz = sy.symbols("asx asy asz", complex=True)
mxx, mxy, mxz, myy, myz, mzz = sy.symbols("mxx mxy mxz myy myz mzz", complex=True)

FIRST = {"a": alpha, "ad": sy.conjugate(alpha), "x": sx, "y": sy_, "z": sz}
MSYM_SPIN = {
    ("x", "x"): mxx, ("x", "y"): mxy, ("x", "z"): mxz,
    ("y", "y"): myy, ("y", "z"): myz, ("z", "z"): mzz,
}


def pair_symmetrized(g1, g2):
    """<(g1 g2 + g2 g1)/2> in tracked symbols."""
    key = tuple(sorted((g1, g2), key=lambda g: ORDER[g]))
    if key == ("ad", "a"):
        return nph + sy.Rational(1, 2)
    if key == ("a", "a"):
        return aa
    if key == ("ad", "ad"):
        return sy.conjugate(aa)
    if key[0] in ("a", "ad") and key[1] in SPIN:
        base = {"x": asx, "y": asy, "z": asz}[key[1]]
        return base if key[0] == "a" else sy.conjugate(base)
    return MSYM_SPIN[key]


def exact_deg2(mono):
    g1, g2 = mono
    if g1 == "ad" and g2 == "a":
        return nph
    if g1 in SPIN and g2 in SPIN and g1 != g2:
        comp, sign = EPS[(g1, g2)]
        return pair_symmetrized(g1, g2) + sy.Rational(1, 2) * I * sign * FIRST[comp]
    return pair_symmetrized(g1, g2)


def gaussian_closure_sym(factors):
    a_, b_, c_ = factors
    return (
        pair_symmetrized(a_, b_) * FIRST[c_]
        + pair_symmetrized(a_, c_) * FIRST[b_]
        + pair_symmetrized(b_, c_) * FIRST[a_]
        - 2 * FIRST[a_] * FIRST[b_] * FIRST[c_]
    )


def sym3_op(factors):
    out = defaultdict(lambda: sy.Integer(0))
    for perm in itertools.permutations(factors):
        for k, v in normalize(list(perm), sy.Rational(1, 6)).items():
            out[k] += v
    return {k: sy.expand(v) for k, v in out.items() if sy.expand(v) != 0}


def expval(o):
    expr = sy.Integer(0)
    for mono, coeff in o.items():
        d = len(mono)
        if d == 0:
            expr += coeff
        elif d == 1:
            expr += coeff * FIRST[mono[0]]
        elif d == 2:
            expr += coeff * exact_deg2(mono)
        elif d == 3:
            s3 = sym3_op(list(mono))
            rem = add({mono: sy.Integer(1)}, scale(s3, -1))
            assert all(len(k) < 3 for k in rem), (mono, rem)
            expr += coeff * (gaussian_closure_sym(list(mono)) + expval(rem))
        else:
            raise ValueError(f"degree-{d} monomial {mono}: hierarchy not closed")
    return sy.expand(expr)


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

omega_c, omega_z, eta, coup, kappa = sy.symbols(
    "omega_c omega_z eta coup kappa", real=True
)

HAMILTONIAN = add(
    scale(op("ad", "a"), omega_c),
    scale(op("z"), omega_z),
    scale(op("z", "z"), eta),
    scale(add(op("a", "x"), op("ad", "x")), coup),
)

A_OP, AD_OP, NPH_OP = op("a"), op("ad"), op("ad", "a")


def lindblad_derivative(o):
    ham = scale(commutator(HAMILTONIAN, o), I)
    diss = add(
        scale(mul(mul(AD_OP, o), A_OP), 2 * kappa),
        scale(mul(NPH_OP, o), -kappa),
        scale(mul(o, NPH_OP), -kappa),
    )
    return add(ham, diss)


def sym_pair_op(g1, g2):
    return add(
        scale(mul(op(g1), op(g2)), sy.Rational(1, 2)),
        scale(mul(op(g2), op(g1)), sy.Rational(1, 2)),
    )


TRACKED = [
    ("alpha", op("a")),
    ("sx", op("x")),
    ("sy", op("y")),
    ("sz", op("z")),
    ("nph", op("ad", "a")),
    ("aa", op("a", "a")),
    ("asx", op("a", "x")),
    ("asy", op("a", "y")),
    ("asz", op("a", "z")),
    ("mxx", sym_pair_op("x", "x")),
    ("mxy", sym_pair_op("x", "y")),
    ("mxz", sym_pair_op("x", "z")),
    ("myy", sym_pair_op("y", "y")),
    ("myz", sym_pair_op("y", "z")),
    ("mzz", sym_pair_op("z", "z")),
]

MOMENT_SYMBOLS = [alpha, sx, sy_, sz, nph, aa, asx, asy, asz,
                  mxx, mxy, mxz, myy, myz, mzz]


def derive() -> dict[str, sy.Expr]:
    rhs = {name: expval(lindblad_derivative(o)) for name, o in TRACKED}
    casimir_flow = sy.simplify(rhs["mxx"] + rhs["myy"] + rhs["mzz"])
    assert casimir_flow == 0, f"closed flow does not conserve S^2: {casimir_flow}"
    return rhs


HEADER = '''"""Second-order moment equations for the collective model.

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
'''


def generate_source(rhs: dict[str, sy.Expr]) -> str:
    from sympy.printing.pycode import PythonCodePrinter

    class Printer(PythonCodePrinter):
        def _print_conjugate(self, expr):
            return f"conjugate({self._print(expr.args[0])})"

        def _print_ImaginaryUnit(self, expr):
            return "1j"

    printer = Printer()
    lines = [HEADER]
    for name, _ in TRACKED:
        body = printer.doprint(sy.simplify(rhs[name]))
        lines.append(f"    d_{name} = {body}")
    names = ", ".join(f"d_{name}" for name, _ in TRACKED)
    lines.append(f"    return np.array([{names}])")
    lines.append("")
    return "\n".join(lines)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true",
                    help="verify the committed module instead of writing it")
    args = ap.parse_args()
    target = Path(__file__).resolve().parents[1] / "src" / "rydicke" / "_moment_eqs.py"
    source = generate_source(derive())
    if args.check:
        if not target.exists():
            print(f"missing {target}", file=sys.stderr)
            return 1
        if target.read_text() != source:
            print("committed _moment_eqs.py differs from fresh derivation",
                  file=sys.stderr)
            return 1
        print("derivation matches the committed module")
        return 0
    target.write_text(source)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
