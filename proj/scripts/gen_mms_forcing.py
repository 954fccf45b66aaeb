#!/usr/bin/env python3
"""Generates the manufactured-solution forcing terms.

The manufactured fields are steady; the forcing is minus the continuous
right-hand side evaluated on them, so that the fields become an exact
steady solution of the forced system. The switch arguments are kept
strictly one-sided (q_v > 0, q_c > 1, q_vs = 0), so all sources are smooth
and the symbolic differentiation is valid.

Writes core/src/mms_forcing.inc; the generated file is committed so the
build does not depend on python.
"""

import sympy as sp

x, y, z = sp.symbols("x y z")

a, b = sp.Rational(1, 20), sp.Rational(1, 25)
two_pi = 2 * sp.pi

u = [
    a * sp.sin(two_pi * x) * sp.cos(two_pi * y) * sp.sin(sp.pi * z),
    a * sp.cos(two_pi * x) * sp.sin(two_pi * y) * sp.sin(sp.pi * z),
    b * sp.sin(two_pi * x) * sp.sin(two_pi * y) * sp.sin(sp.pi * z),
]
T = 1 + sp.Rational(1, 10) * sp.cos(two_pi * x) * sp.cos(two_pi * y) * sp.cos(sp.pi * z)
qv = sp.Rational(1, 5) + sp.Rational(1, 20) * sp.sin(two_pi * x) * sp.cos(two_pi * y) * sp.cos(sp.pi * z)
qc = sp.Rational(3, 2) + sp.Rational(1, 10) * sp.cos(two_pi * x) * sp.sin(two_pi * y) * sp.cos(sp.pi * z)
qr = sp.Rational(3, 10) + sp.Rational(1, 20) * sp.cos(two_pi * x) * sp.cos(two_pi * y) * sp.cos(sp.pi * z)
rho = sp.Rational(6, 5)  # spatially constant so the limited density flux stays second order

mu, lam = 1, 0
g = 0
Vr = 4 * z * (1 - z)  # parabolic sedimentation profile, vanishes at the walls

Qm = 1 + qv + qc + qr
p = rho * (1 + qv) * T
divu = sum(sp.diff(u[c], v) for c, v in zip(range(3), (x, y, z)))

def lap(f):
    return sp.diff(f, x, 2) + sp.diff(f, y, 2) + sp.diff(f, z, 2)

def adv(f):
    return u[0] * sp.diff(f, x) + u[1] * sp.diff(f, y) + u[2] * sp.diff(f, z)

def graddiv(c):
    v = (x, y, z)[c]
    return sp.diff(divu, v)

# smooth one-sided switches: q_vs = 0, q_v > 0, q_c > 1
S_ev = 0
S_cd = qv * qc + qv
S_ac = qc - 1
S_cr = qc * qr

rhs_rho = -sp.diff(rho * u[0], x) - sp.diff(rho * u[1], y) - sp.diff(rho * u[2], z)

rhs_u = []
for c, v in zip(range(3), (x, y, z)):
    L = mu * lap(u[c]) + (mu + lam) * graddiv(c)
    r = (L - sp.diff(p, v)) / (rho * Qm) - adv(u[c]) \
        + qr * Vr * sp.diff(u[c], z) / Qm - (g if c == 2 else 0)
    rhs_u.append(r)

rhs_T = (lap(T) + qr * Vr * sp.diff(T, z) - (1 + qv) * T * divu
         - (T + 1) * (S_ev - S_cd)) / Qm - adv(T)
rhs_qv = lap(qv) + (S_ev - S_cd) - adv(qv)
rhs_qc = lap(qc) + (S_cd - S_ac - S_cr) - adv(qc)
rhs_qr = (lap(qr) + (S_ac + S_cr - S_ev) - adv(qr)
          + sp.diff(qr * Vr, z) + qr * Vr * sp.diff(sp.log(rho), z))

forcings = {
    "mms_f_rho": -rhs_rho,
    "mms_f_u1": -rhs_u[0],
    "mms_f_u2": -rhs_u[1],
    "mms_f_u3": -rhs_u[2],
    "mms_f_T": -rhs_T,
    "mms_f_qv": -rhs_qv,
    "mms_f_qc": -rhs_qc,
    "mms_f_qr": -rhs_qr,
}

lines = [
    "// Generated by scripts/gen_mms_forcing.py -- do not edit by hand.",
    "// Forcing terms making the manufactured fields an exact steady solution.",
    "#include <cmath>",
    "",
]
for name, expr in forcings.items():
    subexprs, reduced = sp.cse(expr, optimizations="basic")
    lines.append(f"inline double {name}(double x, double y, double z) {{")
    for sym, sub in subexprs:
        lines.append(f"    const double {sym} = {sp.ccode(sub)};")
    lines.append(f"    return {sp.ccode(reduced[0])};")
    lines.append("}")
    lines.append("")

with open("core/src/mms_forcing.inc", "w") as f:
    f.write("\n".join(lines))
print("wrote core/src/mms_forcing.inc")
