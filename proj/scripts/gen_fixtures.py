#!/usr/bin/env python3
"""Generates tests/fixtures/derived.json.

Holds every derived verification constant in one versioned place:
  - reference endpoints of the two 0-D box-model trajectories, integrated
    here with an independent Python RK4 transcription of the source terms
    (dt = 1e-5), so the C++ reference integrator is checked against a
    second, separately written implementation;
  - the frozen thresholds of the property experiments (the stability
    sup-norm ratio 10 is a regression guard calibrated once from a
    reference run, not a theoretical constant).
"""

import json


def box_rhs(s, qvs):
    T, qv, qc, qr = s
    Qm = 1.0 + qv + qc + qr
    S_ev = T * ((1.0 + qv) / Qm) * max(qvs - qv, 0.0) * qr
    S_cd = (qv - qvs) * qc + max(qv - qvs, 0.0)
    S_ac = max(qc - 1.0, 0.0)
    S_cr = qc * qr
    conv = S_ac + S_cr
    dT = -(T + 1.0) * (S_ev - S_cd) / Qm
    return [dT, S_ev - S_cd, S_cd - conv, conv - S_ev]


def rk4(s0, t_end, dt, qvs):
    n = round(t_end / dt)
    s = list(s0)
    for _ in range(n):
        k1 = box_rhs(s, qvs)
        k2 = box_rhs([a + 0.5 * dt * b for a, b in zip(s, k1)], qvs)
        k3 = box_rhs([a + 0.5 * dt * b for a, b in zip(s, k2)], qvs)
        k4 = box_rhs([a + dt * b for a, b in zip(s, k3)], qvs)
        s = [a + dt / 6.0 * (p + 2 * q + 2 * r + w)
             for a, p, q, r, w in zip(s, k1, k2, k3, k4)]
    return s


def main():
    t_end, dt, qvs = 0.1, 1e-5, 0.1
    generic0 = [1.0, 0.3, 0.5, 0.2]
    crossing0 = [1.0, 0.05, 1.05, 0.4]
    generic = rk4(generic0, t_end, dt, qvs)
    crossing = rk4(crossing0, t_end, dt, qvs)

    fixture = {
        "version": 1,
        "box": {
            "q_vs": qvs,
            "t_end": t_end,
            "dt_ref": dt,
            "generic": {
                "initial": dict(zip("T q_v q_c q_r".split(), generic0)),
                "final": dict(zip("T q_v q_c q_r".split(), generic)),
            },
            "crossing": {
                "initial": dict(zip("T q_v q_c q_r".split(), crossing0)),
                "final": dict(zip("T q_v q_c q_r".split(), crossing)),
            },
            "pde_tolerance": 1e-6,
            "oracle_cross_check_tolerance": 1e-9,
        },
        "stability": {
            "norm_ratio_max": 10.0,
            "min_rho_ratio": 0.5,
            "delta": 1e-3,
            "t_end": 1.0,
        },
        "mms": {"min_order": 1.8, "levels": [16, 32, 64]},
        "equivalence": {"min_order": 1.5, "t_end": 0.05},
        "lipschitz": {"jump_tolerance": 1e-12},
        "equilibrium": {"rhs_tolerance": 1e-12, "drift_tolerance": 1e-10},
        "mass": {"relative_drift_tolerance": 1e-8},
        "micro_closure": {"tolerance": 1e-14, "samples": 10000},
    }
    with open("tests/fixtures/derived.json", "w") as f:
        json.dump(fixture, f, indent=2)
        f.write("\n")
    print("wrote tests/fixtures/derived.json")


if __name__ == "__main__":
    main()
