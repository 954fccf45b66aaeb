#include "moistns/microphysics.hpp"

#include "moistns/errors.hpp"

namespace moistns {

MicroRates micro_rates(const PhysParams& p, double T, double q_v, double q_c,
                       double q_r, double q_vs) {
    const double Q_m = 1.0 + q_v + q_c + q_r;
    if (!(Q_m > 0.0)) throw DomainError("micro rates require Q_m > 0");
    MicroRates r;
    if (p.simplified_mode) {
        r.S_ev = T * ((1.0 + q_v) / Q_m) * positive_part(q_vs - q_v) * q_r;
        r.S_cd = (q_v - q_vs) * q_c + positive_part(q_v - q_vs);
        r.S_ac = positive_part(q_c - 1.0);
        r.S_cr = q_c * q_r;
    } else {
        r.S_ev = p.c_ev * T * ((p.R_d + p.R_v * q_v) / Q_m) *
                 positive_part(q_vs - q_v) * q_r;
        r.S_cd = p.c_cd * (q_v - q_vs) * q_c +
                 p.c_cn * positive_part(q_v - q_vs) * p.q_cn;
        r.S_ac = p.c_ac * positive_part(q_c - p.q_ac);
        r.S_cr = p.c_cr * q_c * q_r;
    }
    return r;
}

MoistureSources moisture_source_vector(const MicroRates& r) {
    // The S_ac + S_cr lump is formed once so the three sources telescope
    // to zero to rounding.
    const double conv = r.S_ac + r.S_cr;
    MoistureSources s;
    s.src_v = r.S_ev - r.S_cd;
    s.src_c = r.S_cd - conv;
    s.src_r = conv - r.S_ev;
    return s;
}

} // namespace moistns
