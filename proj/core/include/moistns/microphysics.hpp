#pragma once

#include "moistns/params.hpp"

namespace moistns {

// f+ = max(0, f): exact, no smoothing. The phase-change switches are kept
// non-differentiable on purpose, so the time integrator must treat them
// explicitly.
inline double positive_part(double f) { return f > 0.0 ? f : 0.0; }

// Pointwise phase-change rates: evaporation of rain, condensation (can be
// negative: re-evaporation of cloud), autoconversion, collection.
struct MicroRates {
    double S_ev;
    double S_cd;
    double S_ac;
    double S_cr;
};

// Evaluates the rates at one point. q_vs is the local saturation ratio.
// Requires Q_m = 1 + q_v + q_c + q_r > 0.
MicroRates micro_rates(const PhysParams& p, double T, double q_v, double q_c,
                       double q_r, double q_vs);

// Net sources for (q_v, q_c, q_r). Their sum telescopes to zero: phase
// changes only move water between categories (sedimentation is handled by
// the transport code).
struct MoistureSources {
    double src_v;
    double src_c;
    double src_r;
};

MoistureSources moisture_source_vector(const MicroRates& r);

} // namespace moistns
