#include <doctest.h>

#include <cmath>
#include <random>

#include "moistns/microphysics.hpp"

using namespace moistns;

TEST_CASE("rates at reference points") {
    PhysParams p;  // simplified
    // dry state: nothing happens
    MicroRates r = micro_rates(p, 1.0, 0.0, 0.0, 0.0, 0.0);
    CHECK(r.S_ev == 0.0);
    CHECK(r.S_cd == 0.0);
    CHECK(r.S_ac == 0.0);
    CHECK(r.S_cr == 0.0);
    // autoconversion switch at q_c = 2 with everything else off
    r = micro_rates(p, 1.0, 0.0, 2.0, 0.0, 0.0);
    CHECK(r.S_ac == 1.0);
    CHECK(r.S_cd == 0.0);
    // subsaturated air evaporates rain
    r = micro_rates(p, 1.0, 0.1, 0.0, 0.5, 0.3);
    CHECK(r.S_ev == doctest::Approx(1.0 * (1.1 / 1.6) * 0.2 * 0.5));
    CHECK(r.S_cd == doctest::Approx((0.1 - 0.3) * 0.0));
}

TEST_CASE("source vector telescopes to zero") {
    PhysParams p;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int it = 0; it < 1000; ++it) {
        const double T = 2.0 * U(rng);
        const double qv = U(rng), qc = 2.0 * U(rng), qr = U(rng);
        const double qvs = 0.5 * U(rng);
        p.simplified_mode = it % 2 == 0;
        const MoistureSources s =
            moisture_source_vector(micro_rates(p, T, qv, qc, qr, qvs));
        CHECK(std::fabs(s.src_v + s.src_c + s.src_r) <= 1e-14);
    }
}

TEST_CASE("switch terms are Lipschitz across their kinks") {
    PhysParams p;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int it = 0; it < 500; ++it) {
        const double T = 2.0 * U(rng), qc = 2.0 * U(rng), qr = U(rng);
        const double qvs = 0.5 * U(rng);
        // straddle q_v = q_vs
        const double d = std::pow(10.0, -12.0 * U(rng));
        const MicroRates lo = micro_rates(p, T, qvs - d, qc, qr, qvs);
        const MicroRates hi = micro_rates(p, T, qvs + d, qc, qr, qvs);
        // local Lipschitz bounds of the q_v dependence
        const double L_cd = qc + 1.0;
        const double L_ev = T * (1.0 + qvs + d) * qr;  // coarse bound, Q_m >= 1
        CHECK(std::fabs(hi.S_cd - lo.S_cd) <= L_cd * 2 * d + 1e-12);
        CHECK(std::fabs(hi.S_ev - lo.S_ev) <= L_ev * 2 * d + 1e-12);
    }
    for (int it = 0; it < 500; ++it) {
        // straddle q_c = 1 (autoconversion)
        const double d = std::pow(10.0, -12.0 * U(rng));
        const MicroRates lo = micro_rates(p, 1.0, 0.0, 1.0 - d, 0.0, 0.0);
        const MicroRates hi = micro_rates(p, 1.0, 0.0, 1.0 + d, 0.0, 0.0);
        CHECK(std::fabs(hi.S_ac - lo.S_ac) <= 2 * d + 1e-12);
    }
}

TEST_CASE("no jump at the kink itself") {
    PhysParams p;
    const double at = micro_rates(p, 1.3, 0.2, 1.0, 0.4, 0.2).S_ac;
    const double above =
        micro_rates(p, 1.3, 0.2, std::nextafter(1.0, 2.0), 0.4, 0.2).S_ac;
    const double below =
        micro_rates(p, 1.3, 0.2, std::nextafter(1.0, 0.0), 0.4, 0.2).S_ac;
    CHECK(std::fabs(above - at) <= 1e-12);
    CHECK(std::fabs(at - below) <= 1e-12);

    const double qvs = 0.25;
    const MicroRates at2 = micro_rates(p, 1.0, qvs, 0.5, 0.3, qvs);
    const MicroRates up = micro_rates(p, 1.0, std::nextafter(qvs, 1.0), 0.5, 0.3, qvs);
    const MicroRates dn = micro_rates(p, 1.0, std::nextafter(qvs, 0.0), 0.5, 0.3, qvs);
    CHECK(std::fabs(up.S_cd - at2.S_cd) <= 1e-12);
    CHECK(std::fabs(at2.S_cd - dn.S_cd) <= 1e-12);
    CHECK(std::fabs(up.S_ev - at2.S_ev) <= 1e-12);
    CHECK(std::fabs(at2.S_ev - dn.S_ev) <= 1e-12);
}

TEST_CASE("general-mode rate constants scale the switches") {
    PhysParams p;
    p.simplified_mode = false;
    p.c_ac = 2.0;
    p.q_ac = 0.5;
    MicroRates r = micro_rates(p, 1.0, 0.0, 1.5, 0.0, 0.0);
    CHECK(r.S_ac == doctest::Approx(2.0 * 1.0));
    p.c_cr = 3.0;
    r = micro_rates(p, 1.0, 0.0, 0.5, 0.25, 0.0);
    CHECK(r.S_cr == doctest::Approx(3.0 * 0.5 * 0.25));
    CHECK_THROWS_AS(micro_rates(p, 1.0, -2.0, 0.0, 0.0, 0.0), DomainError);
}
