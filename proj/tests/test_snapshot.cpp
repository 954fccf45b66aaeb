#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "moistns/snapshot.hpp"

using namespace moistns;

namespace {

State ripple_state(const Grid& g) {
    State s = equilibrium_state(g, 1.0, 1.0);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double v = std::sin(1e4 * (i + 17 * j + 131 * k));
                s.rho_d(i, j, k) = 1.0 + 0.1 * v;
                s.u[0](i, j, k) = 0.3 * v;
                s.T(i, j, k) = 1.0 + 0.05 * v * v;
                s.q_v(i, j, k) = 0.2 + 0.1 * std::fabs(v);
            }
    s.t = 0.625;
    return s;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("snapshot round-trip is bit exact") {
    const Grid g(8, 6, 10);
    const State s = ripple_state(g);
    write_snapshot("snap_rt.bin", s, 0xabcdefULL);
    unsigned long long hash = 0;
    const State r = read_snapshot("snap_rt.bin", 0, &hash);
    CHECK(hash == 0xabcdefULL);
    CHECK(r.t == s.t);
    CHECK(r.grid.nx == 8);
    CHECK(r.grid.ny == 6);
    CHECK(r.grid.nz == 10);
    CHECK(linf_diff(r.rho_d, s.rho_d) == 0.0);
    for (int c = 0; c < 3; ++c) CHECK(linf_diff(r.u[c], s.u[c]) == 0.0);
    CHECK(linf_diff(r.T, s.T) == 0.0);
    CHECK(linf_diff(r.q_v, s.q_v) == 0.0);
    CHECK(linf_diff(r.q_c, s.q_c) == 0.0);
    CHECK(linf_diff(r.q_r, s.q_r) == 0.0);
    std::remove("snap_rt.bin");
}

TEST_CASE("snapshot header layout is stable") {
    const Grid g(8, 8, 8);
    const State s = ripple_state(g);
    write_snapshot("snap_hdr.bin", s, 0x1ULL);
    const std::string bytes = slurp("snap_hdr.bin");
    REQUIRE(bytes.size() ==
            kSnapshotHeaderSize + 8u * sizeof(double) * 8 * 8 * 8);
    const std::string header = bytes.substr(0, kSnapshotHeaderSize);
    CHECK(header.rfind(kSnapshotMagic, 0) == 0);
    CHECK(header.find("nx=8 ny=8 nz=8") != std::string::npos);
    CHECK(header.find("params=0000000000000001") != std::string::npos);
    CHECK(header.find("fields=rho_d,u1,u2,u3,T,q_v,q_c,q_r") !=
          std::string::npos);
    CHECK(header.back() == '\n');
    std::remove("snap_hdr.bin");
}

TEST_CASE("hash mismatch and header corruption are rejected") {
    const Grid g(8, 8, 8);
    const State s = ripple_state(g);
    write_snapshot("snap_bad.bin", s, 42);
    CHECK_NOTHROW(read_snapshot("snap_bad.bin", 42));
    CHECK_THROWS_AS(read_snapshot("snap_bad.bin", 43), ValidationError);

    std::string bytes = slurp("snap_bad.bin");
    bytes[0] = 'X';  // break the magic
    std::ofstream("snap_mag.bin", std::ios::binary)
        << bytes;
    CHECK_THROWS_AS(read_snapshot("snap_mag.bin"), ParseError);
    CHECK_THROWS_AS(read_snapshot("snap_missing.bin"), ParseError);
    std::remove("snap_bad.bin");
    std::remove("snap_mag.bin");
}

TEST_CASE("truncated payload is rejected") {
    const Grid g(8, 8, 8);
    const State s = ripple_state(g);
    write_snapshot("snap_full.bin", s, 0);
    const std::string bytes = slurp("snap_full.bin");
    std::ofstream("snap_cut.bin", std::ios::binary)
        << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_AS(read_snapshot("snap_cut.bin"), ParseError);
    std::remove("snap_full.bin");
    std::remove("snap_cut.bin");
}

TEST_CASE("timeseries format") {
    std::vector<StepReport> series(2);
    series[0].t = 0.5;
    series[0].dt_used = 0.25;
    series[0].min_rho_d = 1.0;
    series[0].min_q = 0.0;
    series[1].t = 0.75;
    series[1].dt_used = 0.25;
    series[1].min_rho_d = 0.5;
    series[1].min_q = 0.0;
    write_timeseries("ts_test.csv", series, {0.0, 0.125});
    CHECK(slurp("ts_test.csv") ==
          "t,dt,min_rho_d,min_q,perturbation_norm\n"
          "0.5,0.25,1,0,0\n"
          "0.75,0.25,0.5,0,0.125\n");
    std::remove("ts_test.csv");
}
