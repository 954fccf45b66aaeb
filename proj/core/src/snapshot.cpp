#include "moistns/snapshot.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "moistns/errors.hpp"

namespace moistns {

namespace {

void write_field(std::ofstream& f, const Field& x) {
    const Grid& g = x.grid();
    std::vector<double> buf(static_cast<std::size_t>(g.nx));
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) buf[i] = x(i, j, k);
            f.write(reinterpret_cast<const char*>(buf.data()),
                    static_cast<std::streamsize>(buf.size() * sizeof(double)));
        }
}

void read_field(std::ifstream& f, Field& x) {
    const Grid& g = x.grid();
    std::vector<double> buf(static_cast<std::size_t>(g.nx));
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j) {
            f.read(reinterpret_cast<char*>(buf.data()),
                   static_cast<std::streamsize>(buf.size() * sizeof(double)));
            if (!f) throw ParseError("snapshot truncated");
            for (int i = 0; i < g.nx; ++i) x(i, j, k) = buf[i];
        }
}

} // namespace

void write_snapshot(const std::string& path, const State& s,
                    unsigned long long params_hash) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open snapshot for writing: " + path);
    char header[kSnapshotHeaderSize];
    std::memset(header, ' ', sizeof(header));
    header[kSnapshotHeaderSize - 1] = '\n';
    const int n = std::snprintf(
        header, sizeof(header),
        "%s\nnx=%d ny=%d nz=%d\ntime=%.17g\nparams=%016llx\n"
        "fields=rho_d,u1,u2,u3,T,q_v,q_c,q_r\n",
        kSnapshotMagic, s.grid.nx, s.grid.ny, s.grid.nz, s.t, params_hash);
    if (n < 0 || n >= kSnapshotHeaderSize)
        throw Error("snapshot header overflow");
    header[n] = ' ';  // undo snprintf's terminator, keep the pad printable
    f.write(header, sizeof(header));
    write_field(f, s.rho_d);
    for (int c = 0; c < 3; ++c) write_field(f, s.u[c]);
    write_field(f, s.T);
    write_field(f, s.q_v);
    write_field(f, s.q_c);
    write_field(f, s.q_r);
    if (!f) throw Error("snapshot write failed: " + path);
}

State read_snapshot(const std::string& path, unsigned long long expect_hash,
                    unsigned long long* hash_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open snapshot: " + path);
    char header[kSnapshotHeaderSize + 1] = {0};
    f.read(header, kSnapshotHeaderSize);
    if (!f) throw ParseError("snapshot header truncated");
    if (std::strncmp(header, kSnapshotMagic, std::strlen(kSnapshotMagic)) != 0)
        throw ParseError("bad snapshot magic");
    int nx = 0, ny = 0, nz = 0;
    double t = 0.0;
    unsigned long long hash = 0;
    if (std::sscanf(header + std::strlen(kSnapshotMagic),
                    "\nnx=%d ny=%d nz=%d\ntime=%lg\nparams=%llx", &nx, &ny,
                    &nz, &t, &hash) != 5)
        throw ParseError("bad snapshot header fields");
    if (expect_hash != 0 && hash != expect_hash)
        throw ValidationError("snapshot params hash mismatch");
    if (hash_out) *hash_out = hash;
    State s = make_state(Grid(nx, ny, nz));
    s.t = t;
    read_field(f, s.rho_d);
    for (int c = 0; c < 3; ++c) read_field(f, s.u[c]);
    read_field(f, s.T);
    read_field(f, s.q_v);
    read_field(f, s.q_c);
    read_field(f, s.q_r);
    return s;
}

void write_timeseries(const std::string& path,
                      const std::vector<StepReport>& series,
                      const std::vector<double>& perturbation_norms) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open timeseries for writing: " + path);
    f << "t,dt,min_rho_d,min_q,perturbation_norm\n";
    char line[256];
    for (std::size_t i = 0; i < series.size(); ++i) {
        const StepReport& r = series[i];
        const double pn =
            i < perturbation_norms.size() ? perturbation_norms[i] : 0.0;
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.t, r.dt_used, r.min_rho_d, r.min_q, pn);
        f << line;
    }
}

} // namespace moistns
