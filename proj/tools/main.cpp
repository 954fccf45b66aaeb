// Command-line driver: simulation runs, snapshot/timeseries output, and the
// verification experiments. Exit codes: 0 ok, 1 validation error, 2 solver
// failure, 3 verification tolerance exceeded.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "moistns/lagrangian.hpp"
#include "moistns/snapshot.hpp"
#include "moistns/timestepper.hpp"
#include "moistns/verify.hpp"

namespace fs = std::filesystem;
using namespace moistns;

namespace {

constexpr double kPi = 3.14159265358979323846;

State make_initial(const Config& cfg) {
    const RunConfig& rc = cfg.run;
    const Grid g(rc.nx, rc.ny, rc.nz);
    State s = equilibrium_state(g, rc.rho_bar, rc.T_bar);
    if (rc.init == InitKind::Equilibrium && rc.u0_amplitude == 0.0) return s;
    const double d = rc.init == InitKind::Bump ? rc.delta : 0.0;
    const double ua = rc.u0_amplitude;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j), z = g.z(k);
                const double cz = std::cos(kPi * z), sz = std::sin(kPi * z);
                const double cx = std::cos(2 * kPi * x), sx = std::sin(2 * kPi * x);
                const double cy = std::cos(2 * kPi * y), sy = std::sin(2 * kPi * y);
                s.rho_d(i, j, k) += d * cx * sy * cz;
                s.u[0](i, j, k) = (ua + d) * sx * cy * sz;
                s.u[1](i, j, k) = (ua + d) * cx * sy * sz;
                s.u[2](i, j, k) = 0.8 * (ua + d) * sx * sy * sz;
                s.T(i, j, k) += d * cx * cy * cz;
                s.q_v(i, j, k) = d * (0.5 + 0.49 * sx * cy * cz);
                s.q_c(i, j, k) += d * cx * sy * cz;
                s.q_r(i, j, k) = d * (0.5 + 0.49 * cx * cy * cz);
            }
    return s;
}

std::string snap_path(const std::string& dir, int index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "snapshot_%06d.bin", index);
    return dir + "/" + buf;
}

int run_eulerian(const Config& cfg, const std::string& out_dir) {
    State s = make_initial(cfg);
    const unsigned long long hash = params_hash(cfg.phys);
    // norm is sampled at snapshot steps and forward-filled in between
    std::vector<std::pair<int, double>> sampled;
    auto on_snapshot = [&](const State& st, const StepReport&, int index) {
        write_snapshot(snap_path(out_dir, index), st, hash);
        sampled.emplace_back(
            index - 1, perturbation_norm(st, cfg.run.rho_bar, cfg.run.T_bar));
    };
    RhsOptions opts;
    opts.freeze_velocity = cfg.run.freeze_velocity;
    opts.micro = cfg.run.micro_enabled;
    std::vector<StepReport> series;
    try {
        series = run(s, cfg, opts, on_snapshot);
    } catch (const Error& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 2;
    }
    std::vector<double> norms(series.size(), 0.0);
    for (auto [idx, v] : sampled)
        if (idx >= 0 && idx < (int)norms.size()) norms[idx] = v;
    for (std::size_t i = 1; i < norms.size(); ++i)
        if (norms[i] == 0.0) norms[i] = norms[i - 1];
    write_timeseries(out_dir + "/timeseries.csv", series, norms);
    write_snapshot(out_dir + "/final.bin", s, hash);
    std::printf("eulerian run: %zu steps to t = %.6g\n", series.size(), s.t);
    return 0;
}

int run_lagrangian(const Config& cfg, const std::string& out_dir) {
    State s0 = make_initial(cfg);
    const double dt =
        cfg.run.dt > 0.0 ? cfg.run.dt : auto_dt(s0, cfg.phys, cfg.run.cfl);
    try {
        LagrangianStepper ls(s0, cfg.phys);
        double t = 0.0;
        int steps = 0;
        while (t < cfg.run.t_end - 1e-14) {
            const double h = std::min(dt, cfg.run.t_end - t);
            ls.step(h);
            t += h;
            ++steps;
        }
        State out = ls.state();
        out.t = t;
        write_snapshot(out_dir + "/final_lagrangian.bin", out,
                       params_hash(cfg.phys));
        std::printf("lagrangian run: %d steps to t = %.6g (map deviation %.3g)\n",
                    steps, t, ls.map().deviation());
    } catch (const Error& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 2;
    }
    return 0;
}

int cmd_run(const std::string& config_path, std::string out_dir,
            std::string mode_override) {
    Config cfg;
    try {
        cfg = load_config(config_path);
        if (!mode_override.empty()) {
            if (mode_override == "eulerian") cfg.run.mode = RunMode::Eulerian;
            else if (mode_override == "lagrangian") cfg.run.mode = RunMode::Lagrangian;
            else if (mode_override == "both") cfg.run.mode = RunMode::Both;
            else throw ValidationError("unknown mode: " + mode_override);
        }
        if (!out_dir.empty()) cfg.run.output_dir = out_dir;
        fs::create_directories(cfg.run.output_dir);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    const std::string& dir = cfg.run.output_dir;
    if (cfg.run.mode == RunMode::Eulerian) return run_eulerian(cfg, dir);
    if (cfg.run.mode == RunMode::Lagrangian) return run_lagrangian(cfg, dir);
    // both: run the frames independently, then report the pullback discrepancy
    if (int rc = run_eulerian(cfg, dir)) return rc;
    if (int rc = run_lagrangian(cfg, dir)) return rc;
    try {
        State s0 = make_initial(cfg);
        const double dt =
            cfg.run.dt > 0.0 ? cfg.run.dt : auto_dt(s0, cfg.phys, cfg.run.cfl);
        const double d = equivalence_check(s0, cfg.run.t_end, dt, cfg.phys);
        std::printf("frame discrepancy (pullback): %.6e\n", d);
    } catch (const Error& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 2;
    }
    return 0;
}

bool report(const char* name, bool ok, double value) {
    std::printf("%-34s %s   (%.6e)\n", name, ok ? "PASS" : "FAIL", value);
    return ok;
}

int verify_equilibrium() {
    PhysParams p;  // q_vs = 0, g = 0 defaults
    const double r1 = equilibrium_residual(p, Grid(32, 32, 32), 1.0, 1.0);
    const double r2 = equilibrium_residual(p, Grid(32, 32, 32), 2.0, 0.0);
    bool ok = report("equilibrium residual (1, 1)", r1 <= 1e-12, r1);
    ok &= report("equilibrium residual (2, 0)", r2 <= 1e-12, r2);
    return ok ? 0 : 3;
}

int verify_mms(const std::vector<int>& levels, const std::string& out_dir) {
    bool ok = true;
    FILE* csv = nullptr;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        csv = std::fopen((out_dir + "/mms.csv").c_str(), "w");
        if (csv) std::fprintf(csv, "case,n,error,observed_order\n");
    }
    for (auto kind : {MMSCaseKind::DiffusionOnly, MMSCaseKind::Coupled}) {
        const char* name =
            kind == MMSCaseKind::DiffusionOnly ? "diffusion" : "coupled";
        const auto rows = mms_convergence(kind, levels);
        std::printf("%s case:\n", name);
        for (const auto& r : rows) {
            std::printf("  n = %3d   error = %.6e   order = %.3f\n", r.n,
                        r.error, r.observed_order);
            if (csv)
                std::fprintf(csv, "%s,%d,%.17g,%.17g\n", name, r.n, r.error,
                             r.observed_order);
        }
        const double order = rows.back().observed_order;
        ok &= report((std::string(name) + " observed order").c_str(),
                     order >= 1.8, order);
    }
    if (csv) std::fclose(csv);
    return ok ? 0 : 3;
}

int verify_box() {
    PhysParams p;
    p.q_vs_mode = QvsMode::Constant;
    p.q_vs_value = 0.1;
    const double t_end = 0.1, pde_dt = 2.5e-4, dt_ref = 1e-5;
    BoxState generic{1.0, 0.3, 0.5, 0.2, 0.0};
    BoxState crossing{1.0, 0.05, 1.05, 0.4, 0.0};
    const double d1 = box_pde_discrepancy(generic, t_end, pde_dt, dt_ref, p);
    const double d2 = box_pde_discrepancy(crossing, t_end, pde_dt, dt_ref, p);
    bool ok = report("box oracle (generic)", d1 <= 1e-6, d1);
    ok &= report("box oracle (q_c = 1 crossing)", d2 <= 1e-6, d2);
    return ok ? 0 : 3;
}

int verify_stability(double delta, double t_end) {
    PhysParams p;
    const StabilityReport rep = stability_experiment(delta, t_end, p, 32);
    bool ok = report("perturbation norm ratio", rep.norm_ratio <= 10.0,
                     rep.norm_ratio);
    ok &= report("min rho_d ratio", rep.min_rho_ratio >= 0.5,
                 rep.min_rho_ratio);
    return ok ? 0 : 3;
}

int verify_lagrangian(double t_end) {
    PhysParams p;
    bool ok = true;

    // map inverse identity after a few advection steps
    {
        const Grid g(16, 16, 16);
        LagrangianMap map(g);
        VectorField u = make_velocity(g);
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double x = g.x(i), y = g.y(j), z = g.z(k);
                    const double sz = std::sin(kPi * z);
                    u[0](i, j, k) = 0.2 * std::sin(2 * kPi * x) * sz;
                    u[1](i, j, k) = 0.2 * std::sin(2 * kPi * y) * sz;
                    u[2](i, j, k) = 0.15 * std::cos(2 * kPi * x) * sz;
                }
        map.set_initial_velocity(u);
        for (int it = 0; it < 5; ++it) map.advance(u, 0.05);
        double dev = 0.0;
        const TensorField& Z = map.Z();
        const TensorField& GX = map.gradX();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int k = 0; k < g.nz; ++k)
                    for (int j = 0; j < g.ny; ++j)
                        for (int i = 0; i < g.nx; ++i) {
                            double v = 0.0;
                            for (int c = 0; c < 3; ++c)
                                v += Z[3 * a + c](i, j, k) *
                                     GX[3 * c + b](i, j, k);
                            dev = std::max(dev,
                                           std::fabs(v - (a == b ? 1.0 : 0.0)));
                        }
        ok &= report("Z gradX = Id", dev <= 1e-10, dev);
    }

    // transformed operators reduce to the flat ones exactly at the identity
    {
        const Grid g(12, 12, 12);
        const LagrangianMap id = identity_map(g);
        const auto dZ = z_derivatives(id.Z());
        Field f(g, BcKind::Neumann);
        VectorField u = make_velocity(g);
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double x = g.x(i), y = g.y(j), z = g.z(k);
                    f(i, j, k) = std::sin(2 * kPi * x) * std::cos(2 * kPi * y) *
                                 std::cos(kPi * z);
                    const double sz = std::sin(kPi * z);
                    u[0](i, j, k) = std::sin(2 * kPi * x) * sz;
                    u[1](i, j, k) = std::cos(2 * kPi * y) * sz;
                    u[2](i, j, k) = std::sin(2 * kPi * (x + y)) * sz;
                }
        const double dl = linf_diff(transformed_laplacian(f, id.Z(), dZ),
                                    laplacian(f));
        const VectorField t2 = transformed_divgrad(u, id.Z(), dZ);
        const VectorField gd = graddiv(u);
        double dg = 0.0;
        for (int c = 0; c < 3; ++c) dg = std::max(dg, linf_diff(t2[c], gd[c]));
        ok &= report("L1 = lap at Z = Id (bitwise)", dl == 0.0, dl);
        ok &= report("L2 = graddiv at Z = Id (bitwise)", dg == 0.0, dg);
    }

    // frame-equivalence self-convergence under joint (h, dt ~ h^2) refinement
    {
        std::vector<double> disc;
        std::vector<int> ns = {8, 16, 32};
        for (int n : ns) {
            const Grid g(n, n, n);
            State s0 = equilibrium_state(g, 1.0, 1.0);
            for (int k = 0; k < g.nz; ++k)
                for (int j = 0; j < g.ny; ++j)
                    for (int i = 0; i < g.nx; ++i) {
                        const double x = g.x(i), y = g.y(j), z = g.z(k);
                        const double cz = std::cos(kPi * z),
                                     sz = std::sin(kPi * z);
                        const double a = 0.05;
                        s0.rho_d(i, j, k) += a * std::cos(2 * kPi * x) * cz;
                        s0.u[0](i, j, k) = a * std::sin(2 * kPi * x) * sz;
                        s0.u[1](i, j, k) = a * std::sin(2 * kPi * y) * sz;
                        s0.u[2](i, j, k) =
                            a * std::cos(2 * kPi * x) * std::sin(2 * kPi * y) * sz;
                        s0.T(i, j, k) += a * std::cos(2 * kPi * y) * cz;
                        s0.q_v(i, j, k) =
                            a * (0.5 + 0.4 * std::sin(2 * kPi * x) * cz);
                        s0.q_c(i, j, k) += a * std::cos(2 * kPi * x) * cz;
                        s0.q_r(i, j, k) =
                            a * (0.5 + 0.4 * std::cos(2 * kPi * y) * cz);
                    }
            const double dt = 0.2 * g.hz * g.hz;
            const int steps = std::max(1, (int)std::lround(t_end / dt));
            disc.push_back(equivalence_check(s0, t_end, t_end / steps, p));
        }
        std::printf("equivalence discrepancies:");
        for (double d : disc) std::printf(" %.6e", d);
        std::printf("\n");
        const double order =
            std::log2(disc[disc.size() - 2] / disc.back());
        ok &= report("equivalence self-convergence order", order >= 1.5, order);
    }
    return ok ? 0 : 3;
}

int verify_linop() {
    PhysParams p;
    const std::vector<double> eps = {1e-3, 1e-4, 1e-5, 1e-6};
    const auto rows = linearized_operator_residual(p, Grid(16, 16, 16), eps);
    for (const auto& r : rows)
        std::printf("  eps = %.1e   residual = %.6e\n", r.eps, r.residual);
    bool mono = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        mono &= rows[i].residual < rows[i - 1].residual;
    const double slope = std::log(rows.front().residual / rows.back().residual) /
                         std::log(rows.front().eps / rows.back().eps);
    bool ok = report("residual monotone in eps", mono, (double)mono);
    ok &= report("log-log slope", slope >= 0.9, slope);
    return ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured-grid moist compressible flow simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, mode;
    auto* run_cmd = app.add_subcommand("run", "integrate a configured case");
    run_cmd->add_option("--config", config_path, "config file (key = value)")
        ->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--mode", mode, "eulerian|lagrangian|both");

    std::string what;
    std::vector<int> levels = {16, 32, 64};
    double t_end = -1.0, delta = 1e-3;
    std::string verify_out;
    auto* ver_cmd = app.add_subcommand("verify", "run a verification suite");
    ver_cmd->add_option("what", what, "mms|box|equilibrium|stability|lagrangian|linop")
        ->required();
    ver_cmd->add_option("--levels", levels, "grid levels")->delimiter(',');
    ver_cmd->add_option("--t-end", t_end, "final time");
    ver_cmd->add_option("--delta", delta, "perturbation amplitude");
    ver_cmd->add_option("--out", verify_out, "artifact directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(config_path, out_dir, mode);
        if (what == "equilibrium") return verify_equilibrium();
        if (what == "mms") return verify_mms(levels, verify_out);
        if (what == "box") return verify_box();
        if (what == "stability")
            return verify_stability(delta, t_end > 0 ? t_end : 1.0);
        if (what == "lagrangian")
            return verify_lagrangian(t_end > 0 ? t_end : 0.05);
        if (what == "linop") return verify_linop();
        std::fprintf(stderr, "unknown verify target: %s\n", what.c_str());
        return 1;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 2;
    }
}
