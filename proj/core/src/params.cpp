#include "moistns/params.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace moistns {

void PhysParams::validate() const {
    if (!(mu > 0.0)) throw ValidationError("mu > 0 violated");
    if (!(2.0 * mu + lambda > 0.0)) throw ValidationError("2*mu + lambda > 0 violated");
    if (!(kappa > 0.0)) throw ValidationError("kappa > 0 violated");
    if (!(c_pd > R_d)) throw ValidationError("c_pd > R_d violated (gamma undefined)");
    if (!(R_d > 0.0)) throw ValidationError("R_d > 0 violated");
    if (!(R_v > 0.0)) throw ValidationError("R_v > 0 violated");
    if (!(c_pv > 0.0)) throw ValidationError("c_pv > 0 violated");
    if (!(c_1 > 0.0)) throw ValidationError("c_1 > 0 violated");
    if (!(p_ref > 0.0)) throw ValidationError("p_ref > 0 violated");
    if (!(T_ref > 0.0)) throw ValidationError("T_ref > 0 violated");
    if (!(L_ref > 0.0)) throw ValidationError("L_ref > 0 violated");
    if (!(c_ev > 0.0)) throw ValidationError("c_ev > 0 violated");
    if (!(c_cd > 0.0)) throw ValidationError("c_cd > 0 violated");
    if (!(c_cn > 0.0)) throw ValidationError("c_cn > 0 violated");
    if (!(c_ac > 0.0)) throw ValidationError("c_ac > 0 violated");
    if (!(c_cr > 0.0)) throw ValidationError("c_cr > 0 violated");
    if (!(q_cn > 0.0)) throw ValidationError("q_cn > 0 violated");
    if (!(q_ac > 0.0)) throw ValidationError("q_ac > 0 violated");
    if (!(q_vs_star >= 0.0) || !std::isfinite(q_vs_star))
        throw ValidationError("0 <= q_vs_star < inf violated");
    if (q_vs_mode == QvsMode::Constant) {
        if (!(q_vs_value >= 0.0 && q_vs_value <= q_vs_star))
            throw ValidationError("0 <= q_vs <= q_vs_star violated");
    }
    if (!(g >= 0.0)) throw ValidationError("g >= 0 violated");
    if (!(V_r_value >= 0.0)) throw ValidationError("V_r >= 0 violated");
}

double gamma_coeff(const PhysParams& p) {
    if (!(p.c_pd > p.R_d)) throw ValidationError("c_pd > R_d violated (gamma undefined)");
    return p.c_pd / (p.c_pd - p.R_d);
}

void RunConfig::validate() const {
    if (nx < 4 || ny < 4 || nz < 4) throw ValidationError("grid counts must be >= 4");
    if (!(t_end > 0.0)) throw ValidationError("t_end > 0 violated");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ValidationError("cfl in (0,1] violated");
    if (dt < 0.0) throw ValidationError("dt must be positive or auto");
    if (snapshot_every < 1) throw ValidationError("snapshot_every must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "': cannot parse number '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int n = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "': cannot parse integer '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("key '" + key + "': cannot parse boolean '" + v + "'");
}

} // namespace

Config parse_config_text(const std::string& text) {
    Config cfg;
    PhysParams& p = cfg.phys;
    RunConfig& r = cfg.run;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ParseError("line " + std::to_string(lineno) + ": empty key or value");

        if (key == "mu") p.mu = to_double(key, val);
        else if (key == "lambda") p.lambda = to_double(key, val);
        else if (key == "kappa") p.kappa = to_double(key, val);
        else if (key == "g") p.g = to_double(key, val);
        else if (key == "R_d") p.R_d = to_double(key, val);
        else if (key == "R_v") p.R_v = to_double(key, val);
        else if (key == "c_pd") p.c_pd = to_double(key, val);
        else if (key == "c_pv") p.c_pv = to_double(key, val);
        else if (key == "c_1") p.c_1 = to_double(key, val);
        else if (key == "p_ref") p.p_ref = to_double(key, val);
        else if (key == "T_ref") p.T_ref = to_double(key, val);
        else if (key == "L_ref") p.L_ref = to_double(key, val);
        else if (key == "c_ev") p.c_ev = to_double(key, val);
        else if (key == "c_cd") p.c_cd = to_double(key, val);
        else if (key == "c_cn") p.c_cn = to_double(key, val);
        else if (key == "c_ac") p.c_ac = to_double(key, val);
        else if (key == "c_cr") p.c_cr = to_double(key, val);
        else if (key == "q_cn") p.q_cn = to_double(key, val);
        else if (key == "q_ac") p.q_ac = to_double(key, val);
        else if (key == "q_vs_star") p.q_vs_star = to_double(key, val);
        else if (key == "q_vs_mode") {
            if (val == "zero") p.q_vs_mode = QvsMode::Zero;
            else if (val == "constant") p.q_vs_mode = QvsMode::Constant;
            else if (val == "affine") p.q_vs_mode = QvsMode::Affine;
            else throw ParseError("q_vs_mode must be zero|constant|affine");
        }
        else if (key == "q_vs_value") p.q_vs_value = to_double(key, val);
        else if (key == "q_vs_c0") p.q_vs_c0 = to_double(key, val);
        else if (key == "q_vs_cp") p.q_vs_cp = to_double(key, val);
        else if (key == "q_vs_cT") p.q_vs_cT = to_double(key, val);
        else if (key == "V_r_mode") {
            if (val == "constant") p.V_r_mode = VrMode::Constant;
            else if (val == "profile") p.V_r_mode = VrMode::Profile;
            else throw ParseError("V_r_mode must be constant|profile");
        }
        else if (key == "V_r_value") p.V_r_value = to_double(key, val);
        else if (key == "simplified_mode") p.simplified_mode = to_bool(key, val);
        else if (key == "nx") r.nx = to_int(key, val);
        else if (key == "ny") r.ny = to_int(key, val);
        else if (key == "nz") r.nz = to_int(key, val);
        else if (key == "t_end") r.t_end = to_double(key, val);
        else if (key == "dt") r.dt = (val == "auto") ? 0.0 : to_double(key, val);
        else if (key == "cfl") r.cfl = to_double(key, val);
        else if (key == "output_dir") r.output_dir = val;
        else if (key == "snapshot_every") r.snapshot_every = to_int(key, val);
        else if (key == "mode") {
            if (val == "eulerian") r.mode = RunMode::Eulerian;
            else if (val == "lagrangian") r.mode = RunMode::Lagrangian;
            else if (val == "both") r.mode = RunMode::Both;
            else throw ParseError("mode must be eulerian|lagrangian|both");
        }
        else if (key == "scheme") {
            if (val == "euler") r.scheme = Scheme::ImexEuler;
            else if (val == "midpoint") r.scheme = Scheme::ImexMidpoint;
            else throw ParseError("scheme must be euler|midpoint");
        }
        else if (key == "init") {
            if (val == "equilibrium") r.init = InitKind::Equilibrium;
            else if (val == "bump") r.init = InitKind::Bump;
            else throw ParseError("init must be equilibrium|bump");
        }
        else if (key == "rho_bar") r.rho_bar = to_double(key, val);
        else if (key == "T_bar") r.T_bar = to_double(key, val);
        else if (key == "delta") r.delta = to_double(key, val);
        else if (key == "u0_amplitude") r.u0_amplitude = to_double(key, val);
        else if (key == "freeze_velocity") r.freeze_velocity = to_bool(key, val);
        else if (key == "micro_enabled") r.micro_enabled = to_bool(key, val);
        else if (key == "negativity_floor") r.negativity_floor = to_double(key, val);
        else throw ParseError("unknown key '" + key + "'");
    }

    p.validate();
    r.validate();
    if (!(r.rho_bar > 0.0)) throw ValidationError("rho_bar > 0 violated");
    if (!(r.T_bar >= 0.0)) throw ValidationError("T_bar >= 0 violated");
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::string canonical_params_text(const PhysParams& p) {
    char buf[4096];
    std::snprintf(buf, sizeof(buf),
                  "mu=%.17g lambda=%.17g kappa=%.17g g=%.17g "
                  "R_d=%.17g R_v=%.17g c_pd=%.17g c_pv=%.17g c_1=%.17g "
                  "p_ref=%.17g T_ref=%.17g L_ref=%.17g "
                  "c_ev=%.17g c_cd=%.17g c_cn=%.17g c_ac=%.17g c_cr=%.17g "
                  "q_cn=%.17g q_ac=%.17g q_vs_star=%.17g "
                  "q_vs_mode=%d q_vs_value=%.17g q_vs_c0=%.17g q_vs_cp=%.17g q_vs_cT=%.17g "
                  "V_r_mode=%d V_r_value=%.17g simplified=%d",
                  p.mu, p.lambda, p.kappa, p.g, p.R_d, p.R_v, p.c_pd, p.c_pv,
                  p.c_1, p.p_ref, p.T_ref, p.L_ref, p.c_ev, p.c_cd, p.c_cn,
                  p.c_ac, p.c_cr, p.q_cn, p.q_ac, p.q_vs_star,
                  static_cast<int>(p.q_vs_mode), p.q_vs_value, p.q_vs_c0,
                  p.q_vs_cp, p.q_vs_cT, static_cast<int>(p.V_r_mode),
                  p.V_r_value, p.simplified_mode ? 1 : 0);
    return std::string(buf);
}

unsigned long long params_hash(const PhysParams& p) {
    // FNV-1a 64-bit
    const std::string s = canonical_params_text(p);
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace moistns
