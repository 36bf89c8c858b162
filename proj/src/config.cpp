#include "hvmhd/config.hpp"

#include "hvmhd/spectral_ops.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

namespace hvmhd {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

// Parsing scratchpad: values land here first, the validation pass below
// turns them into a RunConfig or a full list of violations.
struct Collector {
    RunConfig cfg;
    std::vector<std::string> errs;
    bool saw_n = false, saw_t_final = false;
    bool saw_preset = false;
    int explicit_constant_keys = 0;
    std::string dt_text = "auto";

    void fail(const std::string& msg) { errs.push_back(msg); }

    std::optional<double> number(const std::string& where, const std::string& value) {
        const char* b = value.data();
        const char* e = b + value.size();
        double v = 0.0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e) {
            fail(where + ": expected a number, got '" + value + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<long long> integer(const std::string& where, const std::string& value) {
        const char* b = value.data();
        const char* e = b + value.size();
        long long v = 0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e) {
            fail(where + ": expected an integer, got '" + value + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::uint64_t> unsigned64(const std::string& where, const std::string& value) {
        const char* b = value.data();
        const char* e = b + value.size();
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e) {
            fail(where + ": expected a nonnegative integer, got '" + value + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<bool> boolean(const std::string& where, const std::string& value) {
        if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
        if (value == "false" || value == "0" || value == "off" || value == "no") return false;
        fail(where + ": expected true or false, got '" + value + "'");
        return std::nullopt;
    }

    void mode(const std::string& where, const std::string& value, std::vector<FourierMode>& dst) {
        std::vector<std::string> tok = split_ws(value);
        if (tok.size() != 9) {
            fail(where + ": expected 9 values (kx ky kz ccx ccy ccz csx csy csz), got " +
                 std::to_string(tok.size()));
            return;
        }
        FourierMode m;
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            auto v = integer(where, tok[static_cast<std::size_t>(i)]);
            if (!v) { ok = false; continue; }
            m.k[static_cast<std::size_t>(i)] = static_cast<int>(*v);
        }
        for (int i = 0; i < 6; ++i) {
            auto v = number(where, tok[static_cast<std::size_t>(3 + i)]);
            if (!v) { ok = false; continue; }
            (i < 3 ? m.cos_amp[static_cast<std::size_t>(i)]
                   : m.sin_amp[static_cast<std::size_t>(i - 3)]) = *v;
        }
        if (ok) dst.push_back(m);
    }
};

std::string mode_str(const FourierMode& m) {
    return "(" + std::to_string(m.k[0]) + " " + std::to_string(m.k[1]) + " " +
           std::to_string(m.k[2]) + ")";
}

void handle_key(Collector& c, const std::string& section, const std::string& key,
                const std::string& value) {
    RunConfig& cfg = c.cfg;
    const std::string where = section + "." + key;

    if (section == "grid") {
        if (key == "n") {
            if (auto v = c.integer(where, value)) { cfg.n = static_cast<int>(*v); c.saw_n = true; }
        } else if (key == "dealias_fraction") {
            if (auto v = c.number(where, value)) cfg.dealias_fraction = *v;
        } else {
            c.fail("[grid]: unknown key '" + key + "'");
        }
    } else if (section == "mollifier") {
        if (key == "epsilon") {
            if (auto v = c.number(where, value)) cfg.epsilon = *v;
        } else {
            c.fail("[mollifier]: unknown key '" + key + "'");
        }
    } else if (section == "time") {
        if (key == "dt") {
            c.dt_text = value;
            if (value == "auto") {
                cfg.dt_auto = true;
            } else if (auto v = c.number(where, value)) {
                cfg.dt_auto = false;
                cfg.dt = *v;
            }
        } else if (key == "t_final") {
            if (auto v = c.number(where, value)) { cfg.t_final = *v; c.saw_t_final = true; }
        } else if (key == "cfl_safety") {
            if (auto v = c.number(where, value)) cfg.cfl_safety = *v;
        } else {
            c.fail("[time]: unknown key '" + key + "'");
        }
    } else if (section == "particles") {
        if (key == "count") {
            if (auto v = c.unsigned64(where, value)) cfg.marker_count = *v;
        } else if (key == "family") {
            cfg.family = value;
        } else if (key == "M") {
            if (auto v = c.number(where, value)) cfg.ball.M = *v;
        } else if (key == "v0") {
            if (auto v = c.number(where, value)) cfg.ball.v0 = *v;
        } else if (key == "mod_amp") {
            if (auto v = c.number(where, value)) cfg.ball.mod_amp = *v;
        } else if (key == "mod_k") {
            if (auto v = c.integer(where, value)) cfg.ball.mod_k = static_cast<int>(*v);
        } else {
            c.fail("[particles]: unknown key '" + key + "'");
        }
    } else if (section == "fields") {
        if (key == "u_mode") {
            c.mode(where, value, cfg.u_modes);
        } else if (key == "b_mode") {
            c.mode(where, value, cfg.b_modes);
        } else {
            c.fail("[fields]: unknown key '" + key + "'");
        }
    } else if (section == "constants") {
        if (key == "preset") {
            c.saw_preset = true;
            if (value != "unity")
                c.fail("constants.preset: only 'unity' is supported, got '" + value + "'");
        } else if (key == "q_h" || key == "m_h" || key == "kappa" || key == "eta" ||
                   key == "mu0" || key == "rho_bar") {
            if (auto v = c.number(where, value)) {
                ++c.explicit_constant_keys;
                cfg.explicit_constants = true;
                if (key == "q_h") cfg.constants.q_h = *v;
                else if (key == "m_h") cfg.constants.m_h = *v;
                else if (key == "kappa") cfg.constants.kappa = *v;
                else if (key == "eta") cfg.constants.eta = *v;
                else if (key == "mu0") cfg.constants.mu0 = *v;
                else cfg.constants.rho_bar = *v;
            }
        } else {
            c.fail("[constants]: unknown key '" + key + "'");
        }
    } else if (section == "output") {
        if (key == "dir") {
            cfg.out_dir = value;
        } else if (key == "diag_every") {
            if (auto v = c.integer(where, value)) cfg.diag_every = static_cast<int>(*v);
        } else if (key == "checkpoint_every") {
            if (auto v = c.integer(where, value)) cfg.checkpoint_every = static_cast<int>(*v);
        } else {
            c.fail("[output]: unknown key '" + key + "'");
        }
    } else if (section == "run") {
        if (key == "deterministic") {
            if (auto v = c.boolean(where, value)) cfg.deterministic = *v;
        } else if (key == "seed") {
            if (auto v = c.unsigned64(where, value)) cfg.seed = *v;
        } else {
            c.fail("[run]: unknown key '" + key + "'");
        }
    } else {
        // unknown sections are reported once, where the header is parsed
    }
}

void validate(Collector& c, bool project_init) {
    RunConfig& cfg = c.cfg;
    cfg.project_init = project_init;

    if (!c.saw_n)
        c.fail("grid.n: required key is missing");
    else if (cfg.n < 4 || cfg.n % 2 != 0)
        c.fail("grid.n: must be even and >= 4, got " + std::to_string(cfg.n));
    if (!(cfg.dealias_fraction > 0.0) || cfg.dealias_fraction > 1.0)
        c.fail("grid.dealias_fraction: must lie in (0, 1], got " + fmt(cfg.dealias_fraction));

    if (!(cfg.epsilon >= 0.0))
        c.fail("mollifier.epsilon: must be >= 0, got " + fmt(cfg.epsilon));

    if (!c.saw_t_final)
        c.fail("time.t_final: required key is missing");
    else if (!(cfg.t_final >= 0.0))
        c.fail("time.t_final: must be >= 0, got " + fmt(cfg.t_final));
    if (!cfg.dt_auto && !(cfg.dt > 0.0))
        c.fail("time.dt: must be positive or 'auto', got '" + c.dt_text + "'");
    if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
        c.fail("time.cfl_safety: must lie in (0, 1], got " + fmt(cfg.cfl_safety));

    if (cfg.family != "ball")
        c.fail("particles.family: unknown family '" + cfg.family + "' (supported: ball)");
    if (!(cfg.ball.M > 0.0)) c.fail("particles.M: must be positive, got " + fmt(cfg.ball.M));
    if (!(cfg.ball.v0 > 0.0)) c.fail("particles.v0: must be positive, got " + fmt(cfg.ball.v0));
    if (!(std::abs(cfg.ball.mod_amp) <= 1.0))
        c.fail("particles.mod_amp: must lie in [-1, 1], got " + fmt(cfg.ball.mod_amp));
    if (cfg.ball.mod_k < 1)
        c.fail("particles.mod_k: must be >= 1, got " + std::to_string(cfg.ball.mod_k));

    auto check_modes = [&](const char* name, const std::vector<FourierMode>& modes) {
        for (const FourierMode& m : modes) {
            const std::string where = std::string("fields.") + name;
            int kinf = std::max({std::abs(m.k[0]), std::abs(m.k[1]), std::abs(m.k[2])});
            if (c.saw_n && cfg.n >= 4 && kinf > cfg.n / 2 - 1) {
                c.fail(where + ": mode " + mode_str(m) + " exceeds the open band |k| <= " +
                       std::to_string(cfg.n / 2 - 1) + " for n = " + std::to_string(cfg.n));
                continue;
            }
            if (kinf == 0) {
                double s = std::abs(m.sin_amp[0]) + std::abs(m.sin_amp[1]) + std::abs(m.sin_amp[2]);
                if (s != 0.0)
                    c.fail(where + ": mode (0 0 0) has a sine amplitude, which is identically zero");
                continue;
            }
            double kc = m.k[0] * m.cos_amp[0] + m.k[1] * m.cos_amp[1] + m.k[2] * m.cos_amp[2];
            double ks = m.k[0] * m.sin_amp[0] + m.k[1] * m.sin_amp[1] + m.k[2] * m.sin_amp[2];
            if (!project_init && (std::abs(kc) > 1e-12 || std::abs(ks) > 1e-12))
                c.fail(where + ": mode " + mode_str(m) +
                       " is not divergence-free (k.cos_amp = " + fmt(kc) +
                       ", k.sin_amp = " + fmt(ks) + "); pass --project-init to project it");
        }
    };
    check_modes("u_mode", cfg.u_modes);
    check_modes("b_mode", cfg.b_modes);

    if (c.saw_preset && cfg.explicit_constants)
        c.fail("constants: preset = unity cannot be combined with explicit coefficients");
    if (cfg.explicit_constants && c.explicit_constant_keys != 6)
        c.fail("constants: explicit coefficients require all six of "
               "q_h, m_h, kappa, eta, mu0, rho_bar");
    if (cfg.explicit_constants) {
        try {
            cfg.constants.validate();
        } catch (const std::invalid_argument&) {
            c.fail("constants: all coefficients must be positive");
        }
    }

    if (cfg.out_dir.empty()) c.fail("output.dir: must not be empty");
    if (cfg.diag_every < 1)
        c.fail("output.diag_every: must be >= 1, got " + std::to_string(cfg.diag_every));
    if (cfg.checkpoint_every < 0)
        c.fail("output.checkpoint_every: must be >= 0, got " +
               std::to_string(cfg.checkpoint_every));
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
          std::string joined = "config: " + std::to_string(violations.size()) + " violation(s)";
          for (const std::string& v : violations) joined += "\n  " + v;
          return joined;
      }()),
      violations_(std::move(violations)) {}

RunConfig parse_config_text(const std::string& text, bool project_init) {
    Collector c;
    std::istringstream in(text);
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (std::size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (std::size_t semi = line.find(';'); semi != std::string::npos) line.erase(semi);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                c.fail("line " + std::to_string(lineno) + ": malformed section header '" + line +
                       "'");
                section.clear();
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            static const char* known[] = {"grid",   "mollifier", "time",   "particles",
                                          "fields", "constants", "output", "run"};
            bool ok = false;
            for (const char* k : known) ok = ok || section == k;
            if (!ok) {
                c.fail("unknown section [" + section + "]");
                section.clear();
            }
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            c.fail("line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            c.fail("line " + std::to_string(lineno) + ": key '" + key +
                   "' appears outside any [section]");
            continue;
        }
        if (key.empty() || value.empty()) {
            c.fail("line " + std::to_string(lineno) + ": empty key or value");
            continue;
        }
        handle_key(c, section, key, value);
    }

    validate(c, project_init);
    if (!c.errs.empty()) throw ConfigError(std::move(c.errs));
    return c.cfg;
}

RunConfig parse_config(const std::string& path, bool project_init) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), project_init);
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "[grid]\n";
    out << "n = " << cfg.n << "\n";
    out << "dealias_fraction = " << fmt(cfg.dealias_fraction) << "\n";
    out << "\n[mollifier]\n";
    out << "epsilon = " << fmt(cfg.epsilon) << "\n";
    out << "\n[time]\n";
    out << "dt = " << (cfg.dt_auto ? std::string("auto") : fmt(cfg.dt)) << "\n";
    out << "t_final = " << fmt(cfg.t_final) << "\n";
    out << "cfl_safety = " << fmt(cfg.cfl_safety) << "\n";
    out << "\n[particles]\n";
    out << "count = " << cfg.marker_count << "\n";
    out << "family = " << cfg.family << "\n";
    out << "M = " << fmt(cfg.ball.M) << "\n";
    out << "v0 = " << fmt(cfg.ball.v0) << "\n";
    out << "mod_amp = " << fmt(cfg.ball.mod_amp) << "\n";
    out << "mod_k = " << cfg.ball.mod_k << "\n";
    out << "\n[fields]\n";
    auto emit_modes = [&](const char* name, const std::vector<FourierMode>& modes) {
        for (const FourierMode& m : modes) {
            out << name << " = " << m.k[0] << " " << m.k[1] << " " << m.k[2];
            for (double a : m.cos_amp) out << " " << fmt(a);
            for (double a : m.sin_amp) out << " " << fmt(a);
            out << "\n";
        }
    };
    emit_modes("u_mode", cfg.u_modes);
    emit_modes("b_mode", cfg.b_modes);
    out << "\n[constants]\n";
    if (cfg.explicit_constants) {
        out << "q_h = " << fmt(cfg.constants.q_h) << "\n";
        out << "m_h = " << fmt(cfg.constants.m_h) << "\n";
        out << "kappa = " << fmt(cfg.constants.kappa) << "\n";
        out << "eta = " << fmt(cfg.constants.eta) << "\n";
        out << "mu0 = " << fmt(cfg.constants.mu0) << "\n";
        out << "rho_bar = " << fmt(cfg.constants.rho_bar) << "\n";
    } else {
        out << "preset = unity\n";
    }
    out << "\n[output]\n";
    out << "dir = " << cfg.out_dir << "\n";
    out << "diag_every = " << cfg.diag_every << "\n";
    out << "checkpoint_every = " << cfg.checkpoint_every << "\n";
    out << "\n[run]\n";
    out << "deterministic = " << (cfg.deterministic ? "true" : "false") << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

VectorField build_mode_field(const Grid& g, const std::vector<FourierMode>& modes) {
    VectorField v(g);
    for (const FourierMode& m : modes) {
        if (m.k[0] == 0 && m.k[1] == 0 && m.k[2] == 0) {
            for (int c = 0; c < 3; ++c)
                v[c].coeff(0, 0, 0) += cplx(m.cos_amp[static_cast<std::size_t>(c)], 0.0);
            continue;
        }
        int jx = m.k[0] >= 0 ? m.k[0] : g.n + m.k[0];
        int jy = m.k[1] >= 0 ? m.k[1] : g.n + m.k[1];
        int jz = m.k[2] >= 0 ? m.k[2] : g.n + m.k[2];
        for (int c = 0; c < 3; ++c) {
            double cs = m.cos_amp[static_cast<std::size_t>(c)];
            double sn = m.sin_amp[static_cast<std::size_t>(c)];
            // cos + sin split over the +-k pair; the conjugate slot gets the
            // bitwise conjugate so the Hermitian invariant holds exactly.
            v[c].coeff(jx, jy, jz) += cplx(0.5 * cs, -0.5 * sn);
            v[c].coeff(g.conj_slot(jx), g.conj_slot(jy), g.conj_slot(jz)) +=
                cplx(0.5 * cs, 0.5 * sn);
        }
    }
    return v;
}

PlasmaState initial_state(const RunConfig& cfg) {
    const Grid g = Grid::make(cfg.n, cfg.dealias_fraction);
    PlasmaState st(g);
    st.mollifier = MollifierSpec(cfg.epsilon);
    st.constants = cfg.constants;

    VectorField u = build_mode_field(g, cfg.u_modes);
    VectorField b = build_mode_field(g, cfg.b_modes);
    if (cfg.project_init) {
        u = leray_project(u);
        b = leray_project(b);
    } else {
        u.set_divergence_free(true);
        b.set_divergence_free(true);
    }
    if (u.div_residual() > 1e-11 || b.div_residual() > 1e-11)
        throw std::logic_error("initial_state: assembled fields are not solenoidal");
    st.U = std::move(u);
    st.B = std::move(b);

    if (cfg.marker_count > 0) {
        std::uint64_t seed = cfg.seed;
        if (!cfg.deterministic) {
            std::random_device rd;
            seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        }
        std::mt19937_64 rng(seed);
        st.particles = prepare_initial_f(cfg.ball, st.mollifier, cfg.marker_count, rng);
    }
    return st;
}

} // namespace hvmhd
