#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hvmhd/config.hpp"
#include "hvmhd/diagnostics.hpp"
#include "hvmhd/io.hpp"
#include "hvmhd/run.hpp"
#include "hvmhd/spectral_ops.hpp"
#include "hvmhd/util.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hvmhd;
namespace fs = std::filesystem;

namespace {

const char* minimal_cfg = R"(
[grid]
n = 8
[time]
t_final = 0.5
)";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("hvmhd_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

// A state with full-band random content, for exercising the checkpoint.
PlasmaState scrambled_state(int n, unsigned seed) {
    const Grid g = Grid::make(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    PlasmaState st(g);
    auto fill = [&](VectorField& v) {
        for (int c = 0; c < 3; ++c) {
            for (cplx& x : v[c].data()) x = cplx(amp(rng), amp(rng));
            v[c].enforce_hermitian();
        }
        v = leray_project(std::move(v));
    };
    fill(st.U);
    fill(st.B);
    st.t = 0.8125;
    st.mollifier = MollifierSpec(0.25);
    std::uniform_real_distribution<double> pos(0.0, two_pi), vel(-2.0, 2.0), wgt(0.1, 1.0);
    for (int p = 0; p < 257; ++p)
        st.particles.add({pos(rng), pos(rng), pos(rng)}, {vel(rng), vel(rng), vel(rng)},
                         wgt(rng));
    return st;
}

bool coeffs_identical(const VectorField& a, const VectorField& b) {
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a[c].data().size(); ++i)
            if (a[c].data()[i] != b[c].data()[i]) return false;
    return true;
}

RunConfig tiny_run_config(const std::string& out_dir) {
    RunConfig cfg = parse_config_text(minimal_cfg);
    cfg.epsilon = 0.25;
    cfg.dt_auto = false;
    cfg.dt = 0.01;
    cfg.t_final = 0.04;
    cfg.marker_count = 200;
    cfg.ball.M = 0.1;
    cfg.u_modes.push_back(FourierMode{{1, 0, 0}, {0.0, 0.2, 0.0}, {0.0, 0.0, 0.2}});
    cfg.b_modes.push_back(FourierMode{{0, 1, 0}, {0.15, 0.0, 0.0}, {0.0, 0.0, 0.15}});
    cfg.out_dir = out_dir;
    cfg.checkpoint_every = 2;
    cfg.seed = 4242;
    return cfg;
}

} // namespace

TEST_CASE("minimal config applies defaults and dumping is a fixed point") {
    RunConfig cfg = parse_config_text(minimal_cfg);
    CHECK(cfg.n == 8);
    CHECK(cfg.t_final == 0.5);
    CHECK(cfg.dt_auto);
    CHECK(cfg.epsilon == 0.0);
    CHECK(cfg.marker_count == 0);
    CHECK(cfg.deterministic);
    CHECK(cfg.diag_every == 1);
    CHECK_FALSE(cfg.explicit_constants);

    std::string dump = dump_config(cfg);
    RunConfig reparsed = parse_config_text(dump);
    CHECK(dump_config(reparsed) == dump);
}

TEST_CASE("dump fixed point survives awkward numbers and modes") {
    RunConfig cfg = parse_config_text(minimal_cfg);
    cfg.epsilon = 0.1 + 0.2;
    cfg.dt_auto = false;
    cfg.dt = 1.0 / 3.0;
    cfg.cfl_safety = 0.7071067811865476;
    cfg.marker_count = 12345;
    cfg.ball = BallDensity{0.37, 1.25, -0.125, 3};
    cfg.u_modes.push_back(FourierMode{{1, -2, 1}, {2.0, 1.0, 0.0}, {-1.0, -0.5, 0.0}});
    cfg.project_init = true;
    cfg.explicit_constants = true;
    cfg.constants.kappa = 0.015625;
    cfg.constants.eta = 1e-3;
    cfg.seed = 0xDEADBEEFCAFEULL;
    cfg.deterministic = false;

    std::string dump = dump_config(cfg);
    // project_init is a flag, not a file key, so re-parsing needs it passed.
    RunConfig reparsed = parse_config_text(dump, true);
    CHECK(dump_config(reparsed) == dump);
    CHECK(reparsed.dt == cfg.dt);
    CHECK(reparsed.seed == cfg.seed);
    CHECK(reparsed.constants.kappa == cfg.constants.kappa);
}

TEST_CASE("every violation is collected in one pass") {
    const char* bad = R"(
[grid]
n = 7
dealias_fraction = 1.5
[mollifier]
epsilon = -1
[time]
dt = -0.5
cfl_safety = 2
[particles]
family = shell
M = 0
mod_k = 0
[output]
diag_every = 0
[run]
deterministic = maybe
)";
    try {
        parse_config_text(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const auto& v = e.violations();
        auto has = [&](const std::string& needle) {
            for (const std::string& s : v)
                if (s.find(needle) != std::string::npos) return true;
            return false;
        };
        CHECK(has("grid.n"));
        CHECK(has("dealias_fraction"));
        CHECK(has("mollifier.epsilon"));
        CHECK(has("time.dt"));
        CHECK(has("cfl_safety"));
        CHECK(has("family"));
        CHECK(has("particles.M"));
        CHECK(has("mod_k"));
        CHECK(has("diag_every"));
        CHECK(has("deterministic"));
        CHECK(has("t_final"));
        CHECK(v.size() >= 11);
    }
}

TEST_CASE("unknown keys and sections are named") {
    const char* bad = R"(
[grid]
n = 8
m = 2
[gird]
n = 16
[time]
t_final = 1
)";
    try {
        parse_config_text(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string all = e.what();
        CHECK(all.find("unknown key 'm'") != std::string::npos);
        CHECK(all.find("unknown section [gird]") != std::string::npos);
    }
}

TEST_CASE("non-solenoidal mode is rejected, cited, and projectable") {
    const char* text = R"(
[grid]
n = 8
[time]
t_final = 0.1
[fields]
u_mode = 1 0 0  0.2 0 0  0 0 0
)";
    try {
        parse_config_text(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string all = e.what();
        CHECK(all.find("(1 0 0)") != std::string::npos);
        CHECK(all.find("divergence-free") != std::string::npos);
        CHECK(all.find("--project-init") != std::string::npos);
    }

    RunConfig cfg = parse_config_text(text, true);
    PlasmaState st = initial_state(cfg);
    CHECK(st.U.div_residual() < 1e-12);
    // A compressive x-mode projects to zero.
    CHECK(st.U.l2_norm() < 1e-14);
}

TEST_CASE("mode assembly reproduces the analytic field") {
    const char* text = R"(
[grid]
n = 16
[time]
t_final = 0.1
[fields]
u_mode = 1 0 0  0 0.3 0  0 0 0.2
u_mode = 0 0 0  0.05 0 0  0 0 0
)";
    RunConfig cfg = parse_config_text(text);
    PlasmaState st = initial_state(cfg);
    const Grid& g = st.grid();
    auto su = st.U[0].samples();
    auto sv = st.U[1].samples();
    auto sw = st.U[2].samples();
    double worst = 0.0;
    const double h = g.spacing();
    for (int jx = 0; jx < g.n; ++jx)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jz = 0; jz < g.n; ++jz) {
                std::size_t i = g.idx(jx, jy, jz);
                double x = jx * h;
                worst = std::max(worst, std::abs(su[i] - 0.05));
                worst = std::max(worst, std::abs(sv[i] - 0.3 * std::cos(x)));
                worst = std::max(worst, std::abs(sw[i] - 0.2 * std::sin(x)));
            }
    CHECK(worst < 1e-14);
    CHECK(st.U.div_residual() < 1e-14);
}

TEST_CASE("band violations and dead sine amplitudes are caught") {
    const char* text = R"(
[grid]
n = 8
[time]
t_final = 0.1
[fields]
u_mode = 4 0 0  0 1 0  0 0 0
b_mode = 0 0 0  0 0 0  1 0 0
)";
    try {
        parse_config_text(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string all = e.what();
        CHECK(all.find("exceeds the open band") != std::string::npos);
        CHECK(all.find("sine amplitude") != std::string::npos);
    }
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    TempDir tmp("ckpt");
    PlasmaState st = scrambled_state(8, 99);
    RunningTotals totals{17, 0.015625, 3.25, 0.6875};
    const std::string path = tmp.str() + "/state.hvmhd";
    write_checkpoint(path, st, totals);

    Checkpoint ck = read_checkpoint(path);
    CHECK(coeffs_identical(ck.state.U, st.U));
    CHECK(coeffs_identical(ck.state.B, st.B));
    CHECK(ck.state.t == st.t);
    CHECK(ck.state.grid() == st.grid());
    CHECK(ck.state.mollifier.epsilon() == 0.25);
    CHECK(ck.state.particles.size() == st.particles.size());
    for (std::size_t p = 0; p < st.particles.size(); ++p) {
        CHECK(ck.state.particles.x[p] == st.particles.x[p]);
        CHECK(ck.state.particles.vy[p] == st.particles.vy[p]);
        CHECK(ck.state.particles.w[p] == st.particles.w[p]);
    }
    CHECK(ck.totals.step_index == totals.step_index);
    CHECK(ck.totals.dt == totals.dt);
    CHECK(ck.totals.e_total_initial == totals.e_total_initial);
    CHECK(ck.totals.cumulative_dissipation == totals.cumulative_dissipation);

    // Rewriting the restored state reproduces the file byte for byte.
    const std::string copy = tmp.str() + "/copy.hvmhd";
    write_checkpoint(copy, ck.state, ck.totals);
    CHECK(read_file(copy) == read_file(path));

    std::string info = checkpoint_info(path);
    CHECK(info.find("integrity       ok") != std::string::npos);
    CHECK(info.find("markers         257") != std::string::npos);
}

TEST_CASE("empty state round-trips") {
    TempDir tmp("ckpt0");
    PlasmaState st(Grid::make(4));
    const std::string path = tmp.str() + "/empty.hvmhd";
    write_checkpoint(path, st, RunningTotals{});
    Checkpoint ck = read_checkpoint(path);
    CHECK(ck.state.particles.empty());
    CHECK(coeffs_identical(ck.state.U, st.U));
    CHECK(ck.state.t == 0.0);
}

TEST_CASE("corruption, truncation, and foreign files are refused") {
    TempDir tmp("ckptbad");
    PlasmaState st = scrambled_state(8, 7);
    const std::string path = tmp.str() + "/state.hvmhd";
    write_checkpoint(path, st, RunningTotals{3, 0.01, 1.0, 0.1});
    std::string bytes = read_file(path);

    auto write_bytes = [&](const std::string& name, const std::string& content) {
        std::ofstream out(tmp.str() + "/" + name, std::ios::binary);
        out << content;
        out.close();
        return tmp.str() + "/" + name;
    };

    // One flipped byte in the middle trips the checksum.
    std::string corrupted = bytes;
    corrupted[corrupted.size() / 2] = static_cast<char>(corrupted[corrupted.size() / 2] ^ 0x40);
    CHECK_THROWS_WITH_AS(read_checkpoint(write_bytes("corrupt.hvmhd", corrupted)),
                         doctest::Contains("integrity"), CheckpointError);

    // A cut that still covers the header fails the whole-file checksum; only
    // a cut inside the header itself is reported as truncation.
    CHECK_THROWS_WITH_AS(read_checkpoint(write_bytes("short.hvmhd", bytes.substr(0, 40))),
                         doctest::Contains("integrity"), CheckpointError);
    CHECK_THROWS_WITH_AS(read_checkpoint(write_bytes("stub.hvmhd", bytes.substr(0, 12))),
                         doctest::Contains("truncated"), CheckpointError);

    std::string foreign = bytes;
    foreign[0] = 'X';
    CHECK_THROWS_WITH_AS(read_checkpoint(write_bytes("foreign.hvmhd", foreign)),
                         doctest::Contains("magic"), CheckpointError);

    std::string vers = bytes;
    vers[6] = 9; // little-endian low byte of the version word
    // Re-stamp the checksum so only the version check can fire.
    std::uint64_t sum = fnv1a(vers.data(), vers.size() - 8);
    std::memcpy(vers.data() + vers.size() - 8, &sum, 8);
    CHECK_THROWS_WITH_AS(read_checkpoint(write_bytes("newer.hvmhd", vers)),
                         doctest::Contains("version"), CheckpointError);

    CHECK_THROWS_AS(read_checkpoint(tmp.str() + "/absent.hvmhd"), CheckpointError);
}

TEST_CASE("a short run writes consistent diagnostics") {
    TempDir tmp("run");
    RunConfig cfg = tiny_run_config(tmp.str() + "/out");
    RunResult res = run_simulation(cfg);

    CHECK(res.steps_taken == 4);
    CHECK(std::abs(res.final_state.t - 0.04) < 1e-15);
    CHECK(res.rows_written == 5);
    CHECK(res.initial_max_speed > 0.0);
    CHECK(res.peak_marker_speed >= res.initial_max_speed * 0.5);
    CHECK(res.peak_smoothed_field > 0.0);

    std::ifstream csv(res.csv_path);
    REQUIRE(bool(csv));
    std::string header;
    std::getline(csv, header);
    CHECK(header == diagnostics_csv_header);

    int rows = 0;
    double prev_t = -1.0;
    for (std::string line; std::getline(csv, line);) {
        auto cols = split_csv(line);
        REQUIRE(cols.size() == 15);
        double t = std::stod(cols[0]);
        double ef = std::stod(cols[1]), em = std::stod(cols[2]), ep = std::stod(cols[3]);
        double etot = std::stod(cols[4]);
        CHECK(std::abs(etot - (ef + em + ep)) < 1e-12 * (1.0 + etot));
        CHECK(std::stod(cols[8]) < 1e-11);  // div_u
        CHECK(std::stod(cols[9]) < 1e-11);  // div_b
        CHECK(t > prev_t);
        prev_t = t;
        ++rows;
    }
    CHECK(rows == 5);

    // Mid-run checkpoints at steps 2 and the final snapshot exist.
    CHECK(fs::exists(fs::path(cfg.out_dir) / "checkpoint_00000002.hvmhd"));
    CHECK(fs::exists(res.final_checkpoint_path));

    // Mass is conserved exactly: every row prints the same string.
    std::ifstream again(res.csv_path);
    std::getline(again, header);
    std::string mass0;
    for (std::string line; std::getline(again, line);) {
        auto cols = split_csv(line);
        if (mass0.empty()) mass0 = cols[13];
        CHECK(cols[13] == mass0);
    }
}

TEST_CASE("zero-horizon run emits the initial row only") {
    TempDir tmp("run0");
    RunConfig cfg = tiny_run_config(tmp.str() + "/out");
    cfg.t_final = 0.0;
    RunResult res = run_simulation(cfg);
    CHECK(res.steps_taken == 0);
    CHECK(res.rows_written == 1);
    CHECK(res.final_state.t == 0.0);
    Checkpoint ck = read_checkpoint(res.final_checkpoint_path);
    CHECK(ck.totals.step_index == 0);
}

TEST_CASE("deterministic rerun and checkpoint restart are bit-identical") {
    TempDir tmp("repro");
    RunConfig cfg = tiny_run_config(tmp.str() + "/a");
    RunResult full = run_simulation(cfg);

    cfg.out_dir = tmp.str() + "/b";
    RunResult again = run_simulation(cfg);
    CHECK(read_file(full.final_checkpoint_path) == read_file(again.final_checkpoint_path));

    // Restart from the step-2 checkpoint of the first run.
    RunConfig tail = cfg;
    tail.out_dir = tmp.str() + "/c";
    RunResult resumed =
        resume_simulation(tail, tmp.str() + "/a/checkpoint_00000002.hvmhd");
    CHECK(resumed.steps_taken == 2);
    CHECK(read_file(resumed.final_checkpoint_path) == read_file(full.final_checkpoint_path));

    // The resumed CSV tail matches the full run's rows at the same steps.
    std::string full_csv = read_file(full.csv_path);
    std::string tail_csv = read_file(resumed.csv_path);
    auto last_line = [](const std::string& text) {
        std::size_t end = text.find_last_not_of('\n');
        std::size_t start = text.rfind('\n', end);
        return text.substr(start + 1, end - start);
    };
    CHECK(last_line(full_csv) == last_line(tail_csv));
}

TEST_CASE("resume validates config agreement") {
    TempDir tmp("resumebad");
    RunConfig cfg = tiny_run_config(tmp.str() + "/a");
    RunResult full = run_simulation(cfg);

    RunConfig other = cfg;
    other.n = 16;
    CHECK_THROWS_AS(resume_simulation(other, full.final_checkpoint_path), std::invalid_argument);
    other = cfg;
    other.epsilon = 0.5;
    CHECK_THROWS_AS(resume_simulation(other, full.final_checkpoint_path), std::invalid_argument);
}
