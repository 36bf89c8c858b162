#include "hvmhd/io.hpp"

#include "hvmhd/diagnostics.hpp"
#include "hvmhd/util.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

static_assert(std::endian::native == std::endian::little,
              "the checkpoint format stores raw little-endian words");

namespace hvmhd {

const char* const diagnostics_csv_header =
    "t,e_fluid,e_mag,e_particles,e_total,diss_cum,r1,r2,div_u,div_b,px,py,pz,mass,"
    "balance_residual";

namespace {

void append_g17(std::string& s, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += buf;
}

constexpr char checkpoint_magic[6] = {'H', 'V', 'M', 'H', 'D', '\x01'};
constexpr std::uint32_t checkpoint_version = 1;

struct Writer {
    std::string buf;
    void raw(const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
};

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    void raw(void* p, std::size_t n) {
        if (pos + n > buf.size()) throw CheckpointError("checkpoint: truncated file");
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    }
    std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
    double f64() { double v; raw(&v, sizeof v); return v; }
};

// Only slots jx in [0, n/2] are stored; the rest are the bitwise conjugates
// of their mirrors, which the field invariant guarantees.
void put_half_cube(Writer& w, const ScalarField& f) {
    const Grid& g = f.grid();
    for (int jx = 0; jx <= g.n / 2; ++jx)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jz = 0; jz < g.n; ++jz) {
                cplx c = f.coeff(jx, jy, jz);
                w.f64(c.real());
                w.f64(c.imag());
            }
}

void get_half_cube(Reader& r, ScalarField& f) {
    const Grid& g = f.grid();
    for (int jx = 0; jx <= g.n / 2; ++jx)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jz = 0; jz < g.n; ++jz) {
                double re = r.f64();
                double im = r.f64();
                f.coeff(jx, jy, jz) = cplx(re, im);
            }
    for (int jx = g.n / 2 + 1; jx < g.n; ++jx)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jz = 0; jz < g.n; ++jz)
                f.coeff(jx, jy, jz) =
                    std::conj(f.coeff(g.n - jx, g.conj_slot(jy), g.conj_slot(jz)));
}

void put_doubles(Writer& w, const std::vector<double>& v) {
    w.raw(v.data(), v.size() * sizeof(double));
}

void get_doubles(Reader& r, std::vector<double>& v, std::size_t count) {
    v.resize(count);
    r.raw(v.data(), count * sizeof(double));
}

} // namespace

std::string diagnostics_csv_row(const PlasmaState& st, const RunningTotals& totals) {
    EnergyReport rep =
        total_energy(st, totals.cumulative_dissipation, totals.e_total_initial);
    ConservedQuantities cq = conserved_quantities(st);
    const double cols[15] = {st.t,
                             rep.e_fluid,
                             rep.e_mag,
                             rep.e_particles,
                             rep.e_total,
                             rep.cumulative_dissipation,
                             rep.r1,
                             rep.r2,
                             st.U.div_residual(),
                             st.B.div_residual(),
                             cq.momentum[0],
                             cq.momentum[1],
                             cq.momentum[2],
                             cq.mass,
                             rep.balance_residual};
    std::string row;
    row.reserve(15 * 26);
    for (int i = 0; i < 15; ++i) {
        if (i) row += ',';
        append_g17(row, cols[i]);
    }
    return row;
}

void write_checkpoint(const std::string& path, const PlasmaState& st,
                      const RunningTotals& totals) {
    const Grid& g = st.grid();
    Writer w;
    w.raw(checkpoint_magic, sizeof checkpoint_magic);
    w.u32(checkpoint_version);
    w.u32(static_cast<std::uint32_t>(g.n));
    w.f64(g.dealias_fraction);
    w.f64(st.mollifier.epsilon());
    w.f64(st.t);
    w.f64(st.constants.q_h);
    w.f64(st.constants.m_h);
    w.f64(st.constants.kappa);
    w.f64(st.constants.eta);
    w.f64(st.constants.mu0);
    w.f64(st.constants.rho_bar);
    w.u64(totals.step_index);
    w.f64(totals.dt);
    w.f64(totals.e_total_initial);
    w.f64(totals.cumulative_dissipation);
    for (int c = 0; c < 3; ++c) put_half_cube(w, st.U[c]);
    for (int c = 0; c < 3; ++c) put_half_cube(w, st.B[c]);
    const ParticleEnsemble& p = st.particles;
    w.u64(p.size());
    put_doubles(w, p.x);
    put_doubles(w, p.y);
    put_doubles(w, p.z);
    put_doubles(w, p.vx);
    put_doubles(w, p.vy);
    put_doubles(w, p.vz);
    put_doubles(w, p.w);
    w.u64(fnv1a(w.buf.data(), w.buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("checkpoint: cannot open '" + path + "' for writing");
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    out.flush();
    if (!out) throw CheckpointError("checkpoint: write to '" + path + "' failed");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
    std::ostringstream sink;
    sink << in.rdbuf();
    const std::string file = sink.str();

    if (file.size() < sizeof checkpoint_magic + sizeof(std::uint32_t) + sizeof(std::uint64_t))
        throw CheckpointError("checkpoint: truncated file");
    if (std::memcmp(file.data(), checkpoint_magic, sizeof checkpoint_magic) != 0)
        throw CheckpointError("checkpoint: not a checkpoint file (magic mismatch)");

    const std::size_t body = file.size() - sizeof(std::uint64_t);
    std::uint64_t stored_sum;
    std::memcpy(&stored_sum, file.data() + body, sizeof stored_sum);
    if (fnv1a(file.data(), body) != stored_sum)
        throw CheckpointError("checkpoint: integrity check failed (checksum mismatch)");

    Reader r{file};
    r.pos = sizeof checkpoint_magic;
    std::uint32_t version = r.u32();
    if (version != checkpoint_version)
        throw CheckpointError("checkpoint: unsupported version " + std::to_string(version) +
                              " (expected " + std::to_string(checkpoint_version) + ")");

    std::uint32_t n = r.u32();
    double dealias = r.f64();
    double epsilon = r.f64();
    double t = r.f64();
    PhysicalConstants pc;
    pc.q_h = r.f64();
    pc.m_h = r.f64();
    pc.kappa = r.f64();
    pc.eta = r.f64();
    pc.mu0 = r.f64();
    pc.rho_bar = r.f64();
    RunningTotals totals;
    totals.step_index = r.u64();
    totals.dt = r.f64();
    totals.e_total_initial = r.f64();
    totals.cumulative_dissipation = r.f64();

    Grid g;
    try {
        g = Grid::make(static_cast<int>(n), dealias);
    } catch (const std::invalid_argument& e) {
        throw CheckpointError(std::string("checkpoint: invalid grid metadata: ") + e.what());
    }
    PlasmaState st(g);
    st.t = t;
    st.constants = pc;
    st.mollifier = MollifierSpec(epsilon);
    for (int c = 0; c < 3; ++c) get_half_cube(r, st.U[c]);
    for (int c = 0; c < 3; ++c) get_half_cube(r, st.B[c]);
    st.U.set_divergence_free(true);
    st.B.set_divergence_free(true);

    std::uint64_t count = r.u64();
    ParticleEnsemble& p = st.particles;
    get_doubles(r, p.x, count);
    get_doubles(r, p.y, count);
    get_doubles(r, p.z, count);
    get_doubles(r, p.vx, count);
    get_doubles(r, p.vy, count);
    get_doubles(r, p.vz, count);
    get_doubles(r, p.w, count);

    if (r.pos != body) throw CheckpointError("checkpoint: trailing bytes after particle data");
    return Checkpoint{std::move(st), totals};
}

std::string checkpoint_info(const std::string& path) {
    Checkpoint ck = read_checkpoint(path);
    const PlasmaState& st = ck.state;
    std::ostringstream out;
    out << "checkpoint " << path << "\n";
    out << "  grid            " << st.grid().n << "^3, dealias_fraction "
        << st.grid().dealias_fraction << "\n";
    out << "  epsilon         " << st.mollifier.epsilon() << "\n";
    out << "  t               ";
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", st.t);
        out << buf << "\n";
    }
    out << "  step_index      " << ck.totals.step_index << "\n";
    out << "  dt              " << ck.totals.dt << "\n";
    out << "  markers         " << st.particles.size() << "\n";
    out << "  e_total_initial " << ck.totals.e_total_initial << "\n";
    out << "  diss_cum        " << ck.totals.cumulative_dissipation << "\n";
    out << "  constants       q_h " << st.constants.q_h << ", m_h " << st.constants.m_h
        << ", kappa " << st.constants.kappa << ", eta " << st.constants.eta << ", mu0 "
        << st.constants.mu0 << ", rho_bar " << st.constants.rho_bar << "\n";
    out << "  integrity       ok\n";
    return out.str();
}

} // namespace hvmhd
