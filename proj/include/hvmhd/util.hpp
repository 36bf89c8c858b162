#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace hvmhd {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// Compensated summation. Every energy / norm / moment reduction in the code
// goes through this so that results do not depend on how a loop happens to be
// blocked, and so that long runs do not accumulate linear rounding drift.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// Worker cap: HVMHD_THREADS if set (clamped to >= 1), else hardware count.
int thread_cap();

// Process-wide determinism switch. When set, parallel regions collapse to a
// single worker. All reductions in the code are serial and ordered anyway;
// this is the belt-and-braces mode used by the reproducibility tests.
void set_deterministic(bool on);
bool deterministic();

// Chunked parallel map over [begin, end). The chunk partition is a pure
// function of the range and the worker count, and workers write to disjoint
// index ranges only, so results are bit-identical for any worker count.
// body receives (chunk_begin, chunk_end).
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body);

// Wrap a coordinate into [0, 2*pi).
double wrap_torus(double x);

// Uniform double in [0, 1) from the top 53 bits of the generator word.
// All sampling in the library is built from this one primitive (plus
// elementary inverse transforms), so particle initialization is reproducible
// across standard library implementations; std::*_distribution is not.
inline double uniform_unit(std::uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// FNV-1a, used as the checkpoint integrity trailer.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 1469598103934665603ULL);

} // namespace hvmhd
