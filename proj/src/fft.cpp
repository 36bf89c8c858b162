#include "hvmhd/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace hvmhd::fft {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

class PlanCache {
public:
    PlanPair& get(int m) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(m);
        if (it != plans_.end()) return it->second;
        // Plan against scratch buffers; FFTW_UNALIGNED lets fftw_execute_dft
        // run the plan on any caller array afterwards.
        std::size_t count = static_cast<std::size_t>(m) * m * m;
        std::vector<std::complex<double>> a(count), b(count);
        auto* pa = reinterpret_cast<fftw_complex*>(a.data());
        auto* pb = reinterpret_cast<fftw_complex*>(b.data());
        PlanPair p;
        p.fwd = fftw_plan_dft_3d(m, m, m, pa, pb, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        p.bwd = fftw_plan_dft_3d(m, m, m, pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        return plans_.emplace(m, p).first->second;
    }

    ~PlanCache() {
        for (auto& [m, p] : plans_) {
            fftw_destroy_plan(p.fwd);
            fftw_destroy_plan(p.bwd);
        }
    }

private:
    std::mutex mu_;
    std::map<int, PlanPair> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

} // namespace

void forward(int m, const std::complex<double>* in, std::complex<double>* out) {
    PlanPair& p = cache().get(m);
    fftw_execute_dft(p.fwd,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / (static_cast<double>(m) * m * m);
    std::size_t count = static_cast<std::size_t>(m) * m * m;
    for (std::size_t i = 0; i < count; ++i) out[i] *= scale;
}

void backward(int m, const std::complex<double>* in, std::complex<double>* out) {
    PlanPair& p = cache().get(m);
    fftw_execute_dft(p.bwd,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace hvmhd::fft
