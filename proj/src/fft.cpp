#include "nisekit/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace nisekit::fft {
namespace {

// FFTW planning is not thread-safe; execution via fftw_execute_dft is.
// Plans are created once per (size, direction) with FFTW_ESTIMATE|FFTW_UNALIGNED
// so they can be executed on any caller buffer.
class PlanCache {
public:
    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> dummy_in(n), dummy_out(n);
        fftw_plan p = fftw_plan_dft_1d(
            static_cast<int>(n),
            reinterpret_cast<fftw_complex*>(dummy_in.data()),
            reinterpret_cast<fftw_complex*>(dummy_out.data()),
            sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

std::vector<std::complex<double>> execute(const std::vector<std::complex<double>>& in, int sign) {
    if (in.empty()) return {};
    std::vector<std::complex<double>> src(in);  // fftw may not accept const input
    std::vector<std::complex<double>> out(in.size());
    fftw_plan p = cache().get(in.size(), sign);
    fftw_execute_dft(p,
                     reinterpret_cast<fftw_complex*>(src.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& in) {
    return execute(in, FFTW_FORWARD);
}

std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& in) {
    auto out = execute(in, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(in.size());
    for (auto& v : out) v *= scale;
    return out;
}

std::vector<std::complex<double>> forward_real(const std::vector<double>& in) {
    std::vector<std::complex<double>> c(in.begin(), in.end());
    return forward(c);
}

}  // namespace nisekit::fft
