#include "mbcc/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <unordered_map>

#include "mbcc/errors.hpp"

namespace mbcc {
namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// FFTW plan creation is not thread safe; execution via fftw_execute_dft is.
// Plans are made with FFTW_UNALIGNED so they can run on arbitrary buffers.
PlanPair& plans_for(std::size_t n) {
    static std::mutex mu;
    static std::unordered_map<std::size_t, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;

    std::vector<std::complex<double>> scratch_in(n), scratch_out(n);
    auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
    auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
    PlanPair p;
    p.forward = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.forward || !p.backward)
        throw NumericalError("fftw plan creation failed for length " + std::to_string(n));
    return cache.emplace(n, p).first->second;
}

void run(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
         bool forward) {
    if (in.size() != out.size())
        throw ConfigError("dft: input/output length mismatch");
    if (in.empty())
        return;
    PlanPair& p = plans_for(in.size());

    // fftw_execute_dft may not alias differently from the plan (out of
    // place); copy through a local buffer when the caller aliases.
    std::vector<std::complex<double>> tmp;
    const std::complex<double>* src = in.data();
    if (src == out.data()) {
        tmp.assign(in.begin(), in.end());
        src = tmp.data();
    }
    fftw_execute_dft(forward ? p.forward : p.backward,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(src)),
                     reinterpret_cast<fftw_complex*>(out.data()));
    if (!forward) {
        const double scale = 1.0 / static_cast<double>(in.size());
        for (auto& v : out)
            v *= scale;
    }
}

} // namespace

void dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    run(in, out, true);
}

void idft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    run(in, out, false);
}

std::vector<std::complex<double>> dft(std::span<const std::complex<double>> in) {
    std::vector<std::complex<double>> out(in.size());
    dft(in, out);
    return out;
}

std::vector<std::complex<double>> idft(std::span<const std::complex<double>> in) {
    std::vector<std::complex<double>> out(in.size());
    idft(in, out);
    return out;
}

} // namespace mbcc
