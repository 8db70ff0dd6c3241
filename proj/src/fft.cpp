#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace lakesim::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  const PlanPair& get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    const int ni = static_cast<int>(n);
    auto* real = fftw_alloc_real(n * n);
    auto* cplx = fftw_alloc_complex(n * (n / 2 + 1));
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_2d(ni, ni, real, cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_c2r_2d(ni, ni, cplx, real,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
    fftw_free(real);
    fftw_free(cplx);
    return plans_.emplace(n, p).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft_r2c(std::size_t n, const double* in, std::complex<double>* out) {
  const auto& p = cache().get(n);
  // FFTW does not modify the input of an out-of-place r2c transform.
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void fft_c2r(std::size_t n, std::complex<double>* in, double* out) {
  const auto& p = cache().get(n);
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace lakesim::detail
