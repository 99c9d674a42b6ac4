#include "emhydro/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace emhydro::fft {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// FFTW planning is not thread-safe; execution with fftw_execute_dft is.
std::mutex g_plan_mutex;
std::map<std::array<int, 3>, PlanPair>& plan_cache() {
  static std::map<std::array<int, 3>, PlanPair> cache;
  return cache;
}

PlanPair& plans_for(const fields::GridSpec& g) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(g.dims);
  if (it != cache.end()) return it->second;

  std::vector<std::complex<double>> scratch(g.size());
  auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
  PlanPair p;
  p.fwd = fftw_plan_dft_3d(g.dims[0], g.dims[1], g.dims[2], ptr, ptr,
                           FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_3d(g.dims[0], g.dims[1], g.dims[2], ptr, ptr,
                           FFTW_BACKWARD, FFTW_ESTIMATE);
  return cache.emplace(g.dims, p).first->second;
}

}  // namespace

void forward(const fields::GridSpec& g, std::vector<std::complex<double>>& data) {
  if (data.size() != g.size()) throw ShapeMismatch("fft: array size mismatch");
  auto& p = plans_for(g);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p.fwd, ptr, ptr);
}

void backward(const fields::GridSpec& g, std::vector<std::complex<double>>& data) {
  if (data.size() != g.size()) throw ShapeMismatch("fft: array size mismatch");
  auto& p = plans_for(g);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p.bwd, ptr, ptr);
  const double inv = 1.0 / static_cast<double>(g.size());
  for (auto& v : data) v *= inv;
}

}  // namespace emhydro::fft
