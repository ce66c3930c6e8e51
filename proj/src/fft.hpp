#pragma once

// Thin wrapper over FFTW's complex one-dimensional transform.

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <vector>

#include "toa/types.hpp"

namespace toa::detail {

// In-place unnormalized DFT; sign = FFTW_FORWARD (-1) or FFTW_BACKWARD (+1).
// The data goes through an fftw_malloc buffer so the plan (and with it the
// rounding) never depends on the alignment of the caller's vector.
inline void fft_inplace(std::vector<Complex>& data, int sign) {
  static std::mutex planner_mutex;  // the FFTW planner is not thread-safe
  const int n = static_cast<int>(data.size());
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * data.size()));
  if (!buf) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
  }
  auto* view = reinterpret_cast<Complex*>(buf);
  std::copy(data.begin(), data.end(), view);
  fftw_execute(plan);
  std::copy(view, view + n, data.begin());
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

}  // namespace toa::detail
