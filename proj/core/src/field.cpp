#include "parfluor/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "parfluor/errors.hpp"

namespace parfluor {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

double ComplexField::norm_squared() const {
  double s = 0.0;
  for (const auto& v : data) s += std::norm(v);
  return s;
}

struct Fft3d::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

Fft3d::Fft3d(const SimulationGrid& grid)
    : plans_(std::make_unique<Plans>()),
      size_(grid.size()),
      n_t_(grid.n_t),
      n_x_(grid.n_x),
      n_y_(grid.n_y) {
  FieldBuffer scratch(size_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->forward = fftw_plan_dft_3d(n_t_, n_x_, n_y_, as_fftw(scratch.data()),
                                     as_fftw(scratch.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft_3d(n_t_, n_x_, n_y_, as_fftw(scratch.data()),
                                      as_fftw(scratch.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->backward) {
    throw InvalidArgument("FFTW could not create a plan for this grid");
  }
}

Fft3d::~Fft3d() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

void Fft3d::backward(cplx* data) const {
  fftw_execute_dft(plans_->backward, as_fftw(data), as_fftw(data));
}

void Fft3d::forward(cplx* data) const {
  fftw_execute_dft(plans_->forward, as_fftw(data), as_fftw(data));
}

void Fft3d::to_position(ComplexField& field) const {
  if (field.n_t != n_t_ || field.n_x != n_x_ || field.n_y != n_y_ || field.size() != size_) {
    throw InvalidArgument("field shape does not match the transform");
  }
  if (field.domain != Domain::spectral) throw InvalidArgument("field is not spectral");
  backward(field.data.data());
  const double s = 1.0 / std::sqrt(static_cast<double>(size_));
  for (auto& v : field.data) v *= s;
  field.domain = Domain::position;
}

void Fft3d::to_spectral(ComplexField& field) const {
  if (field.n_t != n_t_ || field.n_x != n_x_ || field.n_y != n_y_ || field.size() != size_) {
    throw InvalidArgument("field shape does not match the transform");
  }
  if (field.domain != Domain::position) throw InvalidArgument("field is not in position space");
  forward(field.data.data());
  const double s = 1.0 / std::sqrt(static_cast<double>(size_));
  for (auto& v : field.data) v *= s;
  field.domain = Domain::spectral;
}

}  // namespace parfluor
