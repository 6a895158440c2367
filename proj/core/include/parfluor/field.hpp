#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <vector>

#include "parfluor/grid.hpp"

namespace parfluor {

using cplx = std::complex<double>;

/// 64-byte aligned storage so every buffer shares the alignment of the
/// arrays the FFT plans were created with.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using FieldBuffer = std::vector<cplx, AlignedAllocator<cplx>>;

enum class Domain { spectral, position };

/// Complex amplitudes on a SimulationGrid. In the spectral domain element m
/// is the dimensionless mode amplitude alpha(kappa_m); the transforms are
/// unitary so sum |alpha|^2 is the same in both domains.
struct ComplexField {
  FieldBuffer data;
  Domain domain = Domain::spectral;
  double z = 0.0;
  int n_t = 0;
  int n_x = 0;
  int n_y = 0;

  ComplexField() = default;
  ComplexField(const SimulationGrid& grid, Domain d)
      : data(grid.size()), domain(d), n_t(grid.n_t), n_x(grid.n_x), n_y(grid.n_y) {}

  std::size_t size() const { return data.size(); }
  bool matches(const SimulationGrid& grid) const {
    return n_t == grid.n_t && n_x == grid.n_x && n_y == grid.n_y && data.size() == grid.size();
  }
  double norm_squared() const;
};

/// 3D FFT pair for one grid shape. Plans are built once (deterministic
/// FFTW_ESTIMATE planning) and may be executed concurrently on different
/// buffers.
class Fft3d {
 public:
  explicit Fft3d(const SimulationGrid& grid);
  ~Fft3d();
  Fft3d(const Fft3d&) = delete;
  Fft3d& operator=(const Fft3d&) = delete;

  /// Unnormalized e^{+i} transform (spectral -> position), in place.
  void backward(cplx* data) const;
  /// Unnormalized e^{-i} transform (position -> spectral), in place.
  void forward(cplx* data) const;

  /// Unitary transforms that also update the domain tag. Throw
  /// InvalidArgument on a shape or domain mismatch.
  void to_position(ComplexField& field) const;
  void to_spectral(ComplexField& field) const;

  std::size_t size() const { return size_; }

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t size_ = 0;
  int n_t_ = 0;
  int n_x_ = 0;
  int n_y_ = 0;
};

}  // namespace parfluor
