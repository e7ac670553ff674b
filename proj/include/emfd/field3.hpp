/// @file field3.hpp
/// @brief Flat 3D array with x-fastest storage.

#pragma once

#include <cstddef>
#include <vector>

namespace emfd {

class Field3 {
 public:
  Field3() = default;
  Field3(int nx, int ny, int nz)
      : nx_(nx), ny_(ny), nz_(nz),
        v_(static_cast<size_t>(nx) * ny * nz, 0.0) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  size_t size() const { return v_.size(); }

  size_t idx(int i, int j, int k) const {
    return static_cast<size_t>(i) +
           static_cast<size_t>(nx_) * (static_cast<size_t>(j) + static_cast<size_t>(ny_) * k);
  }
  double& operator()(int i, int j, int k) { return v_[idx(i, j, k)]; }
  double operator()(int i, int j, int k) const { return v_[idx(i, j, k)]; }
  double& operator[](size_t n) { return v_[n]; }
  double operator[](size_t n) const { return v_[n]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  void fill(double value) { v_.assign(v_.size(), value); }

 private:
  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<double> v_;
};

}  // namespace emfd
