#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qgeo {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;   // complex state vectors
using Mat = Eigen::MatrixXcd;   // complex operators / ket collections
using RVec = Eigen::VectorXd;   // real parameter points, energies
using RMat = Eigen::MatrixXd;

inline constexpr cxd kI{0.0, 1.0};

// Max entrywise deviation from Hermiticity.
inline double hermiticity_defect(const Mat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

// Condition number of a Hermitian matrix, |lambda|_max / |lambda|_min.
// Returns +inf for a singular matrix.
double hermitian_condition(const Mat& h);

// Rank-3 complex tensor with dimensions n x n x n, dense row-major.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(Eigen::VectorXcd::Zero(n * n * n)) {}

  int dim() const { return n_; }
  cxd& operator()(int a, int b, int c) { return data_[(a * n_ + b) * n_ + c]; }
  cxd operator()(int a, int b, int c) const {
    return data_[(a * n_ + b) * n_ + c];
  }
  const Eigen::VectorXcd& raw() const { return data_; }
  Eigen::VectorXcd& raw() { return data_; }

  double max_abs() const {
    return data_.size() > 0 ? data_.cwiseAbs().maxCoeff() : 0.0;
  }

 private:
  int n_ = 0;
  Eigen::VectorXcd data_;
};

// Rank-4 complex tensor, n^4 entries.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n)
      : n_(n), data_(Eigen::VectorXcd::Zero(n * n * n * n)) {}

  int dim() const { return n_; }
  cxd& operator()(int a, int b, int c, int d) {
    return data_[((a * n_ + b) * n_ + c) * n_ + d];
  }
  cxd operator()(int a, int b, int c, int d) const {
    return data_[((a * n_ + b) * n_ + c) * n_ + d];
  }
  const Eigen::VectorXcd& raw() const { return data_; }

  double max_abs() const {
    return data_.size() > 0 ? data_.cwiseAbs().maxCoeff() : 0.0;
  }

 private:
  int n_ = 0;
  Eigen::VectorXcd data_;
};

}  // namespace qgeo
