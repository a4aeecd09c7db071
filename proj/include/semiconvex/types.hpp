#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace semiconvex {

/// Largest chart dimension supported. Vectors and matrices are stack-allocated
/// with this bound so that hot loops never touch the heap.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

enum class ErrorCode {
  OutOfDomain,
  DegenerateMetric,
  StepFailure,
  LeftDomain,
  NotFound,
  NotRegular,
  DegeneratePoint,
  NotTangent,
  OffSurface,
  NoSurfacePoints,
  SideViolation,
  NotCausal,
  UnknownId,
  ParseError,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Small fixed-capacity symmetric matrix over an arbitrary scalar type. Used as
/// the output buffer of metric component evaluators, which run on dual numbers.
template <class T>
class SymBuffer {
 public:
  explicit SymBuffer(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  T& operator()(int i, int j) { return data_[i * kMaxDim + j]; }
  const T& operator()(int i, int j) const { return data_[i * kMaxDim + j]; }

  void set(int i, int j, const T& value) {
    data_[i * kMaxDim + j] = value;
    data_[j * kMaxDim + i] = value;
  }

  void fill(const T& value) { data_.fill(value); }

 private:
  int dim_;
  std::array<T, kMaxDim * kMaxDim> data_{};
};

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace semiconvex
