#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace spectral {

using Index = std::int64_t;

// Dense n x l block of column vectors. Row-major so that one sparse row
// touches l contiguous entries during a multi-vector product.
using MultiVector = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BlockRef = Eigen::Ref<MultiVector, 0, Eigen::OuterStride<>>;
using ConstBlockRef = Eigen::Ref<const MultiVector, 0, Eigen::OuterStride<>>;

}  // namespace spectral
