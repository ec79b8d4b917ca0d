#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spectral/types.hpp"

// Block kernels shared by the solver and the partitioner. None of them
// allocates an n-row temporary.
namespace spectral::detail {

// a^T b, accumulated over fixed row chunks in chunk order. With
// `fixed_chunks` the chunking is independent of the worker count.
Eigen::MatrixXd gram(ConstBlockRef a, ConstBlockRef b, bool fixed_chunks);

// x[:, 0:c.cols()] = x[:, 0:c.rows()] * c, in place, row chunk by row chunk.
// Requires x.cols() >= c.cols().
void right_multiply(BlockRef x, const Eigen::MatrixXd& c);

// Moves the listed columns (ascending) to the front, preserving order.
void select_columns(BlockRef x, const std::vector<Eigen::Index>& keep);

// Column 2-norms, summed in row order.
std::vector<double> column_norms(ConstBlockRef x);

}  // namespace spectral::detail
