#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hipcap/numerics/tape.hpp"
#include "hipcap/numerics/tensor.hpp"

/// Differentiable primitives. Every op records its result on the tape and,
/// when any input needs a gradient, a backward rule that accumulates into
/// its inputs. Shape mismatches raise DimensionError naming the operands.
namespace hipcap::ops {

/// W x + b with W of shape [m x n].
Var affine(Tape& t, Var x, Tensor& W, Tensor& b);
/// W x without bias.
Var matvec(Tape& t, Var x, Tensor& W);
/// Row `row` of an [r x c] matrix, as a length-c vector.
Var embedding(Tape& t, Tensor& table, std::size_t row);

Var sigmoid(Tape& t, Var x);
Var tanh(Tape& t, Var x);
Var relu(Tape& t, Var x);
Var hadamard(Tape& t, Var a, Var b);
Var add(Tape& t, Var a, Var b);
Var sum(Tape& t, std::span<const Var> xs);
Var scale(Tape& t, Var x, double factor);
Var mean(Tape& t, std::span<const Var> xs);
Var concat(Tape& t, std::span<const Var> xs);
Var slice(Tape& t, Var x, std::size_t offset, std::size_t length);

Var softmax(Tape& t, Var x);
Var log_softmax(Tape& t, Var x);

/// Element `index` of `x` as a length-1 value.
Var pick(Tape& t, Var x, std::size_t index);
/// Sum of all elements, as a length-1 value.
Var sum_elements(Tape& t, Var x);
/// Inner product of two equal-length vectors, as a length-1 value.
Var dot(Tape& t, Var a, Var b);
/// Sum_i weights[i] * items[i]; weights has one entry per item.
Var weighted_sum(Tape& t, Var weights, std::span<const Var> items);

/// Plain-array helpers shared by the ops and by inference code.
void softmax_inplace(std::span<double> x);
double log_sum_exp(std::span<const double> x);

}  // namespace hipcap::ops
