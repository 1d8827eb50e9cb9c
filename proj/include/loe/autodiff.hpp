// Copyright 2026 The LOE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace loe {

/// Handle to a node on a Tape. Only valid for the tape that produced it.
struct NodeId {
    std::uint32_t index = 0;
    friend bool operator==(NodeId, NodeId) = default;
};

/// Reverse-mode automatic differentiation over dense f64 vectors.
///
/// A Tape is an append-only computation graph: every operation creates a new
/// node whose inputs are earlier nodes, so the graph is acyclic by
/// construction and node order is a topological order. Values are computed
/// eagerly on append; forward() re-evaluates the whole graph (bit-identically
/// for identical leaf values), which is how leaves are re-bound after
/// set_leaf(). backward() accumulates d(output)/d(node) into per-node
/// gradient buffers for a scalar (length-1) output node.
///
/// Numerical guards, documented per call site:
///   - log(x) evaluates log(max(x, 1e-12)); gradient is 0 on the floor.
///   - div(a, b) floors |b| at 1e-12, preserving sign.
///   - cos_sim(a, b) floors each norm at 1e-12.
///
/// Single-threaded by design. A Tape and the parameter vectors feeding it
/// form an isolated unit that may be moved across threads as a whole.
class Tape {
public:
    /// Differentiable input node. Leaves are the only nodes whose values may
    /// be re-bound via set_leaf().
    NodeId leaf(std::vector<double> value);

    /// Non-differentiated input (a leaf in all respects; the name records
    /// intent at call sites).
    NodeId constant(std::vector<double> value) { return leaf(std::move(value)); }

    // Elementwise; operands must have equal lengths.
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);  // |denominator| floored at kDivEps

    NodeId scale(NodeId a, double factor);
    NodeId offset(NodeId a, double shift);
    NodeId relu(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);   // argument floored at kLogEps
    NodeId sqrt(NodeId a);  // argument clamped below at 0

    /// Sum of all components; result has length 1.
    NodeId sum(NodeId a);
    /// Inner product; result has length 1.
    NodeId dot(NodeId a, NodeId b);
    /// Cosine similarity with norms floored at kDivEps; result has length 1.
    NodeId cos_sim(NodeId a, NodeId b);

    /// y = W x + b with W a row-major (rows x cols) node, x of length cols,
    /// b of length rows.
    NodeId affine(NodeId w, NodeId b, NodeId x, std::size_t rows, std::size_t cols);

    /// out[i] = a[indices[i]]; backward scatter-adds.
    NodeId gather(NodeId a, std::vector<std::uint32_t> indices);

    /// sum_i weights[i] * scalars[i]; every input must have length 1.
    NodeId weighted_sum(std::span<const NodeId> scalars, std::span<const double> weights);

    /// Re-binds a leaf's value (same length required) and marks cached
    /// forward values stale until the next forward().
    void set_leaf(NodeId id, std::span<const double> value);

    /// Re-evaluates every node in order; returns the value of `output`.
    std::vector<double> forward(NodeId output);

    /// Accumulates gradients of a scalar output into all nodes. Gradients
    /// are zeroed first; the output's own gradient is exactly 1.
    void backward(NodeId output);

    const std::vector<double>& value(NodeId id) const;
    const std::vector<double>& grad(NodeId id) const;
    double scalar(NodeId id) const;

    std::size_t size() const { return nodes_.size(); }

    static constexpr double kLogEps = 1e-12;
    static constexpr double kDivEps = 1e-12;

private:
    enum class Op : std::uint8_t {
        kLeaf, kAdd, kSub, kMul, kDiv, kScale, kOffset, kRelu, kExp, kLog,
        kSqrt, kSum, kDot, kCosSim, kAffine, kGather, kWeightedSum,
    };

    struct Node {
        Op op;
        NodeId a, b, c;                     // inputs (used per-op)
        double attr = 0.0;                  // scale factor / offset shift
        std::size_t rows = 0, cols = 0;     // affine shape
        std::vector<std::uint32_t> indices; // gather
        std::vector<NodeId> terms;          // weighted_sum inputs
        std::vector<double> weights;        // weighted_sum coefficients
        std::vector<double> value;
        std::vector<double> grad;
    };

    NodeId push(Node node);
    void eval(Node& node);
    void check_same_length(NodeId a, NodeId b, const char* op) const;
    const Node& at(NodeId id) const;
    Node& at(NodeId id);

    std::vector<Node> nodes_;
    bool values_stale_ = false;
};

/// Max over the given leaves of the relative error between analytic
/// gradients of the scalar `output` and central finite differences with
/// step h: |analytic - numeric| / max(1, |analytic|).
double grad_check(Tape& tape, NodeId output, std::span<const NodeId> leaves, double h);

}  // namespace loe
