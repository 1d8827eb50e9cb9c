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

#include "loe/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loe/errors.hpp"

namespace loe {

namespace {

double floor_denominator(double d) {
    if (d >= 0.0) return std::max(d, Tape::kDivEps);
    return std::min(d, -Tape::kDivEps);
}

}  // namespace

const Tape::Node& Tape::at(NodeId id) const { return nodes_[id.index]; }
Tape::Node& Tape::at(NodeId id) { return nodes_[id.index]; }

void Tape::check_same_length(NodeId a, NodeId b, const char* op) const {
    if (at(a).value.size() != at(b).value.size()) {
        throw ConfigError(std::string(op) + ": operand lengths differ (" +
                          std::to_string(at(a).value.size()) + " vs " +
                          std::to_string(at(b).value.size()) + ")");
    }
}

NodeId Tape::push(Node node) {
    eval(node);
    node.grad.assign(node.value.size(), 0.0);
    nodes_.push_back(std::move(node));
    return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Tape::leaf(std::vector<double> value) {
    Node n;
    n.op = Op::kLeaf;
    n.value = std::move(value);
    n.grad.assign(n.value.size(), 0.0);
    nodes_.push_back(std::move(n));
    return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Tape::add(NodeId a, NodeId b) {
    check_same_length(a, b, "add");
    Node n; n.op = Op::kAdd; n.a = a; n.b = b;
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    check_same_length(a, b, "sub");
    Node n; n.op = Op::kSub; n.a = a; n.b = b;
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    check_same_length(a, b, "mul");
    Node n; n.op = Op::kMul; n.a = a; n.b = b;
    return push(std::move(n));
}

NodeId Tape::div(NodeId a, NodeId b) {
    check_same_length(a, b, "div");
    Node n; n.op = Op::kDiv; n.a = a; n.b = b;
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double factor) {
    Node n; n.op = Op::kScale; n.a = a; n.attr = factor;
    return push(std::move(n));
}

NodeId Tape::offset(NodeId a, double shift) {
    Node n; n.op = Op::kOffset; n.a = a; n.attr = shift;
    return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
    Node n; n.op = Op::kRelu; n.a = a;
    return push(std::move(n));
}

NodeId Tape::exp(NodeId a) {
    Node n; n.op = Op::kExp; n.a = a;
    return push(std::move(n));
}

NodeId Tape::log(NodeId a) {
    Node n; n.op = Op::kLog; n.a = a;
    return push(std::move(n));
}

NodeId Tape::sqrt(NodeId a) {
    Node n; n.op = Op::kSqrt; n.a = a;
    return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
    Node n; n.op = Op::kSum; n.a = a;
    return push(std::move(n));
}

NodeId Tape::dot(NodeId a, NodeId b) {
    check_same_length(a, b, "dot");
    Node n; n.op = Op::kDot; n.a = a; n.b = b;
    return push(std::move(n));
}

NodeId Tape::cos_sim(NodeId a, NodeId b) {
    check_same_length(a, b, "cos_sim");
    Node n; n.op = Op::kCosSim; n.a = a; n.b = b;
    return push(std::move(n));
}

NodeId Tape::affine(NodeId w, NodeId b, NodeId x, std::size_t rows, std::size_t cols) {
    if (at(w).value.size() != rows * cols) {
        throw ConfigError("affine: weight length " + std::to_string(at(w).value.size()) +
                          " != rows*cols = " + std::to_string(rows * cols));
    }
    if (at(b).value.size() != rows) {
        throw ConfigError("affine: bias length " + std::to_string(at(b).value.size()) +
                          " != rows = " + std::to_string(rows));
    }
    if (at(x).value.size() != cols) {
        throw ConfigError("affine: input length " + std::to_string(at(x).value.size()) +
                          " != cols = " + std::to_string(cols));
    }
    Node n; n.op = Op::kAffine; n.a = w; n.b = b; n.c = x; n.rows = rows; n.cols = cols;
    return push(std::move(n));
}

NodeId Tape::gather(NodeId a, std::vector<std::uint32_t> indices) {
    for (std::uint32_t i : indices) {
        if (i >= at(a).value.size()) {
            throw ConfigError("gather: index " + std::to_string(i) + " out of range for length " +
                              std::to_string(at(a).value.size()));
        }
    }
    Node n; n.op = Op::kGather; n.a = a; n.indices = std::move(indices);
    return push(std::move(n));
}

NodeId Tape::weighted_sum(std::span<const NodeId> scalars, std::span<const double> weights) {
    if (scalars.size() != weights.size() || scalars.empty()) {
        throw ConfigError("weighted_sum: need equal, nonzero term and weight counts");
    }
    for (NodeId s : scalars) {
        if (at(s).value.size() != 1) {
            throw ConfigError("weighted_sum: every term must be scalar");
        }
    }
    Node n; n.op = Op::kWeightedSum;
    n.terms.assign(scalars.begin(), scalars.end());
    n.weights.assign(weights.begin(), weights.end());
    return push(std::move(n));
}

void Tape::eval(Node& n) {
    switch (n.op) {
        case Op::kLeaf:
            break;
        case Op::kAdd: {
            const auto& a = at(n.a).value; const auto& b = at(n.b).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = a[i] + b[i];
            break;
        }
        case Op::kSub: {
            const auto& a = at(n.a).value; const auto& b = at(n.b).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = a[i] - b[i];
            break;
        }
        case Op::kMul: {
            const auto& a = at(n.a).value; const auto& b = at(n.b).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = a[i] * b[i];
            break;
        }
        case Op::kDiv: {
            const auto& a = at(n.a).value; const auto& b = at(n.b).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = a[i] / floor_denominator(b[i]);
            break;
        }
        case Op::kScale: {
            const auto& a = at(n.a).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = n.attr * a[i];
            break;
        }
        case Op::kOffset: {
            const auto& a = at(n.a).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = a[i] + n.attr;
            break;
        }
        case Op::kRelu: {
            const auto& a = at(n.a).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = a[i] > 0.0 ? a[i] : 0.0;
            break;
        }
        case Op::kExp: {
            const auto& a = at(n.a).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = std::exp(a[i]);
            break;
        }
        case Op::kLog: {
            const auto& a = at(n.a).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = std::log(std::max(a[i], kLogEps));
            break;
        }
        case Op::kSqrt: {
            const auto& a = at(n.a).value;
            n.value.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) n.value[i] = std::sqrt(std::max(a[i], 0.0));
            break;
        }
        case Op::kSum: {
            const auto& a = at(n.a).value;
            double s = 0.0;
            for (double v : a) s += v;
            n.value.assign(1, s);
            break;
        }
        case Op::kDot: {
            const auto& a = at(n.a).value; const auto& b = at(n.b).value;
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
            n.value.assign(1, s);
            break;
        }
        case Op::kCosSim: {
            const auto& a = at(n.a).value; const auto& b = at(n.b).value;
            double sab = 0.0, saa = 0.0, sbb = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                sab += a[i] * b[i];
                saa += a[i] * a[i];
                sbb += b[i] * b[i];
            }
            const double na = std::max(std::sqrt(saa), kDivEps);
            const double nb = std::max(std::sqrt(sbb), kDivEps);
            n.value.assign(1, sab / (na * nb));
            break;
        }
        case Op::kAffine: {
            const auto& w = at(n.a).value; const auto& b = at(n.b).value;
            const auto& x = at(n.c).value;
            n.value.resize(n.rows);
            for (std::size_t r = 0; r < n.rows; ++r) {
                double s = b[r];
                const double* row = w.data() + r * n.cols;
                for (std::size_t c = 0; c < n.cols; ++c) s += row[c] * x[c];
                n.value[r] = s;
            }
            break;
        }
        case Op::kGather: {
            const auto& a = at(n.a).value;
            n.value.resize(n.indices.size());
            for (std::size_t i = 0; i < n.indices.size(); ++i) n.value[i] = a[n.indices[i]];
            break;
        }
        case Op::kWeightedSum: {
            double s = 0.0;
            for (std::size_t i = 0; i < n.terms.size(); ++i) s += n.weights[i] * at(n.terms[i]).value[0];
            n.value.assign(1, s);
            break;
        }
    }
}

void Tape::set_leaf(NodeId id, std::span<const double> value) {
    Node& n = at(id);
    if (n.op != Op::kLeaf) throw StateError("set_leaf: node is not a leaf");
    if (n.value.size() != value.size()) {
        throw ConfigError("set_leaf: length " + std::to_string(value.size()) +
                          " != declared leaf length " + std::to_string(n.value.size()));
    }
    std::copy(value.begin(), value.end(), n.value.begin());
    values_stale_ = true;
}

std::vector<double> Tape::forward(NodeId output) {
    for (Node& n : nodes_) eval(n);
    values_stale_ = false;
    return at(output).value;
}

void Tape::backward(NodeId output) {
    if (values_stale_) throw StateError("backward: leaf values changed; run forward() first");
    if (at(output).value.size() != 1) throw ConfigError("backward: output must be scalar");
    for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
    at(output).grad[0] = 1.0;

    for (std::size_t k = nodes_.size(); k-- > 0;) {
        Node& n = nodes_[k];
        switch (n.op) {
            case Op::kLeaf:
                break;
            case Op::kAdd: {
                auto& ga = at(n.a).grad; auto& gb = at(n.b).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    ga[i] += n.grad[i];
                    gb[i] += n.grad[i];
                }
                break;
            }
            case Op::kSub: {
                auto& ga = at(n.a).grad; auto& gb = at(n.b).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    ga[i] += n.grad[i];
                    gb[i] -= n.grad[i];
                }
                break;
            }
            case Op::kMul: {
                const auto& a = at(n.a).value; const auto& b = at(n.b).value;
                auto& ga = at(n.a).grad; auto& gb = at(n.b).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    ga[i] += n.grad[i] * b[i];
                    gb[i] += n.grad[i] * a[i];
                }
                break;
            }
            case Op::kDiv: {
                const auto& a = at(n.a).value; const auto& b = at(n.b).value;
                auto& ga = at(n.a).grad; auto& gb = at(n.b).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    const double d = floor_denominator(b[i]);
                    ga[i] += n.grad[i] / d;
                    // Denominator gradient flows only where the floor is inactive.
                    if (b[i] == d) gb[i] -= n.grad[i] * a[i] / (d * d);
                }
                break;
            }
            case Op::kScale: {
                auto& ga = at(n.a).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.attr * n.grad[i];
                break;
            }
            case Op::kOffset: {
                auto& ga = at(n.a).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
                break;
            }
            case Op::kRelu: {
                const auto& a = at(n.a).value;
                auto& ga = at(n.a).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    if (a[i] > 0.0) ga[i] += n.grad[i];
                }
                break;
            }
            case Op::kExp: {
                auto& ga = at(n.a).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * n.value[i];
                break;
            }
            case Op::kLog: {
                const auto& a = at(n.a).value;
                auto& ga = at(n.a).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    if (a[i] > kLogEps) ga[i] += n.grad[i] / a[i];
                }
                break;
            }
            case Op::kSqrt: {
                const auto& a = at(n.a).value;
                auto& ga = at(n.a).grad;
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    if (a[i] > 0.0) ga[i] += n.grad[i] * 0.5 / n.value[i];
                }
                break;
            }
            case Op::kSum: {
                auto& ga = at(n.a).grad;
                const double g = n.grad[0];
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
                break;
            }
            case Op::kDot: {
                const auto& a = at(n.a).value; const auto& b = at(n.b).value;
                auto& ga = at(n.a).grad; auto& gb = at(n.b).grad;
                const double g = n.grad[0];
                for (std::size_t i = 0; i < a.size(); ++i) {
                    ga[i] += g * b[i];
                    gb[i] += g * a[i];
                }
                break;
            }
            case Op::kCosSim: {
                // Derivative of the guarded forward: norms treated as
                // constants once the floor engages.
                const auto& a = at(n.a).value; const auto& b = at(n.b).value;
                auto& ga = at(n.a).grad; auto& gb = at(n.b).grad;
                double sab = 0.0, saa = 0.0, sbb = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    sab += a[i] * b[i];
                    saa += a[i] * a[i];
                    sbb += b[i] * b[i];
                }
                const double ra = std::sqrt(saa);
                const double rb = std::sqrt(sbb);
                const double na = std::max(ra, kDivEps);
                const double nb = std::max(rb, kDivEps);
                const double g = n.grad[0];
                const double inv = 1.0 / (na * nb);
                const bool a_free = ra > kDivEps;
                const bool b_free = rb > kDivEps;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    double da = b[i] * inv;
                    if (a_free) da -= sab * a[i] / (na * na * na * nb);
                    double db = a[i] * inv;
                    if (b_free) db -= sab * b[i] / (nb * nb * nb * na);
                    ga[i] += g * da;
                    gb[i] += g * db;
                }
                break;
            }
            case Op::kAffine: {
                const auto& w = at(n.a).value; const auto& x = at(n.c).value;
                auto& gw = at(n.a).grad; auto& gb = at(n.b).grad; auto& gx = at(n.c).grad;
                for (std::size_t r = 0; r < n.rows; ++r) {
                    const double g = n.grad[r];
                    gb[r] += g;
                    const double* wrow = w.data() + r * n.cols;
                    double* gwrow = gw.data() + r * n.cols;
                    for (std::size_t c = 0; c < n.cols; ++c) {
                        gwrow[c] += g * x[c];
                        gx[c] += g * wrow[c];
                    }
                }
                break;
            }
            case Op::kGather: {
                auto& ga = at(n.a).grad;
                for (std::size_t i = 0; i < n.indices.size(); ++i) ga[n.indices[i]] += n.grad[i];
                break;
            }
            case Op::kWeightedSum: {
                const double g = n.grad[0];
                for (std::size_t i = 0; i < n.terms.size(); ++i) {
                    at(n.terms[i]).grad[0] += g * n.weights[i];
                }
                break;
            }
        }
    }
}

const std::vector<double>& Tape::value(NodeId id) const { return at(id).value; }
const std::vector<double>& Tape::grad(NodeId id) const { return at(id).grad; }

double Tape::scalar(NodeId id) const {
    const Node& n = at(id);
    if (n.value.size() != 1) throw ConfigError("scalar: node is not scalar");
    return n.value[0];
}

double grad_check(Tape& tape, NodeId output, std::span<const NodeId> leaves, double h) {
    tape.forward(output);
    tape.backward(output);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(leaves.size());
    for (NodeId leaf : leaves) analytic.push_back(tape.grad(leaf));

    double worst = 0.0;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        std::vector<double> point = tape.value(leaves[li]);
        for (std::size_t i = 0; i < point.size(); ++i) {
            const double saved = point[i];
            point[i] = saved + h;
            tape.set_leaf(leaves[li], point);
            const double fp = tape.forward(output)[0];
            point[i] = saved - h;
            tape.set_leaf(leaves[li], point);
            const double fm = tape.forward(output)[0];
            point[i] = saved;
            tape.set_leaf(leaves[li], point);
            const double numeric = (fp - fm) / (2.0 * h);
            const double err = std::abs(analytic[li][i] - numeric) /
                               std::max(1.0, std::abs(analytic[li][i]));
            worst = std::max(worst, err);
        }
    }
    tape.forward(output);
    return worst;
}

}  // namespace loe
