#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "cubemix/tensor.hpp"

namespace cubemix {

class Tape;

using VarId = int;

/// Handle to a node on a tape. Cheap to copy; the tape owns the value.
struct Var {
    Tape* tape = nullptr;
    VarId id = -1;

    const Tensor& value() const;
    const std::vector<int>& shape() const { return value().shape(); }
};

/// Recorded computation graph for reverse-mode differentiation. Nodes are
/// appended in evaluation order, so node ids are already a topological order
/// and the backward sweep is a single reverse pass that touches each node
/// exactly once.
class Tape {
public:
    /// Backward rule of one recorded op: read adjoint(self), push contributions
    /// into the parents via accumulate().
    using Backprop = std::function<void(Tape&, VarId self)>;

    Var leaf(Tensor value);

    /// Records an op result. Parents must already live on this tape.
    Var record(Tensor value, std::vector<VarId> parents, Backprop backprop);

    const Tensor& value(VarId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    std::size_t size() const { return nodes_.size(); }

    /// Reverse accumulation from a scalar root. Clears any previous adjoints.
    void backward(VarId root);

    /// Adjoint of a node after backward(); zeros if the node was not reached.
    Tensor adjoint(VarId id) const;
    bool has_adjoint(VarId id) const { return !adjoints_[static_cast<std::size_t>(id)].empty(); }

    /// Gradients of every requires_grad leaf, keyed by node id.
    std::unordered_map<VarId, Tensor> leaf_grads() const;

    /// Used by backprop rules: adds delta into the pending adjoint of a node.
    void accumulate(VarId id, const Tensor& delta);

    // forward cost accounting, in multiply-accumulate units
    void add_flops(double f) { flops_ += f; }
    double flops() const { return flops_; }

private:
    struct Node {
        Tensor value;
        std::vector<VarId> parents;
        Backprop backprop; // empty for leaves
        bool grad_leaf = false;
    };

    std::vector<Node> nodes_;
    std::vector<Tensor> adjoints_;
    double flops_ = 0.0;
};

/// Top-level reverse pass per the training contract: root must be scalar;
/// returns gradient tensors for every requires_grad leaf, keyed by node id.
std::unordered_map<VarId, Tensor> backward(Var root);

} // namespace cubemix
