#include "cubemix/tape.hpp"

#include <cassert>

namespace cubemix {

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::leaf(Tensor value) {
    Node n;
    n.grad_leaf = value.requires_grad;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<VarId>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, std::vector<VarId> parents, Backprop backprop) {
    VarId self = static_cast<VarId>(nodes_.size());
    for (VarId p : parents) {
        if (p < 0 || p >= self) throw ValidationError("tape parents must precede the node");
    }
#ifndef NDEBUG
    // forward ops on finite inputs must produce finite outputs
    assert(value.all_finite() && "non-finite values produced by a forward op");
#endif
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return Var{this, self};
}

void Tape::backward(VarId root) {
    const Node& r = nodes_[static_cast<std::size_t>(root)];
    if (r.value.numel() != 1)
        throw DimensionError("backward root must be a scalar, got shape " +
                             shape_str(r.value.shape()));
    adjoints_.assign(nodes_.size(), Tensor{});
    adjoints_[static_cast<std::size_t>(root)] = Tensor::scalar(1.0);
    for (VarId id = root; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (adjoints_[static_cast<std::size_t>(id)].empty()) continue; // not on a path to root
        if (n.backprop) n.backprop(*this, id);
    }
}

Tensor Tape::adjoint(VarId id) const {
    const Tensor& a = adjoints_[static_cast<std::size_t>(id)];
    if (a.empty()) return Tensor(nodes_[static_cast<std::size_t>(id)].value.shape());
    return a;
}

void Tape::accumulate(VarId id, const Tensor& delta) {
    Tensor& slot = adjoints_[static_cast<std::size_t>(id)];
    if (slot.empty()) {
        slot = delta;
        return;
    }
    require_same_shape(slot, delta, "adjoint accumulate");
    double* d = slot.data();
    const double* s = delta.data();
    for (std::size_t i = 0; i < slot.numel(); ++i) d[i] += s[i];
}

std::unordered_map<VarId, Tensor> Tape::leaf_grads() const {
    std::unordered_map<VarId, Tensor> grads;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].grad_leaf) grads.emplace(static_cast<VarId>(i), adjoint(static_cast<VarId>(i)));
    }
    return grads;
}

std::unordered_map<VarId, Tensor> backward(Var root) {
    root.tape->backward(root.id);
    return root.tape->leaf_grads();
}

} // namespace cubemix
