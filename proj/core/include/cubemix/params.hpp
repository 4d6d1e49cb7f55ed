#pragma once

#include <string>
#include <vector>

#include "cubemix/tape.hpp"
#include "cubemix/tensor.hpp"

namespace cubemix {

/// Flat registry of named trainable tensors. Construction order is the
/// canonical order for checkpoints, optimizer state, and gradient reduction.
class ParamTable {
public:
    int add(std::string name, Tensor value);

    int count() const { return static_cast<int>(values_.size()); }
    const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
    Tensor& value(int i) { return values_[static_cast<std::size_t>(i)]; }
    const Tensor& value(int i) const { return values_[static_cast<std::size_t>(i)]; }

    std::size_t scalar_count() const;

    /// Registers every entry as a requires_grad leaf on the tape; the result
    /// is indexed like the table.
    std::vector<Var> bind(Tape& tape) const;

private:
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
};

} // namespace cubemix
