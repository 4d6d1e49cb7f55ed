#include "cubemix/params.hpp"

namespace cubemix {

int ParamTable::add(std::string name, Tensor value) {
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return static_cast<int>(values_.size()) - 1;
}

std::size_t ParamTable::scalar_count() const {
    std::size_t n = 0;
    for (const Tensor& t : values_) n += t.numel();
    return n;
}

std::vector<Var> ParamTable::bind(Tape& tape) const {
    std::vector<Var> vars;
    vars.reserve(values_.size());
    for (const Tensor& t : values_) {
        Tensor copy = t;
        copy.requires_grad = true;
        vars.push_back(tape.leaf(std::move(copy)));
    }
    return vars;
}

} // namespace cubemix
