#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace erreg {

// Table over a sorted set of variables. The first variable changes fastest.
struct Factor {
    std::vector<std::size_t> vars;
    std::vector<std::size_t> cards;
    std::vector<double> values;

    static Factor scalar(double v) { return Factor{{}, {}, {v}}; }
    std::size_t stride_of(std::size_t var) const;
    bool contains(std::size_t var) const;
};

Factor factor_product(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, std::size_t var);

} // namespace erreg
