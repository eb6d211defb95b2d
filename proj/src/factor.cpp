#include "erreg/factor.hpp"

#include <algorithm>

namespace erreg {

std::size_t Factor::stride_of(std::size_t var) const {
    std::size_t stride = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i] == var) return stride;
        stride *= cards[i];
    }
    return 0;
}

bool Factor::contains(std::size_t var) const {
    return std::binary_search(vars.begin(), vars.end(), var);
}

Factor factor_product(const Factor& a, const Factor& b) {
    Factor out;
    std::size_t i = 0, j = 0;
    while (i < a.vars.size() || j < b.vars.size()) {
        if (j == b.vars.size() || (i < a.vars.size() && a.vars[i] < b.vars[j])) {
            out.vars.push_back(a.vars[i]);
            out.cards.push_back(a.cards[i++]);
        } else if (i == a.vars.size() || b.vars[j] < a.vars[i]) {
            out.vars.push_back(b.vars[j]);
            out.cards.push_back(b.cards[j++]);
        } else {
            out.vars.push_back(a.vars[i]);
            out.cards.push_back(a.cards[i]);
            ++i;
            ++j;
        }
    }

    const std::size_t n = out.vars.size();
    std::vector<std::size_t> sa(n), sb(n);
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) {
        sa[k] = a.stride_of(out.vars[k]);
        sb[k] = b.stride_of(out.vars[k]);
        total *= out.cards[k];
    }
    out.values.resize(total);

    std::vector<std::size_t> digit(n, 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t t = 0; t < total; ++t) {
        out.values[t] = a.values[ia] * b.values[ib];
        for (std::size_t k = 0; k < n; ++k) {
            if (++digit[k] == out.cards[k]) {
                digit[k] = 0;
                ia -= (out.cards[k] - 1) * sa[k];
                ib -= (out.cards[k] - 1) * sb[k];
            } else {
                ia += sa[k];
                ib += sb[k];
                break;
            }
        }
    }
    return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
    auto pos = std::find(f.vars.begin(), f.vars.end(), var);
    if (pos == f.vars.end()) return f;
    const auto k = static_cast<std::size_t>(pos - f.vars.begin());
    const std::size_t stride = f.stride_of(var);
    const std::size_t card = f.cards[k];
    const std::size_t block = stride * card;

    Factor out;
    out.vars = f.vars;
    out.cards = f.cards;
    out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(k));
    out.cards.erase(out.cards.begin() + static_cast<std::ptrdiff_t>(k));
    out.values.assign(f.values.size() / card, 0.0);
    for (std::size_t outer = 0; outer < f.values.size() / block; ++outer) {
        for (std::size_t v = 0; v < card; ++v) {
            const double* src = f.values.data() + outer * block + v * stride;
            double* dst = out.values.data() + outer * stride;
            for (std::size_t inner = 0; inner < stride; ++inner) dst[inner] += src[inner];
        }
    }
    return out;
}

} // namespace erreg
