#include <algorithm>
#include <cmath>
#include <limits>

#include "erreg/bayesnet.hpp"
#include "erreg/error.hpp"
#include "erreg/factor.hpp"

namespace erreg {

namespace {

// CPT of `node` as a factor over its unobserved family members.
Factor reduced_cpt(const BayesNet& net, std::size_t node, std::span<const int> evidence) {
    const auto& parents = net.parents(node);
    std::vector<std::size_t> family(parents.begin(), parents.end());
    family.push_back(node);

    Factor f;
    for (auto v : family) {
        if (evidence[v] < 0) f.vars.push_back(v);
    }
    std::sort(f.vars.begin(), f.vars.end());
    for (auto v : f.vars) f.cards.push_back(net.cardinality(v));
    std::size_t total = 1;
    for (auto c : f.cards) total *= c;
    f.values.resize(total);

    // Position of each family member inside the factor scope, or npos if observed.
    constexpr auto npos = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> slot(family.size(), npos);
    for (std::size_t k = 0; k < family.size(); ++k) {
        auto it = std::find(f.vars.begin(), f.vars.end(), family[k]);
        if (it != f.vars.end()) slot[k] = static_cast<std::size_t>(it - f.vars.begin());
    }

    const auto& cpt = net.cpt(node);
    std::vector<std::size_t> digit(f.vars.size(), 0);
    std::vector<std::size_t> parent_values(parents.size());
    for (std::size_t t = 0; t < total; ++t) {
        for (std::size_t k = 0; k < parents.size(); ++k) {
            parent_values[k] = slot[k] == npos ? static_cast<std::size_t>(evidence[family[k]]) : digit[slot[k]];
        }
        const std::size_t own = slot.back() == npos ? static_cast<std::size_t>(evidence[node]) : digit[slot.back()];
        f.values[t] = cpt.table[cpt.config_index(parent_values) * cpt.cardinality + own];
        for (std::size_t k = 0; k < digit.size(); ++k) {
            if (++digit[k] < f.cards[k]) break;
            digit[k] = 0;
        }
    }
    return f;
}

// Ancestral closure of the target and the evidence nodes; everything else is
// barren and sums to one.
std::vector<bool> relevant_nodes(const BayesNet& net, std::span<const int> evidence, std::size_t target) {
    std::vector<bool> keep(net.size(), false);
    std::vector<std::size_t> stack{target};
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (evidence[i] >= 0) stack.push_back(i);
    }
    while (!stack.empty()) {
        auto n = stack.back();
        stack.pop_back();
        if (keep[n]) continue;
        keep[n] = true;
        for (auto p : net.parents(n)) stack.push_back(p);
    }
    return keep;
}

std::size_t pick_min_degree(const std::vector<Factor>& factors, const std::vector<std::size_t>& pending) {
    std::size_t best = pending.front();
    std::size_t best_degree = std::numeric_limits<std::size_t>::max();
    for (auto v : pending) {
        std::vector<std::size_t> neighbours;
        for (const auto& f : factors) {
            if (!f.contains(v)) continue;
            neighbours.insert(neighbours.end(), f.vars.begin(), f.vars.end());
        }
        std::sort(neighbours.begin(), neighbours.end());
        neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());
        const std::size_t degree = neighbours.empty() ? 0 : neighbours.size() - 1;
        if (degree < best_degree || (degree == best_degree && v < best)) {
            best = v;
            best_degree = degree;
        }
    }
    return best;
}

} // namespace

std::vector<double> eliminate(const BayesNet& net, std::span<const int> evidence, std::size_t target,
                              EliminationOrder order) {
    if (evidence.size() != net.size()) throw NetworkError("evidence vector does not match the network size");
    if (target >= net.size()) throw NetworkError("target node index out of range");
    if (evidence[target] >= 0) {
        throw NetworkError("target '" + net.node(target).name + "' is part of the evidence");
    }
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (evidence[i] >= static_cast<int>(net.cardinality(i))) {
            throw NetworkError("evidence value index out of range for '" + net.node(i).name + "'");
        }
    }

    const auto keep = relevant_nodes(net, evidence, target);
    std::vector<Factor> factors;
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (keep[i]) factors.push_back(reduced_cpt(net, i, evidence));
    }

    std::vector<std::size_t> pending;
    if (order == EliminationOrder::Topological) {
        for (auto v : net.topological_order()) {
            if (keep[v] && evidence[v] < 0 && v != target) pending.push_back(v);
        }
    } else {
        for (std::size_t v = 0; v < net.size(); ++v) {
            if (keep[v] && evidence[v] < 0 && v != target) pending.push_back(v);
        }
    }

    while (!pending.empty()) {
        std::size_t var;
        if (order == EliminationOrder::Topological) {
            var = pending.front();
            pending.erase(pending.begin());
        } else {
            var = pick_min_degree(factors, pending);
            pending.erase(std::find(pending.begin(), pending.end(), var));
        }
        Factor joint = Factor::scalar(1.0);
        std::vector<Factor> rest;
        for (auto& f : factors) {
            if (f.contains(var)) {
                joint = factor_product(joint, f);
            } else {
                rest.push_back(std::move(f));
            }
        }
        rest.push_back(sum_out(joint, var));
        factors = std::move(rest);
    }

    Factor result = Factor::scalar(1.0);
    for (const auto& f : factors) result = factor_product(result, f);
    if (result.vars.size() != 1 || result.vars.front() != target) {
        throw NetworkError("elimination left an unexpected scope");
    }

    double total = 0.0;
    for (double v : result.values) total += v;
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw ImpossibleEvidence("evidence has zero probability under the network");
    }
    for (double& v : result.values) v /= total;
    return result.values;
}

std::vector<double> eliminate(const BayesNet& net, const Evidence& evidence, std::string_view target,
                              EliminationOrder order) {
    std::vector<int> ev(net.size(), -1);
    for (const auto& [name, value] : evidence.values) {
        const auto i = net.index(name);
        const auto& dom = net.node(i).domain;
        auto it = std::find(dom.begin(), dom.end(), value);
        if (it == dom.end()) {
            throw NetworkError("evidence value '" + value + "' is not in the domain of '" + name + "'");
        }
        ev[i] = static_cast<int>(it - dom.begin());
    }
    return eliminate(net, ev, net.index(target), order);
}

} // namespace erreg
