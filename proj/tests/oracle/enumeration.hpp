#pragma once

// Reference implementations that share no code with the factor and
// elimination engine: exhaustive joint enumeration over CPT lookups, and a
// generator of random small networks.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "erreg/bayesnet.hpp"

namespace oracle {

// P(target | evidence) by summing the full joint. evidence[i] < 0 = unobserved.
inline std::vector<double> enumerate_posterior(const erreg::BayesNet& net, const std::vector<int>& evidence,
                                               std::size_t target) {
    const std::size_t n = net.size();
    std::vector<std::size_t> a(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (evidence[i] >= 0) a[i] = static_cast<std::size_t>(evidence[i]);
    }
    std::vector<double> out(net.cardinality(target), 0.0);
    std::vector<std::size_t> pv;
    while (true) {
        double p = 1.0;
        for (std::size_t i = 0; i < n && p > 0.0; ++i) {
            pv.clear();
            for (auto q : net.parents(i)) pv.push_back(a[q]);
            p *= net.probability(i, a[i], pv);
        }
        out[a[target]] += p;
        // Odometer over the unobserved nodes.
        std::size_t i = 0;
        for (; i < n; ++i) {
            if (evidence[i] >= 0) continue;
            if (++a[i] < net.cardinality(i)) break;
            a[i] = 0;
        }
        if (i == n) break;
    }
    double z = 0.0;
    for (double x : out) z += x;
    for (double& x : out) x /= z;
    return out;
}

struct RandomCase {
    erreg::BayesNet net;
    std::vector<int> evidence;
    std::size_t target = 0;
};

// Random DAG: up to `max_nodes` nodes, 2..max_states states, at most
// `max_parents` parents, strictly positive CPTs, nodes declared in shuffled order.
inline RandomCase random_case(std::uint64_t seed, std::size_t max_nodes = 12, std::size_t max_states = 3,
                              std::size_t max_parents = 3, double observe_p = 0.35) {
    std::mt19937_64 rng(seed);
    auto uni = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    const std::size_t n = uni(2, max_nodes);
    std::vector<std::size_t> card(n);
    std::vector<std::vector<std::size_t>> parents(n);
    for (std::size_t i = 0; i < n; ++i) {
        card[i] = uni(2, max_states);
        std::vector<std::size_t> candidates(i);
        for (std::size_t k = 0; k < i; ++k) candidates[k] = k;
        std::shuffle(candidates.begin(), candidates.end(), rng);
        const std::size_t np = std::min(i, uni(0, max_parents));
        parents[i].assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(np));
    }
    std::vector<std::size_t> decl(n);
    for (std::size_t i = 0; i < n; ++i) decl[i] = i;
    std::shuffle(decl.begin(), decl.end(), rng);

    std::vector<erreg::NodeSpec> specs;
    for (auto i : decl) {
        erreg::NodeSpec s;
        s.name = "X" + std::to_string(i);
        for (std::size_t v = 0; v < card[i]; ++v) s.domain.push_back("v" + std::to_string(v));
        for (auto p : parents[i]) s.parents.push_back("X" + std::to_string(p));
        specs.push_back(std::move(s));
    }
    RandomCase rc{erreg::BayesNet(specs), {}, 0};
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    for (std::size_t j = 0; j < rc.net.size(); ++j) {
        const auto& cpt = rc.net.cpt(j);
        std::vector<double> table;
        for (std::size_t r = 0; r < cpt.rows(); ++r) {
            std::vector<double> row(cpt.cardinality);
            double z = 0.0;
            for (auto& x : row) z += (x = weight(rng));
            for (auto x : row) table.push_back(x / z);
        }
        rc.net.set_cpt(rc.net.node(j).name, std::move(table));
    }
    rc.target = uni(0, n - 1);
    std::bernoulli_distribution observe(observe_p);
    rc.evidence.assign(n, -1);
    for (std::size_t j = 0; j < n; ++j) {
        if (j != rc.target && observe(rng)) rc.evidence[j] = static_cast<int>(uni(0, rc.net.cardinality(j) - 1));
    }
    return rc;
}

} // namespace oracle
