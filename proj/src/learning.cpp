#include "erreg/learning.hpp"

#include <cmath>
#include <limits>

#include "erreg/deep_bn.hpp"
#include "erreg/error.hpp"
#include "erreg/rng.hpp"

namespace erreg {

namespace {

using Assignment = std::vector<int>;

struct Counts {
    std::vector<std::vector<double>> tables;

    explicit Counts(const BayesNet& net) {
        for (std::size_t i = 0; i < net.size(); ++i) tables.emplace_back(net.cpt(i).table.size(), 0.0);
    }

    void add(const BayesNet& net, const Assignment& a) {
        std::vector<std::size_t> pv;
        for (std::size_t i = 0; i < net.size(); ++i) {
            if (a[i] < 0) continue;
            pv.clear();
            bool complete = true;
            for (auto p : net.parents(i)) {
                if (a[p] < 0) {
                    complete = false;
                    break;
                }
                pv.push_back(static_cast<std::size_t>(a[p]));
            }
            if (!complete) continue;
            const auto& cpt = net.cpt(i);
            tables[i][cpt.config_index(pv) * cpt.cardinality + static_cast<std::size_t>(a[i])] += 1.0;
        }
    }
};

BayesNet estimate(const BayesNet& structure, const Counts& counts, double alpha) {
    BayesNet net = structure;
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto card = net.cardinality(i);
        std::vector<double> table = counts.tables[i];
        for (std::size_t r = 0; r < table.size() / card; ++r) {
            double total = 0.0;
            for (std::size_t k = 0; k < card; ++k) total += table[r * card + k];
            const double denom = total + alpha * static_cast<double>(card);
            for (std::size_t k = 0; k < card; ++k) {
                auto& cell = table[r * card + k];
                cell = denom > 0.0 ? (cell + alpha) / denom : 1.0 / static_cast<double>(card);
            }
        }
        net.set_cpt(net.node(i).name, std::move(table));
    }
    return net;
}

void check_inputs(const Corpus& corpus, double alpha) {
    if (!(alpha >= 0.0)) throw NetworkError("smoothing alpha must be non-negative");
    if (corpus.frame_count() == 0) throw NetworkError("cannot fit a network on an empty corpus");
}

double log_joint(const BayesNet& net, const Assignment& a) {
    double lp = 0.0;
    std::vector<std::size_t> pv;
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (a[i] < 0) continue;
        pv.clear();
        bool complete = true;
        for (auto p : net.parents(i)) {
            if (a[p] < 0) {
                complete = false;
                break;
            }
            pv.push_back(static_cast<std::size_t>(a[p]));
        }
        if (!complete) continue;
        const double p = net.probability(i, static_cast<std::size_t>(a[i]), pv);
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(p);
    }
    return lp;
}

} // namespace

BayesNet fit(const BayesNet& structure, const Corpus& corpus, double alpha) {
    check_inputs(corpus, alpha);
    Counts counts(structure);
    for (const auto& session : corpus.sessions) {
        for (const auto& frame : session.frames) {
            const auto values = frame_values(structure, frame, session);
            for (std::size_t i = 0; i < structure.size(); ++i) {
                if (structure.node(i).node_class == NodeClass::Latent && values[i] < 0) {
                    throw NetworkError("frame " + frame.record_id() + " carries no value for latent node '" +
                                       structure.node(i).name +
                                       "'; train on introspection-bearing data or use fit_em");
                }
            }
            counts.add(structure, values);
        }
    }
    return estimate(structure, counts, alpha);
}

EmResult fit_em(const BayesNet& init, const Corpus& corpus, double alpha, int max_iterations, double tolerance) {
    check_inputs(corpus, alpha);
    init.validate();
    if (max_iterations < 1) throw NetworkError("fit_em needs at least one iteration");

    struct Row {
        Assignment values;
        std::vector<std::size_t> hidden;
    };
    std::vector<Row> rows;
    for (const auto& session : corpus.sessions) {
        for (const auto& frame : session.frames) {
            Row r{frame_values(init, frame, session), {}};
            for (std::size_t i = 0; i < init.size(); ++i) {
                if (r.values[i] >= 0) continue;
                if (init.node(i).node_class == NodeClass::Latent) {
                    r.hidden.push_back(i);
                    continue;
                }
                // A missing observed node is summed out only if nothing below it is known.
                for (auto c : init.children(i)) {
                    if (r.values[c] >= 0 || init.node(c).node_class == NodeClass::Latent) {
                        throw NetworkError("frame " + frame.record_id() + " misses non-leaf node '" +
                                           init.node(i).name + "'");
                    }
                }
            }
            rows.push_back(std::move(r));
        }
    }

    EmResult result{init, 0, false, {}};
    for (int it = 0; it < max_iterations; ++it) {
        Counts counts(init);
        double total_ll = 0.0;
        for (auto& row : rows) {
            Assignment a = row.values;
            if (!row.hidden.empty()) {
                std::size_t combos = 1;
                for (auto h : row.hidden) combos *= init.cardinality(h);
                double best = -std::numeric_limits<double>::infinity();
                Assignment best_a = a;
                for (auto h : row.hidden) best_a[h] = 0;
                std::vector<std::size_t> digit(row.hidden.size(), 0);
                for (std::size_t c = 0; c < combos; ++c) {
                    for (std::size_t k = 0; k < row.hidden.size(); ++k) a[row.hidden[k]] = static_cast<int>(digit[k]);
                    const double lp = log_joint(result.net, a);
                    if (lp > best) {
                        best = lp;
                        best_a = a;
                    }
                    for (std::size_t k = 0; k < digit.size(); ++k) {
                        if (++digit[k] < init.cardinality(row.hidden[k])) break;
                        digit[k] = 0;
                    }
                }
                a = std::move(best_a);
                total_ll += best;
            } else {
                total_ll += log_joint(result.net, a);
            }
            counts.add(init, a);
        }
        result.log_likelihood.push_back(total_ll);
        result.net = estimate(init, counts, alpha);
        result.iterations = it + 1;
        const auto n = result.log_likelihood.size();
        if (n >= 2 && result.log_likelihood[n - 1] - result.log_likelihood[n - 2] < tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

BayesNet randomize_parameters(const BayesNet& net, std::uint64_t seed) {
    Rng rng(seed);
    BayesNet out = net;
    for (std::size_t i = 0; i < net.size(); ++i) {
        auto table = net.cpt(i).table;
        const auto card = net.cardinality(i);
        for (std::size_t r = 0; r < table.size() / card; ++r) {
            double total = 0.0;
            for (std::size_t k = 0; k < card; ++k) {
                table[r * card + k] = 0.05 + rng.uniform();
                total += table[r * card + k];
            }
            for (std::size_t k = 0; k < card; ++k) table[r * card + k] /= total;
        }
        out.set_cpt(net.node(i).name, std::move(table));
    }
    return out;
}

} // namespace erreg
