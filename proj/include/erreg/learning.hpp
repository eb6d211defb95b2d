#pragma once

#include <cstdint>
#include <vector>

#include "erreg/bayesnet.hpp"
#include "erreg/corpus.hpp"

namespace erreg {

// Smoothed maximum-likelihood CPTs:
//   P(x | u) = (N(x, u) + alpha) / (N(u) + alpha * |X|)
// Rows without counts (only reachable with alpha == 0) are uniform. Latent
// nodes take their training value from their corpus source (introspection),
// so every frame must carry introspection.
BayesNet fit(const BayesNet& structure, const Corpus& corpus, double alpha = 1.0);

struct EmResult {
    BayesNet net;
    int iterations = 0;
    bool converged = false;
    // Complete-data log-likelihood of each E-step's imputation.
    std::vector<double> log_likelihood;
};

// Hard EM for frames whose latent values are missing: impute the jointly most
// probable latent assignment, refit, repeat until the log-likelihood improves
// by less than `tolerance` or `max_iterations` is reached. Latent values that
// the frame does carry are used as observed. `init` supplies the starting CPTs.
EmResult fit_em(const BayesNet& init, const Corpus& corpus, double alpha = 1.0, int max_iterations = 50,
                double tolerance = 1e-6);

// Copy with every CPT row replaced by a random distribution; used to break
// symmetry before fit_em.
BayesNet randomize_parameters(const BayesNet& net, std::uint64_t seed);

} // namespace erreg
