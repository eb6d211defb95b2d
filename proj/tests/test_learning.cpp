#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "erreg/deep_bn.hpp"
#include "erreg/error.hpp"
#include "erreg/learning.hpp"
#include "fixtures.hpp"

using namespace erreg;

namespace {

std::size_t row_for(const BayesNet& net, std::string_view node, const std::vector<std::string>& parent_values) {
    const auto i = net.index(node);
    std::vector<std::size_t> idx;
    const auto& parents = net.parents(i);
    for (std::size_t k = 0; k < parents.size(); ++k) {
        const auto& d = net.node(parents[k]).domain;
        idx.push_back(static_cast<std::size_t>(std::find(d.begin(), d.end(), parent_values[k]) - d.begin()));
    }
    return net.cpt(i).config_index(idx);
}

} // namespace

TEST_CASE("two identical Rest frames with alpha 1 give 3/9") {
    const auto schema = default_schema();
    const auto c = fixture::corpus({fixture::session(schema, "P1", SituationId::OutfitRemark, 2)});
    const auto net = fit(build_deep_bn(c.schema), c, 1.0);
    const auto& er = net.node(net.index("EmotionRegulation"));
    // Parent order follows the edge list: Gender, Mindedness, Situation, InternalEmotionComponent.
    const auto row = row_for(net, "EmotionRegulation",
                             {"female", c.sessions[0].personal.mindedness_level, "OutfitRemark",
                              schema.introspection(feature::kInternalEmotion).domain.front()});
    const auto p = net.cpt("EmotionRegulation").row(row);
    const auto rest = static_cast<std::size_t>(std::find(er.domain.begin(), er.domain.end(), "Rest") - er.domain.begin());
    CHECK(p[rest] == doctest::Approx(3.0 / 9.0).epsilon(1e-15));
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k != rest) CHECK(p[k] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    }
}

TEST_CASE("one frame with alpha 0 gives one-hot touched rows and uniform untouched rows") {
    const auto schema = default_schema();
    const auto c = fixture::corpus({fixture::session(schema, "P1", SituationId::StandOutRemark, 1, StrategyLabel::Avoidance)});
    const auto net = fit(build_deep_bn(c.schema), c, 0.0);
    const auto& cpt = net.cpt("EmotionRegulation");
    const auto touched = row_for(net, "EmotionRegulation",
                                 {"female", c.sessions[0].personal.mindedness_level, "StandOutRemark",
                                  schema.introspection(feature::kInternalEmotion).domain.front()});
    for (std::size_t r = 0; r < cpt.rows(); ++r) {
        const auto row = cpt.row(r);
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (r == touched) {
                CHECK(row[k] == (k == index_of(StrategyLabel::Avoidance) ? 1.0 : 0.0));
            } else {
                CHECK(row[k] == doctest::Approx(1.0 / 7.0));
            }
        }
    }
}

TEST_CASE("unseen parent configurations are uniform under alpha 1") {
    const auto schema = default_schema();
    const auto c = fixture::corpus({fixture::session(schema, "P1", SituationId::OutfitRemark, 5)});
    const auto net = fit(build_deep_bn(c.schema), c, 1.0);
    const auto row = row_for(net, "EmotionRegulation", {"male", "low", "StandOutRemark", "anger"});
    for (double p : net.cpt("EmotionRegulation").row(row)) CHECK(p == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    CHECK_NOTHROW(net.validate());
}

TEST_CASE("fit does not depend on session order") {
    auto c = fixture::synthetic(9, 3, 40);
    const auto structure = build_deep_bn(c.schema);
    const auto a = fit(structure, c, 1.0);
    std::reverse(c.sessions.begin(), c.sessions.end());
    std::rotate(c.sessions.begin(), c.sessions.begin() + 2, c.sessions.end());
    const auto b = fit(structure, c, 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.cpt(i).table == b.cpt(i).table);
}

TEST_CASE("fit refuses frames without introspection and empty corpora") {
    const auto c = split_introspection(fixture::synthetic(2, 2, 10));
    const auto structure = build_deep_bn(c.schema);
    try {
        fit(structure, c, 1.0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("fit_em") != std::string::npos);
    }
    Corpus empty;
    empty.schema = default_schema();
    CHECK_THROWS(fit(structure, empty, 1.0));
    CHECK_THROWS(fit(structure, fixture::synthetic(2, 2, 10), -1.0));
}

TEST_CASE("hard EM converges on label-only data") {
    const auto c = split_introspection(fixture::synthetic(4, 3, 40));
    const auto structure = build_deep_bn(c.schema);
    const auto r = fit_em(randomize_parameters(structure, 1), c, 1.0, 50, 1e-6);
    CHECK(r.converged);
    CHECK(r.iterations <= 50);
    REQUIRE(!r.log_likelihood.empty());
    CHECK(r.log_likelihood.back() >= r.log_likelihood.front());
    CHECK_NOTHROW(r.net.validate());
}

TEST_CASE("hard EM on fully observed data reproduces fit") {
    const auto c = fixture::synthetic(6, 2, 30);
    const auto structure = build_deep_bn(c.schema);
    const auto direct = fit(structure, c, 1.0);
    const auto r = fit_em(randomize_parameters(structure, 3), c, 1.0);
    CHECK(r.converged);
    for (std::size_t i = 0; i < direct.size(); ++i) CHECK(direct.cpt(i).table == r.net.cpt(i).table);
}

TEST_CASE("randomized parameters are valid and seed dependent") {
    const auto structure = build_deep_bn(default_schema());
    const auto a = randomize_parameters(structure, 1);
    const auto b = randomize_parameters(structure, 1);
    const auto c = randomize_parameters(structure, 2);
    CHECK_NOTHROW(a.validate());
    CHECK(a.cpt(0).table == b.cpt(0).table);
    CHECK(a.cpt(0).table != c.cpt(0).table);
}
