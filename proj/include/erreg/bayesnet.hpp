#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "erreg/schema.hpp"

namespace erreg {

enum class NodeClass { ObservedContext, ObservedSignal, ObservedIntrospection, Latent, Query };

std::string_view node_class_name(NodeClass c) noexcept;
std::optional<NodeClass> parse_node_class(std::string_view text) noexcept;
constexpr bool is_observed(NodeClass c) noexcept {
    return c == NodeClass::ObservedContext || c == NodeClass::ObservedSignal ||
           c == NodeClass::ObservedIntrospection;
}

struct NodeSpec {
    std::string name;
    std::vector<std::string> domain;
    std::vector<std::string> parents;
    NodeClass node_class = NodeClass::Latent;
    // Corpus field that supplies the node's value, e.g. "nonverbal:Head",
    // "introspection:Display rule", "personal:Gender", "mindedness",
    // "situation", "label". Empty when the corpus never carries it.
    std::string source;

    bool operator==(const NodeSpec&) const = default;
};

// Conditional probability table stored densely: one row per parent
// configuration (first parent is the most significant digit), each row a
// distribution over the node's domain.
struct Cpt {
    std::string node;
    std::size_t cardinality = 0;
    std::vector<std::size_t> parent_cardinalities;
    std::vector<double> table;

    std::size_t rows() const noexcept { return cardinality ? table.size() / cardinality : 0; }
    std::span<const double> row(std::size_t config) const {
        return {table.data() + config * cardinality, cardinality};
    }
    std::span<double> row(std::size_t config) { return {table.data() + config * cardinality, cardinality}; }
    // Row index of a parent configuration given as value indices in parent order.
    std::size_t config_index(std::span<const std::size_t> parent_values) const;
};

using EdgeList = std::vector<std::pair<std::string, std::string>>;

// Discrete network over categorical nodes. Construction validates acyclicity
// and installs uniform CPTs.
class BayesNet {
public:
    BayesNet() = default;
    explicit BayesNet(std::vector<NodeSpec> nodes, std::string query_node = {});

    std::size_t size() const noexcept { return nodes_.size(); }
    const std::vector<NodeSpec>& nodes() const noexcept { return nodes_; }
    const NodeSpec& node(std::size_t i) const { return nodes_.at(i); }
    std::optional<std::size_t> find(std::string_view name) const;
    // Throws NetworkError for unknown names.
    std::size_t index(std::string_view name) const;
    std::size_t cardinality(std::size_t i) const { return nodes_[i].domain.size(); }
    const std::vector<std::size_t>& parents(std::size_t i) const { return parent_index_[i]; }
    const std::vector<std::size_t>& children(std::size_t i) const { return child_index_[i]; }
    const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }
    const std::string& query_node() const noexcept { return query_; }
    EdgeList edges() const;

    const Cpt& cpt(std::size_t i) const { return cpts_.at(i); }
    const Cpt& cpt(std::string_view name) const { return cpts_.at(index(name)); }
    // Replaces a table; throws NetworkError unless every row is a distribution (±1e-9).
    void set_cpt(std::string_view name, std::vector<double> table);

    double probability(std::size_t node, std::size_t value, std::span<const std::size_t> parent_values) const;

    // CPT invariants: shapes, non-negativity, rows summing to 1 ± 1e-9.
    void validate() const;

private:
    std::vector<NodeSpec> nodes_;
    std::vector<Cpt> cpts_;
    std::vector<std::vector<std::size_t>> parent_index_;
    std::vector<std::vector<std::size_t>> child_index_;
    std::vector<std::size_t> topo_;
    std::map<std::string, std::size_t, std::less<>> by_name_;
    std::string query_;
};

// Same node set with parents replaced by the given edge list.
BayesNet with_edges(const BayesNet& net, const EdgeList& edges);

Json to_json(const BayesNet& net);
BayesNet net_from_json(const Json& j);
BayesNet load_net(const std::filesystem::path& path);
void save_net(const BayesNet& net, const std::filesystem::path& path);
EdgeList load_edge_list(const std::filesystem::path& path);

// Observed values by node name.
struct Evidence {
    std::map<std::string, std::string> values;
};

enum class EliminationOrder { MinDegree, Topological };

// Exact posterior P(target | evidence) by variable elimination. Nodes that are
// not ancestors of the target or of an evidence node are pruned first.
// Throws NetworkError for unknown nodes/values or evidence on the target, and
// ImpossibleEvidence when the evidence has probability zero.
std::vector<double> eliminate(const BayesNet& net, const Evidence& evidence, std::string_view target,
                              EliminationOrder order = EliminationOrder::MinDegree);

// Index form: evidence[i] is a value index or -1 when node i is unobserved.
std::vector<double> eliminate(const BayesNet& net, std::span<const int> evidence, std::size_t target,
                              EliminationOrder order = EliminationOrder::MinDegree);

} // namespace erreg
