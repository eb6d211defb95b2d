#include "erreg/bayesnet.hpp"

#include <cmath>
#include <set>

#include "erreg/error.hpp"
#include "json_util.hpp"

namespace erreg {

namespace {

constexpr double kRowTolerance = 1e-9;

const char* kClassNames[] = {"observed_context", "observed_signal", "observed_introspection", "latent", "query"};

} // namespace

std::string_view node_class_name(NodeClass c) noexcept { return kClassNames[static_cast<int>(c)]; }

std::optional<NodeClass> parse_node_class(std::string_view text) noexcept {
    for (int i = 0; i < 5; ++i) {
        if (text == kClassNames[i]) return static_cast<NodeClass>(i);
    }
    return std::nullopt;
}

std::size_t Cpt::config_index(std::span<const std::size_t> parent_values) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < parent_values.size(); ++i) {
        idx = idx * parent_cardinalities[i] + parent_values[i];
    }
    return idx;
}

BayesNet::BayesNet(std::vector<NodeSpec> nodes, std::string query_node)
    : nodes_(std::move(nodes)), query_(std::move(query_node)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.domain.size() < 2) throw NetworkError("node '" + n.name + "' needs at least two states");
        std::set<std::string> values(n.domain.begin(), n.domain.end());
        if (values.size() != n.domain.size()) throw NetworkError("node '" + n.name + "' repeats a state");
        if (!by_name_.emplace(n.name, i).second) throw NetworkError("duplicate node '" + n.name + "'");
    }
    parent_index_.resize(nodes_.size());
    child_index_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        std::set<std::size_t> seen;
        for (const auto& p : nodes_[i].parents) {
            auto it = by_name_.find(p);
            if (it == by_name_.end()) {
                throw NetworkError("node '" + nodes_[i].name + "' has unknown parent '" + p + "'");
            }
            if (it->second == i || !seen.insert(it->second).second) {
                throw NetworkError("node '" + nodes_[i].name + "' has an invalid parent '" + p + "'");
            }
            parent_index_[i].push_back(it->second);
            child_index_[it->second].push_back(i);
        }
    }

    // Kahn's algorithm; ready nodes are taken in declaration order.
    std::vector<std::size_t> indegree(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) indegree[i] = parent_index_[i].size();
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (indegree[i] == 0) ready.insert(i);
    }
    while (!ready.empty()) {
        const auto n = *ready.begin();
        ready.erase(ready.begin());
        topo_.push_back(n);
        for (auto c : child_index_[n]) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    if (topo_.size() != nodes_.size()) throw NetworkError("network structure contains a cycle");

    if (!query_.empty() && !find(query_)) throw NetworkError("query node '" + query_ + "' is not in the network");

    cpts_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto& c = cpts_[i];
        c.node = nodes_[i].name;
        c.cardinality = cardinality(i);
        std::size_t rows = 1;
        for (auto p : parent_index_[i]) {
            c.parent_cardinalities.push_back(cardinality(p));
            rows *= cardinality(p);
        }
        c.table.assign(rows * c.cardinality, 1.0 / static_cast<double>(c.cardinality));
    }
}

std::optional<std::size_t> BayesNet::find(std::string_view name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t BayesNet::index(std::string_view name) const {
    auto i = find(name);
    if (!i) throw NetworkError("unknown node '" + std::string(name) + "'");
    return *i;
}

EdgeList BayesNet::edges() const {
    EdgeList out;
    for (const auto& n : nodes_) {
        for (const auto& p : n.parents) out.emplace_back(p, n.name);
    }
    return out;
}

void BayesNet::set_cpt(std::string_view name, std::vector<double> table) {
    auto& c = cpts_.at(index(name));
    if (table.size() != c.table.size()) {
        throw NetworkError("CPT for '" + std::string(name) + "' needs " + std::to_string(c.table.size()) +
                           " entries, got " + std::to_string(table.size()));
    }
    Cpt candidate = c;
    candidate.table = std::move(table);
    for (std::size_t r = 0; r < candidate.rows(); ++r) {
        double sum = 0.0;
        for (double p : candidate.row(r)) {
            if (!(p >= 0.0) || !std::isfinite(p)) {
                throw NetworkError("CPT for '" + std::string(name) + "' has an invalid entry");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowTolerance) {
            throw NetworkError("CPT row " + std::to_string(r) + " of '" + std::string(name) +
                               "' sums to " + std::to_string(sum));
        }
    }
    c = std::move(candidate);
}

double BayesNet::probability(std::size_t node, std::size_t value, std::span<const std::size_t> parent_values) const {
    const auto& c = cpts_[node];
    return c.table[c.config_index(parent_values) * c.cardinality + value];
}

void BayesNet::validate() const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& c = cpts_[i];
        std::size_t rows = 1;
        for (auto p : parent_index_[i]) rows *= cardinality(p);
        if (c.cardinality != cardinality(i) || c.table.size() != rows * c.cardinality) {
            throw NetworkError("CPT shape mismatch for '" + nodes_[i].name + "'");
        }
        for (std::size_t r = 0; r < c.rows(); ++r) {
            double sum = 0.0;
            for (double p : c.row(r)) {
                if (!(p >= 0.0)) throw NetworkError("negative CPT entry for '" + nodes_[i].name + "'");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowTolerance) {
                throw NetworkError("CPT row of '" + nodes_[i].name + "' does not sum to 1");
            }
        }
    }
}

BayesNet with_edges(const BayesNet& net, const EdgeList& edges) {
    std::vector<NodeSpec> nodes = net.nodes();
    for (auto& n : nodes) n.parents.clear();
    for (const auto& [parent, child] : edges) {
        if (!net.find(parent)) throw NetworkError("edge from unknown node '" + parent + "'");
        nodes[net.index(child)].parents.push_back(parent);
    }
    return BayesNet(std::move(nodes), net.query_node());
}

Json to_json(const BayesNet& net) {
    Json j;
    j["query_node"] = net.query_node();
    Json nodes = Json::array();
    for (const auto& n : net.nodes()) {
        Json jn;
        jn["name"] = n.name;
        jn["domain"] = n.domain;
        jn["parents"] = n.parents;
        jn["node_class"] = node_class_name(n.node_class);
        jn["source"] = n.source;
        nodes.push_back(jn);
    }
    j["nodes"] = nodes;
    Json cpts = Json::object();
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto& c = net.cpt(i);
        Json rows = Json::array();
        for (std::size_t r = 0; r < c.rows(); ++r) {
            auto row = c.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        Json jc;
        jc["parents"] = net.node(i).parents;
        jc["table"] = rows;
        cpts[net.node(i).name] = jc;
    }
    j["cpts"] = cpts;
    return j;
}

BayesNet net_from_json(const Json& j) {
    using detail::required;
    std::vector<NodeSpec> nodes;
    const auto jnodes = required<Json>(j, "nodes", "network");
    if (!jnodes.is_array()) throw ParseError("network", 0, "'nodes' must be an array");
    for (const auto& jn : jnodes) {
        NodeSpec n;
        n.name = required<std::string>(jn, "name", "node");
        n.domain = required<std::vector<std::string>>(jn, "domain", n.name);
        n.parents = required<std::vector<std::string>>(jn, "parents", n.name);
        const auto cls = required<std::string>(jn, "node_class", n.name);
        auto parsed = parse_node_class(cls);
        if (!parsed) throw ParseError(n.name, 0, "unknown node_class '" + cls + "'");
        n.node_class = *parsed;
        if (jn.contains("source")) n.source = required<std::string>(jn, "source", n.name);
        nodes.push_back(std::move(n));
    }
    std::string query;
    if (j.contains("query_node")) query = required<std::string>(j, "query_node", "network");
    BayesNet net(std::move(nodes), query);
    if (j.contains("cpts")) {
        const auto& cpts = j.at("cpts");
        for (std::size_t i = 0; i < net.size(); ++i) {
            const auto& name = net.node(i).name;
            if (!cpts.contains(name)) throw ParseError("network", 0, "missing CPT for '" + name + "'");
            const auto& jc = cpts.at(name);
            if (required<std::vector<std::string>>(jc, "parents", name) != net.node(i).parents) {
                throw ParseError("network", 0, "CPT parents of '" + name + "' disagree with the node");
            }
            std::vector<double> flat;
            for (const auto& row : required<Json>(jc, "table", name)) {
                auto values = row.get<std::vector<double>>();
                if (values.size() != net.cardinality(i)) {
                    throw ParseError("network", 0, "CPT row of '" + name + "' has the wrong width");
                }
                flat.insert(flat.end(), values.begin(), values.end());
            }
            net.set_cpt(name, std::move(flat));
        }
        if (cpts.size() != net.size()) throw ParseError("network", 0, "CPTs for unknown nodes present");
    }
    return net;
}

BayesNet load_net(const std::filesystem::path& path) {
    const Json j = detail::load_json_file(path);
    try {
        return net_from_json(j);
    } catch (const ParseError& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

void save_net(const BayesNet& net, const std::filesystem::path& path) {
    detail::write_file(path, to_json(net).dump(1) + "\n");
}

EdgeList load_edge_list(const std::filesystem::path& path) {
    const Json j = detail::load_json_file(path);
    if (!j.is_array()) throw ParseError(path.string(), 0, "edge list must be an array of [parent, child] pairs");
    EdgeList edges;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
            throw ParseError(path.string(), 0, "edge entries must be [parent, child] string pairs");
        }
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return edges;
}

} // namespace erreg
