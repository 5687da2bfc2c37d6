#include "due/network_model.hpp"

#include "due/error.hpp"
#include "due/json_schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace due {

int NetworkSpec::link_index(const std::string& id) const {
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

int NetworkSpec::od_index(const std::string& id) const {
    for (std::size_t i = 0; i < od_pairs.size(); ++i) {
        if (od_pairs[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

int NetworkSpec::od_of_path(int p) const {
    const int od = od_index(paths.at(static_cast<std::size_t>(p)).od);
    if (od < 0) throw Error(ErrorCode::InvalidArgument, "path '" + paths[p].id + "' references unknown O-D pair");
    return od;
}

std::vector<int> NetworkSpec::paths_of_od(int od) const {
    std::vector<int> out;
    const std::string& id = od_pairs.at(static_cast<std::size_t>(od)).id;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        if (paths[p].od == id) out.push_back(static_cast<int>(p));
    }
    return out;
}

std::vector<int> NetworkSpec::link_indices(int p) const {
    std::vector<int> out;
    for (const std::string& id : paths.at(static_cast<std::size_t>(p)).links) {
        const int l = link_index(id);
        if (l < 0) throw Error(ErrorCode::InvalidArgument, "path '" + paths[p].id + "' references unknown link '" + id + "'");
        out.push_back(l);
    }
    return out;
}

std::vector<Violation> validate(const NetworkSpec& spec, std::optional<Horizon> horizon) {
    std::vector<Violation> out;
    auto add = [&out](std::string entity, std::string rule, std::string message) {
        out.push_back({std::move(entity), std::move(rule), std::move(message)});
    };
    auto entity = [](const char* list, std::size_t i) { return std::string(list) + "[" + std::to_string(i) + "]"; };

    const std::set<std::string> nodes(spec.nodes.begin(), spec.nodes.end());
    if (nodes.size() != spec.nodes.size()) add("nodes", "id.unique", "duplicate node id");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < spec.links.size(); ++i) {
        const Link& l = spec.links[i];
        const std::string e = entity("links", i);
        if (!seen.insert(l.id).second) add(e, "id.unique", "duplicate link id '" + l.id + "'");
        if (!nodes.count(l.tail)) add(e, "link.endpoint_exists", "unknown tail node '" + l.tail + "'");
        if (!nodes.count(l.head)) add(e, "link.endpoint_exists", "unknown head node '" + l.head + "'");
        if (!(l.free_flow_time > 0.0)) add(e, "link.free_flow_positive", "free-flow time a must be > 0");
        if (!(l.congestion_slope >= 0.0)) add(e, "link.slope_nonnegative", "congestion slope b must be >= 0");
    }

    seen.clear();
    for (std::size_t i = 0; i < spec.od_pairs.size(); ++i) {
        const OdPair& od = spec.od_pairs[i];
        const std::string e = entity("od_pairs", i);
        if (!seen.insert(od.id).second) add(e, "id.unique", "duplicate O-D id '" + od.id + "'");
        if (!nodes.count(od.origin)) add(e, "od.endpoint_exists", "unknown origin '" + od.origin + "'");
        if (!nodes.count(od.destination)) add(e, "od.endpoint_exists", "unknown destination '" + od.destination + "'");
        if (!(od.demand > 0.0)) add(e, "od.demand_positive", "demand Q must be > 0");
        if (horizon && !(od.target_arrival >= horizon->t0 && od.target_arrival <= horizon->tf)) {
            add(e, "od.target_in_horizon", "target arrival T_A outside [t0, tf]");
        }
        if (spec.paths_of_od(static_cast<int>(i)).empty()) add(e, "od.coverage", "O-D pair has no path");
    }

    seen.clear();
    for (std::size_t i = 0; i < spec.paths.size(); ++i) {
        const Path& p = spec.paths[i];
        const std::string e = entity("paths", i);
        if (!seen.insert(p.id).second) add(e, "id.unique", "duplicate path id '" + p.id + "'");
        const int od = spec.od_index(p.od);
        if (od < 0) add(e, "path.od_exists", "unknown O-D pair '" + p.od + "'");
        if (p.links.empty()) {
            add(e, "path.nonempty", "path has no links");
            continue;
        }
        std::vector<const Link*> links;
        for (const std::string& id : p.links) {
            const int l = spec.link_index(id);
            if (l < 0) {
                add(e, "path.link_exists", "unknown link '" + id + "'");
            } else {
                links.push_back(&spec.links[static_cast<std::size_t>(l)]);
            }
        }
        if (links.size() != p.links.size()) continue;

        bool connected = true;
        for (std::size_t k = 1; k < links.size(); ++k) {
            if (links[k - 1]->head != links[k]->tail) {
                add(e, "path.connectivity",
                    "link '" + links[k]->id + "' does not start where '" + links[k - 1]->id + "' ends");
                connected = false;
            }
        }
        if (od >= 0) {
            const OdPair& pair = spec.od_pairs[static_cast<std::size_t>(od)];
            if (links.front()->tail != pair.origin) add(e, "path.origin", "path does not start at the O-D origin");
            if (links.back()->head != pair.destination) {
                add(e, "path.destination", "path does not end at the O-D destination");
            }
        }
        if (connected) {
            std::set<std::string> visited{links.front()->tail};
            for (const Link* l : links) {
                if (!visited.insert(l->head).second) {
                    add(e, "path.no_repeated_nodes", "path revisits node '" + l->head + "'");
                    break;
                }
            }
        }
    }
    return out;
}

Eigen::MatrixXi path_incidence(const NetworkSpec& spec) {
    Eigen::MatrixXi out = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(spec.paths.size()),
                                                static_cast<Eigen::Index>(spec.od_pairs.size()));
    for (std::size_t p = 0; p < spec.paths.size(); ++p) {
        const int od = spec.od_index(spec.paths[p].od);
        if (od >= 0) out(static_cast<Eigen::Index>(p), od) = 1;
    }
    return out;
}

NetworkSpec parse_network(const std::string& text) {
    const nlohmann::json doc = schema::parse_document(text);
    schema::Object root(doc, "");
    root.allow_only({"nodes", "links", "paths", "od_pairs"});

    NetworkSpec spec;
    for (const auto& item : root.array("nodes")) spec.nodes.push_back(item.as_string());

    for (const auto& item : root.array("links")) {
        schema::Object obj = item.object();
        obj.allow_only({"id", "tail", "head", "a", "b"});
        spec.links.push_back({obj.string("id"), obj.string("tail"), obj.string("head"), obj.number("a"),
                              obj.number("b")});
    }
    for (const auto& item : root.array("paths")) {
        schema::Object obj = item.object();
        obj.allow_only({"id", "od", "links"});
        Path p{obj.string("id"), obj.string("od"), {}};
        for (const auto& l : obj.array("links")) p.links.push_back(l.as_string());
        spec.paths.push_back(std::move(p));
    }
    for (const auto& item : root.array("od_pairs")) {
        schema::Object obj = item.object();
        obj.allow_only({"id", "origin", "destination", "Q", "T_A"});
        spec.od_pairs.push_back({obj.string("id"), obj.string("origin"), obj.string("destination"),
                                 obj.number("Q"), obj.number("T_A")});
    }
    return spec;
}

NetworkSpec load_network(const std::filesystem::path& path) {
    return parse_network(schema::read_file(path));
}

std::string network_to_json(const NetworkSpec& spec) {
    nlohmann::ordered_json doc;
    doc["nodes"] = spec.nodes;
    doc["links"] = nlohmann::ordered_json::array();
    for (const Link& l : spec.links) {
        doc["links"].push_back({{"id", l.id}, {"tail", l.tail}, {"head", l.head},
                                {"a", l.free_flow_time}, {"b", l.congestion_slope}});
    }
    doc["paths"] = nlohmann::ordered_json::array();
    for (const Path& p : spec.paths) {
        doc["paths"].push_back({{"id", p.id}, {"od", p.od}, {"links", p.links}});
    }
    doc["od_pairs"] = nlohmann::ordered_json::array();
    for (const OdPair& od : spec.od_pairs) {
        doc["od_pairs"].push_back({{"id", od.id}, {"origin", od.origin}, {"destination", od.destination},
                                   {"Q", od.demand}, {"T_A", od.target_arrival}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace due
