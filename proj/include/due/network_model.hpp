#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace due {

/// Affine-delay link: traversal time a + b * volume.
struct Link {
    std::string id;
    std::string tail;
    std::string head;
    double free_flow_time = 0.0;    // a_l
    double congestion_slope = 0.0;  // b_l

    bool operator==(const Link&) const = default;
};

struct OdPair {
    std::string id;
    std::string origin;
    std::string destination;
    double demand = 0.0;          // Q_ij
    double target_arrival = 0.0;  // T_A

    bool operator==(const OdPair&) const = default;
};

struct Path {
    std::string id;
    std::string od;
    std::vector<std::string> links;

    bool operator==(const Path&) const = default;
};

struct NetworkSpec {
    std::vector<std::string> nodes;
    std::vector<Link> links;
    std::vector<Path> paths;
    std::vector<OdPair> od_pairs;

    bool operator==(const NetworkSpec&) const = default;

    /// -1 when absent.
    int link_index(const std::string& id) const;
    int od_index(const std::string& id) const;

    /// O-D index of path p. Throws if the reference is dangling.
    int od_of_path(int p) const;
    /// Path indices serving O-D pair `od`, in file order.
    std::vector<int> paths_of_od(int od) const;
    /// Link indices of path p, in traversal order. Throws on dangling ids.
    std::vector<int> link_indices(int p) const;
};

struct Violation {
    std::string entity;  // e.g. "paths[2]" or "od_pairs[0]"
    std::string rule;    // e.g. "path.connectivity"
    std::string message;
};

struct Horizon {
    double t0;
    double tf;
};

/// Empty iff every structural invariant holds. When a horizon is given,
/// target arrival times are also checked against it.
std::vector<Violation> validate(const NetworkSpec& spec, std::optional<Horizon> horizon = std::nullopt);

/// |P| x |W| matrix with entry 1 iff the path serves the O-D pair.
Eigen::MatrixXi path_incidence(const NetworkSpec& spec);

/// Parses the JSON network format. Throws SchemaError naming the offending
/// field (e.g. `od_pairs[0].Q`); unknown keys are rejected.
NetworkSpec parse_network(const std::string& text);
NetworkSpec load_network(const std::filesystem::path& path);

std::string network_to_json(const NetworkSpec& spec);

}  // namespace due
