#pragma once

#include "due/network_model.hpp"

#include "oracles/brute_force_equilibrium.hpp"

namespace due::fixtures {

/// Two parallel links between one origin and one destination, one path each.
inline NetworkSpec parallel_links(double a1, double b1, double a2, double b2, double demand, double target) {
    NetworkSpec spec;
    spec.nodes = {"o", "d"};
    spec.links = {{"l1", "o", "d", a1, b1}, {"l2", "o", "d", a2, b2}};
    spec.paths = {{"p1", "w", {"l1"}}, {"p2", "w", {"l2"}}};
    spec.od_pairs = {{"w", "o", "d", demand, target}};
    return spec;
}

/// Q = 10 on [0, 3], T_A = 2, quadratic penalty with curvature 0.5.
inline oracle::ParallelInstance desk_instance() {
    return {{1.0, 1.2}, {0.1, 0.2}, 0.5, 2.0, 10.0, 0.0, 3.0, 60};
}

inline NetworkSpec desk_network() {
    const auto inst = desk_instance();
    return parallel_links(inst.a[0], inst.b[0], inst.a[1], inst.b[1], inst.demand, inst.target_arrival);
}

/// Three paths over two O-D pairs: o->d via m or direct, and o->m.
inline NetworkSpec two_od_network() {
    NetworkSpec spec;
    spec.nodes = {"o", "m", "d"};
    spec.links = {{"a", "o", "m", 1.0, 0.1}, {"b", "m", "d", 1.0, 0.1}, {"c", "o", "d", 2.5, 0.05}};
    spec.paths = {{"p1", "od", {"a", "b"}}, {"p2", "od", {"c"}}, {"p3", "om", {"a"}}};
    spec.od_pairs = {{"od", "o", "d", 10.0, 3.0}, {"om", "o", "m", 4.0, 2.0}};
    return spec;
}

}  // namespace due::fixtures
