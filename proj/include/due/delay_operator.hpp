#pragma once

#include "due/function_space.hpp"
#include "due/network_model.hpp"

#include <functional>
#include <vector>

namespace due {

/// Per-path departure rates h_p(t) >= 0, piecewise constant on a shared grid.
class PathFlowProfile {
public:
    /// Throws unless `flows` is piecewise constant and nonnegative.
    explicit PathFlowProfile(SampledFunction flows);

    static PathFlowProfile zeros(const TimeGrid& grid, int n_paths);

    const SampledFunction& flows() const noexcept { return flows_; }
    const TimeGrid& grid() const noexcept { return flows_.grid(); }
    int n_paths() const noexcept { return flows_.dim(); }
    double operator()(int path, int bin) const { return flows_(path, bin); }

private:
    SampledFunction flows_;
};

/// Schedule-delay penalty F(w), w = arrival time - target.
struct ArrivalPenalty {
    enum class Kind { PiecewiseLinear, Quadratic };

    Kind kind = Kind::PiecewiseLinear;
    double early_weight = 0.0;  // per unit time early
    double late_weight = 0.0;   // per unit time late
    double curvature = 0.0;     // F(w) = curvature * w^2

    static ArrivalPenalty none() { return {}; }
    static ArrivalPenalty piecewise_linear(double early, double late) {
        return {Kind::PiecewiseLinear, early, late, 0.0};
    }
    static ArrivalPenalty quadratic(double curvature) { return {Kind::Quadratic, 0.0, 0.0, curvature}; }

    /// Throws InvalidArgument on negative weights.
    void validate() const;
    double operator()(double w) const;
};

enum class DelayModel {
    WholeLink,      // affine link delay, FIFO propagation, nested path recursion
    Instantaneous,  // D_p(t) = sum_l a_l + b_l * (sum of path rates on l at t)
};

const char* to_string(DelayModel model);

/// Path and link delay data for one flow profile.
///
/// Path delays are sampled at bin midpoints (the representative departure
/// time of each bin). Whole-link volumes and exit times live at grid nodes;
/// the instantaneous model's link loads are piecewise constant.
class DelayField {
public:
    DelayModel model;
    TimeGrid grid;
    Matrix path_delay;              // |P| x n_bins
    SampledFunction link_volume;    // |L| rows
    Matrix link_exit_time;          // |L| x (n_bins+1), whole-link only
    Matrix link_entered;            // cumulative entries at nodes, whole-link only
    Matrix link_exited;             // cumulative exits at nodes, whole-link only
    std::vector<std::vector<int>> path_links;
    std::vector<double> free_flow;  // a_l
    std::vector<double> slope;      // b_l
    /// path_delay(p, k) needed link volumes beyond tf (frozen at tf).
    std::vector<std::vector<bool>> extrapolated;

    double departure_time(int bin) const { return grid.midpoint(bin); }

    /// Traversal time of link l for a vehicle entering at t; volumes are
    /// frozen at their tf value beyond the horizon.
    double link_traversal(int link, double t) const;

    /// D_p(t) by nested recursion through the path's links.
    double path_delay_at(int path, double t, bool* extrapolated_out = nullptr) const;

    /// Smallest (tau_l(t_{k+1}) - tau_l(t_k)) / dt over all links (whole-link).
    double min_fifo_slope() const;

    int extrapolated_count() const;
};

/// Pluggable producer of delay fields.
using DelayProducer = std::function<DelayField(const NetworkSpec&, const PathFlowProfile&)>;

DelayProducer delay_producer(DelayModel model);

/// Whole-link model. Requires dt <= min_l a_l so each node depends only on
/// earlier nodes. Throws ModelBreakdownError when an exit-time map stops
/// increasing.
DelayField compute_delays(const NetworkSpec& spec, const PathFlowProfile& h,
                          DelayModel model = DelayModel::WholeLink);

/// D + F(t + D - T_A).
double effective_delay(double path_delay, const ArrivalPenalty& penalty, double target_arrival, double t);

/// Psi_p(t, h) for path p of O-D pair `od`.
double effective_delay(const DelayField& field, const ArrivalPenalty& penalty, const OdPair& od, int path,
                       double t);

/// Psi_p at every bin midpoint: |P| x n_bins.
Matrix effective_delays(const DelayField& field, const ArrivalPenalty& penalty, const NetworkSpec& spec);

}  // namespace due
