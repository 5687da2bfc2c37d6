#pragma once

#include "due/delay_operator.hpp"
#include "due/function_space.hpp"
#include "due/network_model.hpp"
#include "due/sensitivity.hpp"
#include "due/state_operator.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace due {

/// Discretized feasible departure-rate set: h >= 0 and
/// dt * sum_{p in P_ij} sum_k h_p[k] = Q_ij for every O-D pair.
class FeasibleSet {
public:
    FeasibleSet(TimeGrid grid, std::vector<double> demand, std::vector<std::vector<int>> od_paths, int n_paths);

    static FeasibleSet from_network(const NetworkSpec& spec, const TimeGrid& grid);

    const TimeGrid& grid() const noexcept { return grid_; }
    int n_paths() const noexcept { return n_paths_; }
    int n_od() const noexcept { return static_cast<int>(demand_.size()); }
    double demand(int od) const { return demand_.at(static_cast<std::size_t>(od)); }
    const std::vector<int>& paths_of(int od) const { return od_paths_.at(static_cast<std::size_t>(od)); }

    /// dt * sum h - Q_ij per O-D pair.
    std::vector<double> demand_residuals(const PathFlowProfile& h) const;
    bool contains(const PathFlowProfile& h, double tol = 1e-9) const;

    /// Demand spread evenly over the paths and bins of each O-D pair.
    PathFlowProfile uniform() const;

    /// Default support threshold 1e-6 * Q_ij / (tf - t0).
    double default_support_threshold(int od) const;

private:
    TimeGrid grid_;
    std::vector<double> demand_;
    std::vector<std::vector<int>> od_paths_;
    int n_paths_;
};

/// Euclidean (L2) projection onto the feasible set: per O-D pair a projection
/// onto the scaled simplex {g >= 0, dt * sum g = Q}, by sorting and thresholding.
PathFlowProfile project(const SampledFunction& h, const FeasibleSet& set);
PathFlowProfile project(const PathFlowProfile& h, const FeasibleSet& set);

/// v_ij = minimum of Psi over the O-D pair's paths and bins.
std::vector<double> min_costs(const Matrix& psi, const FeasibleSet& set);

/// sum_ij sum_{p in P_ij} int (Psi_p - v_ij) h_p dt; zero iff every used bin
/// has minimal effective delay.
double vi_gap(const PathFlowProfile& h, const Matrix& psi, const FeasibleSet& set);

enum class StepRule { Fixed, HalvingOnGapIncrease };

struct SolverConfig {
    double step_size = 1.0;
    StepRule step_rule = StepRule::HalvingOnGapIncrease;
    /// Relative gap increase below which halving does not trigger (roundoff guard).
    double increase_slack = 1e-9;
    int max_iterations = 1000;
    /// Converged when gap <= gap_tolerance * sum_ij Q_ij |v_ij|.
    double gap_tolerance = 1e-4;
    /// Used-path threshold for certification; per-O-D default when empty.
    std::optional<double> support_threshold;
    double certify_rel_tol = 1e-2;

    void validate() const;
};

enum class Termination { Converged, IterationCap };

const char* to_string(Termination reason);

struct GapRecord {
    int iteration;
    double gap;
    double step;
};

struct EquilibriumReport {
    PathFlowProfile flows;
    Matrix path_delay;             // |P| x n_bins
    Matrix psi;                    // |P| x n_bins
    std::vector<double> od_min_cost;
    std::vector<GapRecord> trace;  // one entry per evaluated iterate
    int iterations = 0;            // projection steps taken
    Termination reason = Termination::IterationCap;
    double gap = 0.0;              // gap of `flows`
    double gap_scale = 0.0;        // sum_ij Q_ij |v_ij|
    int extrapolated_delays = 0;

    bool converged() const noexcept { return reason == Termination::Converged; }
};

using IterateObserver = std::function<void(int iteration, const PathFlowProfile& h)>;

/// Projected fixed-point iteration h <- P(h - alpha Psi(h)) from the uniform
/// profile. On hitting the cap, the best iterate seen is returned with
/// reason IterationCap. Throws Error(ModelBreakdown) on non-finite Psi.
EquilibriumReport solve_due(const NetworkSpec& spec, const ArrivalPenalty& penalty, const FeasibleSet& set,
                            const SolverConfig& config,
                            const DelayProducer& delays = delay_producer(DelayModel::WholeLink),
                            const IterateObserver& observer = {});

struct CertificateViolation {
    int path;
    int bin;
    double flow;
    double psi;
    double min_cost;
    double excess;           // psi - v
    double relative_excess;  // (psi - v) / |v|
};

/// Bins with flow above the support threshold whose Psi exceeds v (1 + rel_tol).
std::vector<CertificateViolation> certify(const EquilibriumReport& report, const FeasibleSet& set,
                                          std::optional<double> support_threshold, double rel_tol);

/// dY_ij/dt = sum_{p in P_ij} h_p, Y(t0) = 0 as an ODE system with L = 0.
OdeSystem cumulative_state_system(const NetworkSpec& spec, const TimeGrid& grid);

/// Y(h, .) through picard_solve.
SampledFunction cumulative_state(const PathFlowProfile& h, const NetworkSpec& spec);

/// Gamma_ij(Y, t) = Y_ij - Q_ij.
TerminalCondition demand_terminal_condition(const NetworkSpec& spec, double tolerance = 1e-6);

/// delta Y_ij(t) = sum_{p in P_ij} int_{t0}^t dh_p(s) ds.
SensitivityResult cumulative_state_sensitivity(const NetworkSpec& spec, const SampledFunction& dh);

}  // namespace due
