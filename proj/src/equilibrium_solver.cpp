#include "due/equilibrium_solver.hpp"

#include "due/error.hpp"
#include "due/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace due {

FeasibleSet::FeasibleSet(TimeGrid grid, std::vector<double> demand, std::vector<std::vector<int>> od_paths,
                         int n_paths)
    : grid_(grid), demand_(std::move(demand)), od_paths_(std::move(od_paths)), n_paths_(n_paths) {
    if (demand_.size() != od_paths_.size()) {
        throw Error(ErrorCode::InvalidArgument, "feasible set needs one path set per demand");
    }
    std::vector<int> owner(static_cast<std::size_t>(n_paths_), -1);
    for (std::size_t od = 0; od < od_paths_.size(); ++od) {
        if (!(demand_[od] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "demand must be >= 0");
        if (od_paths_[od].empty()) throw Error(ErrorCode::InvalidArgument, "O-D pair without paths");
        for (int p : od_paths_[od]) {
            if (p < 0 || p >= n_paths_ || owner[static_cast<std::size_t>(p)] >= 0) {
                throw Error(ErrorCode::InvalidArgument, "each path must belong to exactly one O-D pair");
            }
            owner[static_cast<std::size_t>(p)] = static_cast<int>(od);
        }
    }
}

FeasibleSet FeasibleSet::from_network(const NetworkSpec& spec, const TimeGrid& grid) {
    std::vector<double> demand;
    std::vector<std::vector<int>> od_paths;
    for (std::size_t od = 0; od < spec.od_pairs.size(); ++od) {
        demand.push_back(spec.od_pairs[od].demand);
        od_paths.push_back(spec.paths_of_od(static_cast<int>(od)));
    }
    return FeasibleSet(grid, std::move(demand), std::move(od_paths), static_cast<int>(spec.paths.size()));
}

std::vector<double> FeasibleSet::demand_residuals(const PathFlowProfile& h) const {
    std::vector<double> out;
    for (std::size_t od = 0; od < demand_.size(); ++od) {
        double total = 0.0;
        for (int p : od_paths_[od]) total += h.flows().values().row(p).sum();
        out.push_back(grid_.dt() * total - demand_[od]);
    }
    return out;
}

bool FeasibleSet::contains(const PathFlowProfile& h, double tol) const {
    if (!(h.grid() == grid_) || h.n_paths() != n_paths_) return false;
    const auto residuals = demand_residuals(h);
    return std::all_of(residuals.begin(), residuals.end(), [tol](double r) { return std::abs(r) <= tol; });
}

PathFlowProfile FeasibleSet::uniform() const {
    Matrix values = Matrix::Zero(n_paths_, grid_.n_bins());
    for (std::size_t od = 0; od < demand_.size(); ++od) {
        const double rate = demand_[od] / (static_cast<double>(od_paths_[od].size()) * grid_.length());
        for (int p : od_paths_[od]) values.row(p).setConstant(rate);
    }
    return PathFlowProfile(SampledFunction(grid_, Interpretation::PiecewiseConstant, std::move(values)));
}

double FeasibleSet::default_support_threshold(int od) const {
    return 1e-6 * demand(od) / grid_.length();
}

PathFlowProfile project(const SampledFunction& h, const FeasibleSet& set) {
    if (!(h.grid() == set.grid()) || h.dim() != set.n_paths() || h.kind() != Interpretation::PiecewiseConstant) {
        throw Error(ErrorCode::GridMismatch, "profile does not match the feasible set");
    }
    const int n_bins = set.grid().n_bins();
    Matrix out = Matrix::Zero(h.dim(), n_bins);
    std::vector<double> y;
    std::vector<std::size_t> order;
    for (int od = 0; od < set.n_od(); ++od) {
        const std::vector<int>& paths = set.paths_of(od);
        // Entries in (path, bin) order; stable sort keeps that order on ties.
        y.clear();
        for (int p : paths) {
            for (int k = 0; k < n_bins; ++k) y.push_back(h(p, k));
        }
        order.resize(y.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&y](std::size_t a, std::size_t b) { return y[a] > y[b]; });

        const double target = set.demand(od) / set.grid().dt();
        if (target <= 0.0) continue;
        double cumulative = 0.0;
        double threshold = 0.0;
        for (std::size_t r = 0; r < order.size(); ++r) {
            cumulative += y[order[r]];
            const double candidate = (cumulative - target) / static_cast<double>(r + 1);
            if (y[order[r]] - candidate > 0.0) threshold = candidate;
        }
        std::size_t i = 0;
        for (int p : paths) {
            for (int k = 0; k < n_bins; ++k) out(p, k) = std::max(y[i++] - threshold, 0.0);
        }
    }
    return PathFlowProfile(SampledFunction(set.grid(), Interpretation::PiecewiseConstant, std::move(out)));
}

PathFlowProfile project(const PathFlowProfile& h, const FeasibleSet& set) { return project(h.flows(), set); }

std::vector<double> min_costs(const Matrix& psi, const FeasibleSet& set) {
    std::vector<double> out;
    for (int od = 0; od < set.n_od(); ++od) {
        double best = std::numeric_limits<double>::infinity();
        for (int p : set.paths_of(od)) best = std::min(best, psi.row(p).minCoeff());
        out.push_back(best);
    }
    return out;
}

double vi_gap(const PathFlowProfile& h, const Matrix& psi, const FeasibleSet& set) {
    if (psi.rows() != h.n_paths() || psi.cols() != h.grid().n_bins()) {
        throw Error(ErrorCode::GridMismatch, "effective delays do not match the profile");
    }
    const std::vector<double> v = min_costs(psi, set);
    double gap = 0.0;
    for (int od = 0; od < set.n_od(); ++od) {
        for (int p : set.paths_of(od)) {
            gap += ((psi.row(p).array() - v[static_cast<std::size_t>(od)]) * h.flows().values().row(p).array()).sum();
        }
    }
    return gap * h.grid().dt();
}

void SolverConfig::validate() const {
    if (!(step_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be > 0");
    if (max_iterations < 0) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 0");
    if (!(increase_slack >= 0.0)) throw Error(ErrorCode::InvalidArgument, "increase slack must be >= 0");
    if (!(gap_tolerance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gap tolerance must be >= 0");
    if (support_threshold && !(*support_threshold >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "support threshold must be >= 0");
    }
    if (!(certify_rel_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "certificate tolerance must be >= 0");
}

const char* to_string(Termination reason) {
    return reason == Termination::Converged ? "converged" : "not-converged";
}

EquilibriumReport solve_due(const NetworkSpec& spec, const ArrivalPenalty& penalty, const FeasibleSet& set,
                            const SolverConfig& config, const DelayProducer& delays,
                            const IterateObserver& observer) {
    config.validate();
    penalty.validate();
    if (set.n_paths() != static_cast<int>(spec.paths.size())) {
        throw Error(ErrorCode::InvalidArgument, "feasible set does not match the network");
    }

    PathFlowProfile h = set.uniform();
    if (observer) observer(0, h);

    EquilibriumReport best{h, {}, {}, {}, {}};
    double best_gap = std::numeric_limits<double>::infinity();
    std::vector<GapRecord> trace;
    double step = config.step_size;
    double previous_gap = std::numeric_limits<double>::infinity();
    Termination reason = Termination::IterationCap;

    for (int it = 0;; ++it) {
        const DelayField field = delays(spec, h);
        const Matrix psi = effective_delays(field, penalty, spec);
        if (!psi.allFinite()) {
            throw Error(ErrorCode::ModelBreakdown, "effective delays are not finite at iteration " + std::to_string(it));
        }
        const std::vector<double> v = min_costs(psi, set);
        const double gap = vi_gap(h, psi, set);
        double scale = 0.0;
        for (int od = 0; od < set.n_od(); ++od) scale += set.demand(od) * std::abs(v[static_cast<std::size_t>(od)]);
        trace.push_back({it, gap, step});

        const bool done = gap <= config.gap_tolerance * scale;
        if (gap < best_gap || done) {
            best_gap = gap;
            best.flows = h;
            best.path_delay = field.path_delay;
            best.psi = psi;
            best.od_min_cost = v;
            best.gap = gap;
            best.gap_scale = scale;
            best.extrapolated_delays = field.extrapolated_count();
        }
        if (done) {
            reason = Termination::Converged;
            break;
        }
        if (it >= config.max_iterations) break;

        // Increases at roundoff level do not count.
        if (config.step_rule == StepRule::HalvingOnGapIncrease &&
            gap > previous_gap * (1.0 + config.increase_slack)) {
            step *= 0.5;
        }
        previous_gap = gap;
        h = project(h.flows().with_values(h.flows().values() - step * psi), set);
        if (observer) observer(it + 1, h);
    }

    best.trace = std::move(trace);
    best.iterations = static_cast<int>(best.trace.size()) - 1;
    best.reason = reason;
    if (reason != Termination::Converged) {
        std::ostringstream msg;
        msg << "equilibrium solver stopped at the iteration cap; best gap " << best.gap;
        log(LogLevel::Info, msg.str());
    }
    return best;
}

std::vector<CertificateViolation> certify(const EquilibriumReport& report, const FeasibleSet& set,
                                          std::optional<double> support_threshold, double rel_tol) {
    std::vector<CertificateViolation> out;
    for (int od = 0; od < set.n_od(); ++od) {
        const double v = report.od_min_cost.at(static_cast<std::size_t>(od));
        const double threshold = support_threshold.value_or(set.default_support_threshold(od));
        for (int p : set.paths_of(od)) {
            for (int k = 0; k < set.grid().n_bins(); ++k) {
                const double flow = report.flows(p, k);
                const double psi = report.psi(p, k);
                if (flow > threshold && psi > v + rel_tol * std::abs(v)) {
                    const double excess = psi - v;
                    out.push_back({p, k, flow, psi, v, excess,
                                   v != 0.0 ? excess / std::abs(v) : std::numeric_limits<double>::infinity()});
                }
            }
        }
    }
    return out;
}

OdeSystem cumulative_state_system(const NetworkSpec& spec, const TimeGrid& grid) {
    const Eigen::MatrixXi incidence = path_incidence(spec);
    const Matrix aggregate = incidence.transpose().cast<double>();  // |W| x |P|
    const auto n_od = static_cast<int>(aggregate.rows());
    const auto n_paths = static_cast<int>(aggregate.cols());

    Vector upper(n_paths);
    for (int p = 0; p < n_paths; ++p) {
        const int od = spec.od_of_path(p);
        upper[p] = spec.od_pairs[static_cast<std::size_t>(od)].demand / grid.dt();
    }

    OdeSystem sys;
    sys.state_dim = n_od;
    sys.control_dim = n_paths;
    sys.rhs = [aggregate](const Vector&, const Vector& h, double) -> Vector { return aggregate * h; };
    sys.state_jacobian = [n_od](const Vector&, const Vector&, double) -> Matrix { return Matrix::Zero(n_od, n_od); };
    sys.control_jacobian = [aggregate](const Vector&, const Vector&, double) -> Matrix { return aggregate; };
    sys.bound_C = std::max((aggregate * upper).norm(), std::numeric_limits<double>::min());
    sys.lipschitz_L = 0.0;
    sys.control_box = {Vector::Zero(n_paths), upper};
    return sys;
}

SampledFunction cumulative_state(const PathFlowProfile& h, const NetworkSpec& spec) {
    const OdeSystem sys = cumulative_state_system(spec, h.grid());
    return picard_solve(sys, Vector::Zero(sys.state_dim), h.flows(), h.grid()).trajectory;
}

TerminalCondition demand_terminal_condition(const NetworkSpec& spec, double tolerance) {
    Vector demand(static_cast<Eigen::Index>(spec.od_pairs.size()));
    for (std::size_t od = 0; od < spec.od_pairs.size(); ++od) demand[static_cast<Eigen::Index>(od)] = spec.od_pairs[od].demand;
    return TerminalCondition::affine(std::move(demand), tolerance);
}

SensitivityResult cumulative_state_sensitivity(const NetworkSpec& spec, const SampledFunction& dh) {
    if (dh.kind() != Interpretation::PiecewiseConstant || dh.dim() != static_cast<int>(spec.paths.size())) {
        throw Error(ErrorCode::InvalidArgument, "direction must be a piecewise-constant path profile");
    }
    const TimeGrid& grid = dh.grid();
    const auto n_od = static_cast<Eigen::Index>(spec.od_pairs.size());
    Matrix out = Matrix::Zero(n_od, grid.n_bins() + 1);
    for (Eigen::Index od = 0; od < n_od; ++od) {
        const std::vector<int> paths = spec.paths_of_od(static_cast<int>(od));
        double integral = 0.0;
        for (int k = 0; k < grid.n_bins(); ++k) {
            double rate = 0.0;
            for (int p : paths) rate += dh(p, k);
            integral += grid.dt() * rate;
            out(od, k + 1) = integral;
        }
    }
    return {SampledFunction(grid, Interpretation::PiecewiseLinear, std::move(out)), SensitivityMethod::ClosedForm};
}

}  // namespace due
