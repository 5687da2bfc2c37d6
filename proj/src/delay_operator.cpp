#include "due/delay_operator.hpp"

#include "due/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace due {

PathFlowProfile::PathFlowProfile(SampledFunction flows) : flows_(std::move(flows)) {
    if (flows_.kind() != Interpretation::PiecewiseConstant) {
        throw Error(ErrorCode::InvalidArgument, "path flows must be piecewise constant");
    }
    if (flows_.size() > 0 && flows_.dim() > 0 && flows_.values().minCoeff() < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "path flows must be nonnegative");
    }
}

PathFlowProfile PathFlowProfile::zeros(const TimeGrid& grid, int n_paths) {
    return PathFlowProfile(SampledFunction(grid, n_paths, Interpretation::PiecewiseConstant));
}

void ArrivalPenalty::validate() const {
    if (!(early_weight >= 0.0) || !(late_weight >= 0.0) || !(curvature >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "arrival penalty weights must be >= 0");
    }
}

double ArrivalPenalty::operator()(double w) const {
    if (kind == Kind::Quadratic) return curvature * w * w;
    return w < 0.0 ? -early_weight * w : late_weight * w;
}

const char* to_string(DelayModel model) {
    return model == DelayModel::WholeLink ? "whole_link" : "instantaneous";
}

double DelayField::link_traversal(int link, double t) const {
    const double volume = link_volume.at(t)(link);
    return free_flow[static_cast<std::size_t>(link)] + slope[static_cast<std::size_t>(link)] * volume;
}

double DelayField::path_delay_at(int path, double t, bool* extrapolated_out) const {
    double delay = 0.0;
    bool beyond = false;
    for (int l : path_links.at(static_cast<std::size_t>(path))) {
        const double entry = t + delay;
        if (entry > grid.tf()) beyond = true;
        // Instantaneous loads are all evaluated at the departure time.
        delay += link_traversal(l, model == DelayModel::WholeLink ? entry : t);
    }
    if (extrapolated_out != nullptr) *extrapolated_out = beyond && model == DelayModel::WholeLink;
    return delay;
}

double DelayField::min_fifo_slope() const {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < link_exit_time.rows(); ++l) {
        for (Eigen::Index k = 0; k + 1 < link_exit_time.cols(); ++k) {
            best = std::min(best, (link_exit_time(l, k + 1) - link_exit_time(l, k)) / grid.dt());
        }
    }
    return best;
}

int DelayField::extrapolated_count() const {
    int count = 0;
    for (const auto& row : extrapolated) count += static_cast<int>(std::count(row.begin(), row.end(), true));
    return count;
}

DelayProducer delay_producer(DelayModel model) {
    return [model](const NetworkSpec& spec, const PathFlowProfile& h) { return compute_delays(spec, h, model); };
}

namespace {

// Cumulative count at time s from node samples, taken as 0 before t0.
double interpolate_cumulative(const std::vector<double>& count, const TimeGrid& grid, double s) {
    if (s <= grid.t0()) return count.front();
    const double pos = (s - grid.t0()) / grid.dt();
    const auto k = static_cast<std::size_t>(std::floor(pos));
    if (k + 1 >= count.size()) return count.back();
    const double w = pos - static_cast<double>(k);
    return (1.0 - w) * count[k] + w * count[k + 1];
}

// Entry time whose exit time is t, using exit times known at nodes [0, last].
// Returns -inf when nothing entering at t0 or later has left by t.
double invert_exit_time(const Matrix& exit_time, int link, int last, const TimeGrid& grid, double t) {
    if (exit_time(link, 0) > t) return -std::numeric_limits<double>::infinity();
    int lo = 0;
    int hi = last;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (exit_time(link, mid) <= t) lo = mid; else hi = mid - 1;
    }
    if (lo == last) return grid.node(lo);
    const double w = (t - exit_time(link, lo)) / (exit_time(link, lo + 1) - exit_time(link, lo));
    return grid.node(lo) + w * grid.dt();
}

DelayField make_field(DelayModel model, const NetworkSpec& spec, const PathFlowProfile& h,
                      SampledFunction volume) {
    const TimeGrid& grid = h.grid();
    const auto n_paths = static_cast<int>(spec.paths.size());
    DelayField field{model, grid, Matrix::Zero(n_paths, grid.n_bins()), std::move(volume), Matrix(), Matrix(),
                     Matrix(), {}, {}, {}, {}};
    for (int p = 0; p < n_paths; ++p) field.path_links.push_back(spec.link_indices(p));
    for (const Link& l : spec.links) {
        field.free_flow.push_back(l.free_flow_time);
        field.slope.push_back(l.congestion_slope);
    }
    return field;
}

void fill_path_delays(DelayField& field) {
    const int n_paths = static_cast<int>(field.path_links.size());
    field.extrapolated.assign(static_cast<std::size_t>(n_paths),
                              std::vector<bool>(static_cast<std::size_t>(field.grid.n_bins()), false));
    for (int p = 0; p < n_paths; ++p) {
        for (int k = 0; k < field.grid.n_bins(); ++k) {
            bool beyond = false;
            field.path_delay(p, k) = field.path_delay_at(p, field.departure_time(k), &beyond);
            field.extrapolated[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] = beyond;
        }
    }
}

DelayField instantaneous_delays(const NetworkSpec& spec, const PathFlowProfile& h) {
    const TimeGrid& grid = h.grid();
    Matrix load = Matrix::Zero(static_cast<Eigen::Index>(spec.links.size()), grid.n_bins());
    for (int p = 0; p < h.n_paths(); ++p) {
        for (int l : spec.link_indices(p)) load.row(l) += h.flows().values().row(p);
    }
    DelayField field = make_field(DelayModel::Instantaneous, spec, h,
                                  SampledFunction(grid, Interpretation::PiecewiseConstant, std::move(load)));
    fill_path_delays(field);
    return field;
}

DelayField whole_link_delays(const NetworkSpec& spec, const PathFlowProfile& h) {
    const TimeGrid& grid = h.grid();
    const int n_nodes = grid.n_bins() + 1;
    const auto n_links = static_cast<int>(spec.links.size());
    const auto n_paths = static_cast<int>(spec.paths.size());
    for (const Link& l : spec.links) {
        if (grid.dt() > l.free_flow_time) {
            throw Error(ErrorCode::InvalidArgument,
                        "bin width exceeds free-flow time of link '" + l.id + "'; refine the grid");
        }
    }

    // entries[p][i][j]: vehicles of path p that entered its i-th link by node j.
    std::vector<std::vector<std::vector<double>>> entries(static_cast<std::size_t>(n_paths));
    std::vector<std::vector<int>> links_of(static_cast<std::size_t>(n_paths));
    for (int p = 0; p < n_paths; ++p) {
        links_of[p] = spec.link_indices(p);
        entries[p].assign(links_of[p].size(), std::vector<double>(static_cast<std::size_t>(n_nodes), 0.0));
        double cumulative = 0.0;
        for (int k = 0; k < grid.n_bins(); ++k) {
            cumulative += grid.dt() * h(p, k);
            entries[p][0][static_cast<std::size_t>(k) + 1] = cumulative;
        }
    }

    Matrix volume = Matrix::Zero(n_links, n_nodes);
    Matrix exit_time(n_links, n_nodes);
    Matrix entered = Matrix::Zero(n_links, n_nodes);
    Matrix exited = Matrix::Zero(n_links, n_nodes);
    for (int l = 0; l < n_links; ++l) exit_time(l, 0) = grid.t0() + spec.links[l].free_flow_time;

    std::vector<double> exit_entry_time(static_cast<std::size_t>(n_links));
    for (int j = 1; j < n_nodes; ++j) {
        const double t = grid.node(j);
        // Exit times at nodes < j already cover t because dt <= a_l.
        for (int l = 0; l < n_links; ++l) exit_entry_time[l] = invert_exit_time(exit_time, l, j - 1, grid, t);

        for (int p = 0; p < n_paths; ++p) {
            for (std::size_t i = 0; i < links_of[p].size(); ++i) {
                const int l = links_of[p][i];
                const double sigma = exit_entry_time[l];
                const double out = std::isinf(sigma) ? 0.0 : interpolate_cumulative(entries[p][i], grid, sigma);
                if (i + 1 < links_of[p].size()) entries[p][i + 1][static_cast<std::size_t>(j)] = out;
                entered(l, j) += entries[p][i][static_cast<std::size_t>(j)];
                exited(l, j) += out;
            }
        }
        for (int l = 0; l < n_links; ++l) {
            volume(l, j) = std::max(0.0, entered(l, j) - exited(l, j));
            exit_time(l, j) = t + spec.links[l].free_flow_time + spec.links[l].congestion_slope * volume(l, j);
            if (!(exit_time(l, j) > exit_time(l, j - 1))) throw ModelBreakdownError(spec.links[l].id, t);
        }
    }

    DelayField field = make_field(DelayModel::WholeLink, spec, h,
                                  SampledFunction(grid, Interpretation::PiecewiseLinear, std::move(volume)));
    field.link_exit_time = std::move(exit_time);
    field.link_entered = std::move(entered);
    field.link_exited = std::move(exited);
    fill_path_delays(field);
    return field;
}

}  // namespace

DelayField compute_delays(const NetworkSpec& spec, const PathFlowProfile& h, DelayModel model) {
    if (h.n_paths() != static_cast<int>(spec.paths.size())) {
        throw Error(ErrorCode::InvalidArgument, "flow profile does not match the number of paths");
    }
    return model == DelayModel::WholeLink ? whole_link_delays(spec, h) : instantaneous_delays(spec, h);
}

double effective_delay(double path_delay, const ArrivalPenalty& penalty, double target_arrival, double t) {
    return path_delay + penalty(t + path_delay - target_arrival);
}

double effective_delay(const DelayField& field, const ArrivalPenalty& penalty, const OdPair& od, int path,
                       double t) {
    return effective_delay(field.path_delay_at(path, t), penalty, od.target_arrival, t);
}

Matrix effective_delays(const DelayField& field, const ArrivalPenalty& penalty, const NetworkSpec& spec) {
    Matrix psi(field.path_delay.rows(), field.path_delay.cols());
    for (Eigen::Index p = 0; p < psi.rows(); ++p) {
        const double target = spec.od_pairs[static_cast<std::size_t>(spec.od_of_path(static_cast<int>(p)))].target_arrival;
        for (Eigen::Index k = 0; k < psi.cols(); ++k) {
            psi(p, k) = effective_delay(field.path_delay(p, k), penalty, target, field.departure_time(static_cast<int>(k)));
        }
    }
    return psi;
}

}  // namespace due
