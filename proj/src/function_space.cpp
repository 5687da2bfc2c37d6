#include "due/function_space.hpp"

#include "due/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace due {

TimeGrid::TimeGrid(double t0, double tf, int n_bins)
    : t0_(t0), tf_(tf), n_bins_(n_bins), dt_(0.0) {
    if (!std::isfinite(t0) || !std::isfinite(tf) || !(tf > t0)) {
        throw Error(ErrorCode::InvalidArgument, "time grid requires finite tf > t0");
    }
    if (n_bins < 1) {
        throw Error(ErrorCode::InvalidArgument, "time grid requires n_bins >= 1");
    }
    dt_ = (tf - t0) / n_bins;
}

double TimeGrid::node(int k) const noexcept {
    if (k >= n_bins_) return tf_;
    return t0_ + k * dt_;
}

int TimeGrid::bin_of(double t) const noexcept {
    const double pos = std::floor((t - t0_) / dt_);
    if (!(pos > 0.0)) return 0;
    if (pos >= n_bins_ - 1) return n_bins_ - 1;
    return static_cast<int>(pos);
}

SampledFunction::SampledFunction(TimeGrid grid, int dim, Interpretation kind)
    : grid_(grid), kind_(kind) {
    if (dim < 0) throw Error(ErrorCode::InvalidArgument, "negative dimension");
    values_ = Matrix::Zero(dim, sample_count(grid_, kind_));
}

SampledFunction::SampledFunction(TimeGrid grid, Interpretation kind, Matrix values)
    : grid_(grid), kind_(kind), values_(std::move(values)) {
    if (values_.cols() != sample_count(grid_, kind_)) {
        throw Error(ErrorCode::GridMismatch,
                    "sample count " + std::to_string(values_.cols()) + " does not match grid (" +
                        std::to_string(sample_count(grid_, kind_)) + " expected)");
    }
    if (!values_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "sampled function has non-finite values");
    }
}

SampledFunction SampledFunction::constant(TimeGrid grid, Interpretation kind, const Vector& value) {
    Matrix values = value.replicate(1, sample_count(grid, kind));
    return SampledFunction(grid, kind, std::move(values));
}

SampledFunction SampledFunction::from_callable(TimeGrid grid, Interpretation kind, int dim,
                                               const std::function<Vector(double)>& fn) {
    const int count = sample_count(grid, kind);
    Matrix values(dim, count);
    for (int k = 0; k < count; ++k) {
        const double t = kind == Interpretation::PiecewiseConstant ? grid.midpoint(k) : grid.node(k);
        const Vector v = fn(t);
        if (v.size() != dim) {
            throw Error(ErrorCode::InvalidArgument, "callable returned wrong dimension");
        }
        values.col(k) = v;
    }
    return SampledFunction(grid, kind, std::move(values));
}

Vector SampledFunction::at(double t) const {
    if (kind_ == Interpretation::PiecewiseConstant) {
        return values_.col(grid_.bin_of(t));
    }
    if (t <= grid_.t0()) return values_.col(0);
    if (t >= grid_.tf()) return values_.col(grid_.n_bins());
    const int k = grid_.bin_of(t);
    const double w = (t - grid_.node(k)) / grid_.dt();
    return (1.0 - w) * values_.col(k) + w * values_.col(k + 1);
}

SampledFunction SampledFunction::with_values(Matrix values) const {
    return SampledFunction(grid_, kind_, std::move(values));
}

void SampledFunction::require_compatible(const SampledFunction& other) const {
    if (!(grid_ == other.grid_) || kind_ != other.kind_ || dim() != other.dim()) {
        throw Error(ErrorCode::GridMismatch, "sampled functions differ in grid, kind or dimension");
    }
}

SampledFunction SampledFunction::operator+(const SampledFunction& other) const {
    require_compatible(other);
    return with_values(values_ + other.values_);
}

SampledFunction SampledFunction::operator-(const SampledFunction& other) const {
    require_compatible(other);
    return with_values(values_ - other.values_);
}

SampledFunction SampledFunction::operator*(double scale) const {
    return with_values(values_ * scale);
}

double inner_product(const SampledFunction& u, const SampledFunction& v) {
    if (!(u.grid() == v.grid()) || u.dim() != v.dim()) {
        throw Error(ErrorCode::GridMismatch, "inner product of functions on different grids or dimensions");
    }
    const TimeGrid& grid = u.grid();
    const double dt = grid.dt();
    const int n = grid.n_bins();
    const Matrix& a = u.values();
    const Matrix& b = v.values();
    double sum = 0.0;
    if (u.kind() == Interpretation::PiecewiseConstant && v.kind() == Interpretation::PiecewiseConstant) {
        for (int k = 0; k < n; ++k) sum += a.col(k).dot(b.col(k));
        return sum * dt;
    }
    if (u.kind() == Interpretation::PiecewiseLinear && v.kind() == Interpretation::PiecewiseLinear) {
        for (int k = 0; k < n; ++k) sum += a.col(k).dot(b.col(k)) + a.col(k + 1).dot(b.col(k + 1));
        return 0.5 * sum * dt;
    }
    // Constant times linear on each bin: c * (left + right) / 2.
    const Matrix& c = u.kind() == Interpretation::PiecewiseConstant ? a : b;
    const Matrix& l = u.kind() == Interpretation::PiecewiseConstant ? b : a;
    for (int k = 0; k < n; ++k) sum += c.col(k).dot(l.col(k) + l.col(k + 1));
    return 0.5 * sum * dt;
}

double l2_norm(const SampledFunction& u) {
    return std::sqrt(inner_product(u, u));
}

double sup_norm(const SampledFunction& x) {
    if (x.size() == 0 || x.dim() == 0) return 0.0;
    return x.values().colwise().norm().maxCoeff();
}

double weighted_norm(const SampledFunction& x, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::InvalidArgument, "weighted norm requires alpha > 0");
    }
    const TimeGrid& grid = x.grid();
    double best = 0.0;
    for (int k = 0; k < x.size(); ++k) {
        const double t = grid.node(k);
        best = std::max(best, x.values().col(k).norm() * std::exp(-alpha * t));
    }
    return best;
}

}  // namespace due
