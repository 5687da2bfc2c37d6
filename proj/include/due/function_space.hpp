#pragma once

#include <Eigen/Dense>

#include <functional>

namespace due {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform partition of [t0, tf] into `n_bins` bins of width dt.
class TimeGrid {
public:
    TimeGrid(double t0, double tf, int n_bins);

    double t0() const noexcept { return t0_; }
    double tf() const noexcept { return tf_; }
    int n_bins() const noexcept { return n_bins_; }
    double dt() const noexcept { return dt_; }
    double length() const noexcept { return tf_ - t0_; }

    /// Bin edge k in [0, n_bins]; node(n_bins) is exactly tf.
    double node(int k) const noexcept;
    double midpoint(int k) const noexcept { return t0_ + (k + 0.5) * dt_; }

    /// Bin containing t, clamped to [0, n_bins-1].
    int bin_of(double t) const noexcept;

    bool operator==(const TimeGrid& other) const noexcept {
        return t0_ == other.t0_ && tf_ == other.tf_ && n_bins_ == other.n_bins_;
    }

private:
    double t0_;
    double tf_;
    int n_bins_;
    double dt_;
};

/// Controls are piecewise constant (one sample per bin), trajectories are
/// piecewise linear (one sample per node).
enum class Interpretation { PiecewiseConstant, PiecewiseLinear };

/// A vector-valued function of time sampled on a TimeGrid. Values are stored
/// column-per-sample: `values()(i, k)` is component i at sample k.
class SampledFunction {
public:
    /// Zero function.
    SampledFunction(TimeGrid grid, int dim, Interpretation kind);

    /// Throws if the column count does not match the grid or a value is not finite.
    SampledFunction(TimeGrid grid, Interpretation kind, Matrix values);

    static SampledFunction constant(TimeGrid grid, Interpretation kind, const Vector& value);

    /// Samples `fn` at bin midpoints (piecewise constant) or at nodes
    /// (piecewise linear). Midpoint sampling makes a piecewise-constant
    /// control integrate affine functions exactly.
    static SampledFunction from_callable(TimeGrid grid, Interpretation kind, int dim,
                                         const std::function<Vector(double)>& fn);

    static int sample_count(const TimeGrid& grid, Interpretation kind) noexcept {
        return kind == Interpretation::PiecewiseConstant ? grid.n_bins() : grid.n_bins() + 1;
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    Interpretation kind() const noexcept { return kind_; }
    int dim() const noexcept { return static_cast<int>(values_.rows()); }
    int size() const noexcept { return static_cast<int>(values_.cols()); }

    const Matrix& values() const noexcept { return values_; }
    double operator()(int component, int sample) const { return values_(component, sample); }
    Vector sample(int k) const { return values_.col(k); }

    /// Point evaluation using the function's interpretation; t is clamped to the grid.
    Vector at(double t) const;

    /// Returns a function with the same grid/kind and the given samples.
    SampledFunction with_values(Matrix values) const;

    SampledFunction operator+(const SampledFunction& other) const;
    SampledFunction operator-(const SampledFunction& other) const;
    SampledFunction operator*(double scale) const;

private:
    void require_compatible(const SampledFunction& other) const;

    TimeGrid grid_;
    Interpretation kind_;
    Matrix values_;
};

inline SampledFunction operator*(double scale, const SampledFunction& f) { return f * scale; }

/// Discretized L2 inner product: exact for the functions' piecewise
/// representations (left-Riemann on constants, trapezoid on linears, exact
/// mixed product otherwise).
double inner_product(const SampledFunction& u, const SampledFunction& v);

double l2_norm(const SampledFunction& u);

/// Maximum Euclidean norm over samples.
double sup_norm(const SampledFunction& x);

/// max_t |x(t)| e^{-alpha t} over grid samples, with absolute time t.
/// Piecewise-constant samples are weighted at their bin's left edge, which
/// is where the weight attains its supremum on the bin.
double weighted_norm(const SampledFunction& x, double alpha);

}  // namespace due
