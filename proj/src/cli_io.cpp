#include "due/cli_io.hpp"

#include "due/builtin_systems.hpp"
#include "due/error.hpp"
#include "due/json_schema.hpp"
#include "due/network_model.hpp"
#include "due/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace due::cli {
namespace {

std::string num(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

double positive(const schema::Object& obj, const char* key, double fallback) {
    if (!obj.has(key)) return fallback;
    const schema::Value v = obj.at(key);
    const double x = v.as_number();
    if (!(x > 0.0)) throw SchemaError(v.path(), "must be > 0");
    return x;
}

double nonnegative(const schema::Object& obj, const char* key, double fallback) {
    if (!obj.has(key)) return fallback;
    const schema::Value v = obj.at(key);
    const double x = v.as_number();
    if (!(x >= 0.0)) throw SchemaError(v.path(), "must be >= 0");
    return x;
}

int positive_int(const schema::Object& obj, const char* key, int fallback, int minimum = 1) {
    if (!obj.has(key)) return fallback;
    const schema::Value v = obj.at(key);
    const long long x = v.as_integer();
    if (x < minimum || x > 100'000'000) {
        throw SchemaError(v.path(), "must be an integer in [" + std::to_string(minimum) + ", 1e8]");
    }
    return static_cast<int>(x);
}

ArrivalPenalty parse_penalty(const schema::Object& obj) {
    obj.allow_only({"kind", "early", "late", "curvature"});
    const schema::Value kind = obj.at("kind");
    const std::string name = kind.as_string();
    if (name == "none") return ArrivalPenalty::none();
    if (name == "piecewise_linear") {
        return ArrivalPenalty::piecewise_linear(nonnegative(obj, "early", 0.0), nonnegative(obj, "late", 0.0));
    }
    if (name == "quadratic") return ArrivalPenalty::quadratic(nonnegative(obj, "curvature", 0.0));
    throw SchemaError(kind.path(), "expected none, piecewise_linear or quadratic");
}

SolverConfig parse_solver(const schema::Object& obj) {
    obj.allow_only({"step_size", "step_rule", "increase_slack", "max_iterations", "gap_tolerance",
                    "support_threshold", "certify_rel_tol"});
    SolverConfig cfg;
    cfg.step_size = positive(obj, "step_size", cfg.step_size);
    if (obj.has("step_rule")) {
        const schema::Value v = obj.at("step_rule");
        const std::string rule = v.as_string();
        if (rule == "fixed") {
            cfg.step_rule = StepRule::Fixed;
        } else if (rule == "halving") {
            cfg.step_rule = StepRule::HalvingOnGapIncrease;
        } else {
            throw SchemaError(v.path(), "expected fixed or halving");
        }
    }
    cfg.increase_slack = nonnegative(obj, "increase_slack", cfg.increase_slack);
    cfg.max_iterations = positive_int(obj, "max_iterations", cfg.max_iterations, 0);
    cfg.gap_tolerance = nonnegative(obj, "gap_tolerance", cfg.gap_tolerance);
    if (obj.has("support_threshold")) cfg.support_threshold = nonnegative(obj, "support_threshold", 0.0);
    cfg.certify_rel_tol = nonnegative(obj, "certify_rel_tol", cfg.certify_rel_tol);
    return cfg;
}

DiagnosticsConfig parse_diagnostics(const schema::Object& obj) {
    obj.allow_only({"system", "x0", "control_value", "control_amplitude", "direction", "epsilons", "fd_epsilon"});
    DiagnosticsConfig cfg;
    if (obj.has("system")) {
        const schema::Value v = obj.at("system");
        cfg.system = v.as_string();
        const auto names = builtin_system_names();
        if (cfg.system != "due" && std::find(names.begin(), names.end(), cfg.system) == names.end()) {
            throw SchemaError(v.path(), "unknown system '" + cfg.system + "'");
        }
    }
    if (obj.has("x0")) cfg.x0 = obj.number("x0");
    if (obj.has("control_value")) cfg.control_value = obj.number("control_value");
    if (obj.has("control_amplitude")) cfg.control_amplitude = obj.number("control_amplitude");
    if (obj.has("direction")) {
        const schema::Value v = obj.at("direction");
        cfg.direction = v.as_string();
        if (cfg.direction != "zero" && cfg.direction != "one" && cfg.direction != "random") {
            throw SchemaError(v.path(), "expected zero, one or random");
        }
    }
    if (obj.has("epsilons")) {
        cfg.epsilons.clear();
        for (const auto& v : obj.array("epsilons")) {
            const double e = v.as_number();
            if (!(e > 0.0)) throw SchemaError(v.path(), "must be > 0");
            if (!cfg.epsilons.empty() && !(e < cfg.epsilons.back())) throw SchemaError(v.path(), "must be decreasing");
            cfg.epsilons.push_back(e);
        }
    }
    cfg.fd_epsilon = positive(obj, "fd_epsilon", cfg.fd_epsilon);
    return cfg;
}

void apply(ScenarioConfig& cfg, const Overrides& overrides, bool diagnose) {
    if (overrides.out) cfg.output_dir = *overrides.out;
    if (overrides.bins) {
        if (*overrides.bins < 1) throw SchemaError("--bins", "must be >= 1");
        cfg.n_bins = *overrides.bins;
    }
    if (overrides.tol) {
        if (!(*overrides.tol > 0.0)) throw SchemaError("--tol", "must be > 0");
        if (diagnose) {
            cfg.picard.tol = *overrides.tol;
        } else {
            cfg.solver.gap_tolerance = *overrides.tol;
        }
    }
    if (overrides.max_iter) {
        if (*overrides.max_iter < 0) throw SchemaError("--max-iter", "must be >= 0");
        if (diagnose) {
            cfg.picard.max_iterations = std::max(1, *overrides.max_iter);
        } else {
            cfg.solver.max_iterations = *overrides.max_iter;
        }
    }
}

NetworkSpec load_valid_network(const std::filesystem::path& path, std::optional<Horizon> horizon) {
    NetworkSpec spec = load_network(path);
    const auto violations = validate(spec, horizon);
    if (!violations.empty()) {
        const Violation& v = violations.front();
        throw SchemaError(v.entity, v.rule + ": " + v.message);
    }
    return spec;
}

SampledFunction direction_for(const DiagnosticsConfig& cfg, const TimeGrid& grid, int dim, std::uint64_t seed) {
    if (cfg.direction == "zero") return SampledFunction(grid, dim, Interpretation::PiecewiseConstant);
    if (cfg.direction == "one") {
        return SampledFunction::constant(grid, Interpretation::PiecewiseConstant, Vector::Ones(dim));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix values(dim, grid.n_bins());
    for (int k = 0; k < grid.n_bins(); ++k) {
        for (int i = 0; i < dim; ++i) values(i, k) = dist(rng);
    }
    return SampledFunction(grid, Interpretation::PiecewiseConstant, std::move(values));
}

// The system under diagnosis with its nominal control and initial state.
struct Setup {
    OdeSystem sys;
    Vector x0;
    SampledFunction u;
    std::optional<NetworkSpec> network;
};

Setup make_setup(const ScenarioConfig& cfg) {
    const TimeGrid grid = cfg.grid();
    const DiagnosticsConfig& d = cfg.diagnostics;
    if (d.system == "due") {
        if (!cfg.network) throw SchemaError("network", "system 'due' needs a network file");
        NetworkSpec spec = load_valid_network(*cfg.network, Horizon{cfg.t0, cfg.tf});
        const FeasibleSet set = FeasibleSet::from_network(spec, grid);
        OdeSystem sys = cumulative_state_system(spec, grid);
        Vector x0 = Vector::Zero(sys.state_dim);
        return {std::move(sys), std::move(x0), set.uniform().flows(), std::move(spec)};
    }
    OdeSystem sys = builtin_system(d.system);
    const double period = cfg.tf - cfg.t0;
    SampledFunction u = SampledFunction::from_callable(
        grid, Interpretation::PiecewiseConstant, 1, [&](double t) {
            return Vector::Constant(1, d.control_value +
                                           d.control_amplitude * std::sin(2.0 * std::numbers::pi * (t - cfg.t0) / period));
        });
    return {std::move(sys), Vector::Constant(1, d.x0), std::move(u), std::nullopt};
}

std::string picard_table(const PicardReport& report) {
    std::ostringstream csv;
    csv << "iteration,delta,ratio,bound\n";
    for (std::size_t k = 0; k < report.deltas.size(); ++k) {
        const double delta = report.deltas[k];
        csv << k + 1 << ',' << num(delta) << ',';
        if (k > 0 && report.deltas[k - 1] > 0.0) csv << num(delta / report.deltas[k - 1]);
        csv << ',' << num(aposteriori_bound(report.kappa, delta)) << '\n';
    }
    return csv.str();
}

int diagnose_picard(const ScenarioConfig& cfg, const Setup& setup, std::ostream& out) {
    const PicardReport report = picard_solve(setup.sys, setup.x0, setup.u, cfg.grid(), cfg.picard);
    write_file_atomic(cfg.output_dir / "diagnostics_picard.csv", picard_table(report));
    const auto ratios = report.contraction_ratios();
    const double max_ratio = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
    out << "iterations " << report.iterations << "\nalpha " << num(report.alpha) << "\nkappa "
        << num(report.kappa) << "\nmax_contraction_ratio " << num(max_ratio) << "\nbound " << num(report.bound)
        << "\nquadrature_error " << num(report.quadrature_error) << '\n';
    return 0;
}

int diagnose_sensitivity(const ScenarioConfig& cfg, const Setup& setup, std::ostream& out) {
    const TimeGrid grid = cfg.grid();
    const SampledFunction du = direction_for(cfg.diagnostics, grid, setup.sys.control_dim, cfg.seed);
    const PicardReport nominal = picard_solve(setup.sys, setup.x0, setup.u, grid, cfg.picard);
    const SensitivityResult variational = solve_variational(setup.sys, nominal.trajectory, setup.u, du);

    const SensitivityResult reference =
        setup.network ? cumulative_state_sensitivity(*setup.network, du)
                      : finite_difference_gateaux(setup.sys, setup.x0, setup.u, du, cfg.diagnostics.fd_epsilon,
                                                  cfg.picard);
    std::ostringstream csv;
    csv << "component,node,t,variational," << to_string(reference.method) << ",abs_diff\n";
    double worst = 0.0;
    for (int i = 0; i < variational.delta_x.dim(); ++i) {
        for (int k = 0; k < variational.delta_x.size(); ++k) {
            const double a = variational.delta_x(i, k);
            const double b = reference.delta_x(i, k);
            worst = std::max(worst, std::abs(a - b));
            csv << i << ',' << k << ',' << num(grid.node(k)) << ',' << num(a) << ',' << num(b) << ','
                << num(std::abs(a - b)) << '\n';
        }
    }
    write_file_atomic(cfg.output_dir / "diagnostics_sensitivity.csv", csv.str());
    const double scale = sup_norm(variational.delta_x);
    out << "reference " << to_string(reference.method) << "\nmax_abs_diff " << num(worst) << "\nrelative_diff "
        << num(scale > 0.0 ? worst / scale : worst) << '\n';
    return 0;
}

int diagnose_continuity(const ScenarioConfig& cfg, const Setup& setup, std::ostream& out) {
    const TimeGrid grid = cfg.grid();
    const SampledFunction du = direction_for(cfg.diagnostics, grid, setup.sys.control_dim, cfg.seed);
    const auto points = continuity_probe(setup.sys, setup.x0, setup.u, du, cfg.diagnostics.epsilons, cfg.picard);
    std::ostringstream csv;
    csv << "epsilon,deviation,deviation_over_epsilon\n";
    for (const ContinuityPoint& p : points) {
        csv << num(p.epsilon) << ',' << num(p.deviation) << ',' << num(p.deviation / p.epsilon) << '\n';
        out << "epsilon " << num(p.epsilon) << " deviation " << num(p.deviation) << '\n';
    }
    write_file_atomic(cfg.output_dir / "diagnostics_continuity.csv", csv.str());
    return 0;
}

std::string summary_json(const NetworkSpec& spec, const ScenarioConfig& cfg, const EquilibriumReport& report,
                         const std::vector<double>& demand_residuals, const Vector& terminal,
                         double worst_iterate_residual, std::size_t violations) {
    nlohmann::ordered_json doc;
    doc["termination"] = to_string(report.reason);
    doc["iterations"] = report.iterations;
    doc["gap"] = report.gap;
    doc["gap_scale"] = report.gap_scale;
    doc["gap_tolerance"] = cfg.solver.gap_tolerance;
    doc["delay_model"] = to_string(cfg.delay_model);
    doc["n_bins"] = cfg.n_bins;
    doc["max_iterate_demand_residual"] = worst_iterate_residual;
    doc["extrapolated_delays"] = report.extrapolated_delays;
    doc["certificate_violations"] = violations;
    doc["od_pairs"] = nlohmann::ordered_json::array();
    for (std::size_t od = 0; od < spec.od_pairs.size(); ++od) {
        doc["od_pairs"].push_back({{"id", spec.od_pairs[od].id},
                                   {"v", report.od_min_cost[od]},
                                   {"demand_residual", demand_residuals[od]},
                                   {"terminal_residual", terminal[static_cast<Eigen::Index>(od)]}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
    const nlohmann::json doc = schema::parse_document(text);
    const schema::Object root(doc, "");
    root.allow_only({"network", "horizon", "penalty", "delay_model", "solver", "picard", "output_dir", "seed",
                     "diagnostics"});
    ScenarioConfig cfg;
    if (root.has("network")) cfg.network = base_dir / root.string("network");

    const schema::Object horizon = root.at("horizon").object();
    horizon.allow_only({"t0", "tf", "n_bins"});
    cfg.t0 = horizon.number("t0");
    cfg.tf = horizon.number("tf");
    if (!(cfg.tf > cfg.t0)) throw SchemaError("horizon.tf", "must exceed horizon.t0");
    cfg.n_bins = positive_int(horizon, "n_bins", cfg.n_bins);

    if (root.has("penalty")) cfg.penalty = parse_penalty(root.at("penalty").object());
    if (root.has("delay_model")) {
        const schema::Value v = root.at("delay_model");
        const std::string model = v.as_string();
        if (model == "whole_link") {
            cfg.delay_model = DelayModel::WholeLink;
        } else if (model == "instantaneous") {
            cfg.delay_model = DelayModel::Instantaneous;
        } else {
            throw SchemaError(v.path(), "expected whole_link or instantaneous");
        }
    }
    if (root.has("solver")) cfg.solver = parse_solver(root.at("solver").object());
    if (root.has("picard")) {
        const schema::Object picard = root.at("picard").object();
        picard.allow_only({"tol", "max_iterations"});
        cfg.picard.tol = positive(picard, "tol", cfg.picard.tol);
        cfg.picard.max_iterations = positive_int(picard, "max_iterations", cfg.picard.max_iterations);
    }
    if (root.has("output_dir")) cfg.output_dir = base_dir / root.string("output_dir");
    if (root.has("seed")) {
        const schema::Value v = root.at("seed");
        const long long seed = v.as_integer();
        if (seed < 0) throw SchemaError(v.path(), "must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(seed);
    }
    if (root.has("diagnostics")) cfg.diagnostics = parse_diagnostics(root.at("diagnostics").object());
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    return parse_scenario(schema::read_file(path), path.parent_path());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw Error(ErrorCode::Io, "failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::string flows_csv(const NetworkSpec& spec, const PathFlowProfile& h) {
    std::ostringstream csv;
    csv << "path,bin,t,h\n";
    for (int p = 0; p < h.n_paths(); ++p) {
        for (int k = 0; k < h.grid().n_bins(); ++k) {
            csv << spec.paths[static_cast<std::size_t>(p)].id << ',' << k << ',' << num(h.grid().midpoint(k)) << ','
                << num(h(p, k)) << '\n';
        }
    }
    return csv.str();
}

std::string delays_csv(const NetworkSpec& spec, const TimeGrid& grid, const Matrix& path_delay, const Matrix& psi) {
    std::ostringstream csv;
    csv << "path,bin,t,D_p,Psi_p\n";
    for (Eigen::Index p = 0; p < path_delay.rows(); ++p) {
        for (int k = 0; k < grid.n_bins(); ++k) {
            csv << spec.paths[static_cast<std::size_t>(p)].id << ',' << k << ',' << num(grid.midpoint(k)) << ','
                << num(path_delay(p, k)) << ',' << num(psi(p, k)) << '\n';
        }
    }
    return csv.str();
}

std::string gap_csv(const std::vector<GapRecord>& trace) {
    std::ostringstream csv;
    csv << "iteration,gap,step\n";
    for (const GapRecord& r : trace) csv << r.iteration << ',' << num(r.gap) << ',' << num(r.step) << '\n';
    return csv.str();
}

int run_solve(const std::filesystem::path& network_path, const std::filesystem::path& scenario_path,
              const Overrides& overrides, std::ostream& out, std::ostream& err) {
    try {
        ScenarioConfig cfg = load_scenario(scenario_path);
        apply(cfg, overrides, false);
        const NetworkSpec spec = load_valid_network(network_path, Horizon{cfg.t0, cfg.tf});
        const TimeGrid grid = cfg.grid();
        const FeasibleSet set = FeasibleSet::from_network(spec, grid);

        double worst_residual = 0.0;
        const auto observer = [&](int, const PathFlowProfile& h) {
            for (double r : set.demand_residuals(h)) worst_residual = std::max(worst_residual, std::abs(r));
        };
        const EquilibriumReport report =
            solve_due(spec, cfg.penalty, set, cfg.solver, delay_producer(cfg.delay_model), observer);

        const SampledFunction y = cumulative_state(report.flows, spec);
        const Vector terminal = terminal_residual(demand_terminal_condition(spec), y);
        const auto violations = certify(report, set, cfg.solver.support_threshold, cfg.solver.certify_rel_tol);

        write_file_atomic(cfg.output_dir / "flows.csv", flows_csv(spec, report.flows));
        write_file_atomic(cfg.output_dir / "delays.csv", delays_csv(spec, grid, report.path_delay, report.psi));
        write_file_atomic(cfg.output_dir / "gap.csv", gap_csv(report.trace));
        write_file_atomic(cfg.output_dir / "summary.json",
                          summary_json(spec, cfg, report, set.demand_residuals(report.flows), terminal, worst_residual,
                                       violations.size()));

        out << to_string(report.reason) << " after " << report.iterations << " iterations, gap "
            << num(report.gap) << '\n';
        for (std::size_t od = 0; od < spec.od_pairs.size(); ++od) {
            out << "v[" << spec.od_pairs[od].id << "] = " << num(report.od_min_cost[od]) << '\n';
        }
        return report.converged() ? 0 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run_diagnostics(const std::string& mode, const std::filesystem::path& scenario_path,
                    const Overrides& overrides, std::ostream& out, std::ostream& err) {
    try {
        ScenarioConfig cfg = load_scenario(scenario_path);
        apply(cfg, overrides, true);
        if (mode != "picard" && mode != "sensitivity" && mode != "continuity") {
            throw Error(ErrorCode::InvalidArgument, "unknown diagnostic mode '" + mode + "'");
        }
        const Setup setup = make_setup(cfg);
        if (mode == "picard") return diagnose_picard(cfg, setup, out);
        if (mode == "sensitivity") return diagnose_sensitivity(cfg, setup, out);
        return diagnose_continuity(cfg, setup, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run_validate(const std::filesystem::path& network_path, std::ostream& out, std::ostream& err) {
    try {
        const NetworkSpec spec = load_network(network_path);
        const auto violations = validate(spec);
        for (const Violation& v : violations) out << v.entity << ": " << v.rule << ": " << v.message << '\n';
        if (violations.empty()) out << "ok: " << spec.paths.size() << " paths, " << spec.od_pairs.size() << " O-D pairs\n";
        return violations.empty() ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace due::cli
