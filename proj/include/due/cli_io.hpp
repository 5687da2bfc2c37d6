#pragma once

#include "due/delay_operator.hpp"
#include "due/equilibrium_solver.hpp"
#include "due/state_operator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace due::cli {

/// Settings for the diagnostics subcommand.
struct DiagnosticsConfig {
    std::string system = "decay";  // built-in name or "due"
    double x0 = 1.0;
    double control_value = 0.0;      // u(t) = value + amplitude * sin(2 pi (t - t0) / (tf - t0))
    double control_amplitude = 0.0;
    std::string direction = "one";  // zero | one | random
    std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
    double fd_epsilon = 1e-4;
};

struct ScenarioConfig {
    std::optional<std::filesystem::path> network;  // resolved against the scenario's directory
    double t0 = 0.0;
    double tf = 1.0;
    int n_bins = 100;
    ArrivalPenalty penalty;
    DelayModel delay_model = DelayModel::WholeLink;
    SolverConfig solver;
    PicardOptions picard;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;
    DiagnosticsConfig diagnostics;

    TimeGrid grid() const { return TimeGrid(t0, tf, n_bins); }
};

/// Command-line overrides; empty fields leave the scenario untouched.
struct Overrides {
    std::optional<std::filesystem::path> out;
    std::optional<int> bins;
    std::optional<double> tol;
    std::optional<int> max_iter;
};

/// Throws SchemaError on malformed input or out-of-range values.
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Writes `content` to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string flows_csv(const NetworkSpec& spec, const PathFlowProfile& h);
std::string delays_csv(const NetworkSpec& spec, const TimeGrid& grid, const Matrix& path_delay, const Matrix& psi);
std::string gap_csv(const std::vector<GapRecord>& trace);

/// Exit status: 0 converged, 2 not converged, 1 input or model error.
/// Diagnostics go to `err`.
int run_solve(const std::filesystem::path& network_path, const std::filesystem::path& scenario_path,
              const Overrides& overrides, std::ostream& out, std::ostream& err);

/// mode is picard | sensitivity | continuity. Writes diagnostics_<mode>.csv
/// into the output directory. Exit 0 on success, 1 on error.
int run_diagnostics(const std::string& mode, const std::filesystem::path& scenario_path,
                    const Overrides& overrides, std::ostream& out, std::ostream& err);

/// Prints violations; exit 0 when the network is valid, 1 otherwise.
int run_validate(const std::filesystem::path& network_path, std::ostream& out, std::ostream& err);

}  // namespace due::cli
