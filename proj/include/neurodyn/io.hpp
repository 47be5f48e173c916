#pragma once

// File formats.
//
// Problem file (JSON):
//   { "n": 3, "A": [a00, a01, ..., a(n-1)(n-1)], "b": [b0, ..., b(n-1)] }
// "A" is row-major; a nested array of rows is accepted as well.
//
// Trajectory CSV: header `t_ms,residual,lyapunov,x_0,...,x_{n-1}`, one row
// per stored sample, every number printed with 17 significant digits.
//
// Reports and trajectory metadata are JSON objects; see the *_json helpers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neurodyn/experiments.hpp"

namespace neurodyn::io {

using Json = nlohmann::ordered_json;

// "%.17g"
std::string format_double(double v);

LinearProblem parse_problem_json(std::string_view text);
LinearProblem read_problem_file(const std::filesystem::path& path);
Json problem_json(const LinearProblem& p);

// Requires traj.lyapunov to be filled.
std::string trajectory_csv(const Trajectory& traj);

struct CsvTrajectory {
    std::vector<double> t_ms;
    std::vector<double> residual;
    std::vector<double> lyapunov;
    std::vector<DenseVector> states;
};
// Throws Io on a malformed header or row.
CsvTrajectory parse_trajectory_csv(std::string_view text);

Json rate_report_json(const RateReport& r);
Json trajectory_meta_json(const Trajectory& traj, const NeuralModel& m, LyapunovForm form);
Json run_summary_json(const RunSummary& r);
Json experiment_report_json(const ExperimentReport& rep);

std::string read_text(const std::filesystem::path& path);
// Writes through a temporary sibling and renames into place.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace neurodyn::io
