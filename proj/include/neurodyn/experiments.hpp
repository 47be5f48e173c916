#pragma once

// Problem generators and scripted simulation scenarios:
//   fig1        IGNN on a nonsingular system with prescribed alpha, several
//               random initial states (exponential convergence)
//   fig2-nosol  IGNN on the singular 3x3 example with an inconsistent b
//   fig2-multi  IGNN on the same matrix with a consistent b
//   compare     all four model kinds on one problem

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neurodyn/analysis.hpp"

namespace neurodyn {

// A = U diag(sigma) V^T with seeded random orthogonal U, V;
// b = A x_target with x_target uniform in [-2, 2]^n.
LinearProblem gen_prescribed(std::size_t n, const std::vector<double>& sigma, std::uint64_t seed);

// Orthogonal n x n matrix from Gram-Schmidt on a seeded standard-normal
// matrix.
DenseMatrix random_orthogonal(std::size_t n, std::uint64_t seed);

enum class SingularCase { NoSolution, MultiSolution };

// A = [[1,-1,0],[-1,2,1],[0,1,1]] with b = [1,1,1] (no solution) or
// b = [0,1,1] (infinitely many).
LinearProblem singular_example(SingularCase c);

// n_inits states uniform per component in [-2, 2]^n, deterministic in seed.
std::vector<DenseVector> random_initial_states(std::size_t n, std::size_t n_inits, std::uint64_t seed);

inline const double kFigure1Alpha = 0.2345;
inline const double kFigure1Threshold = std::exp(-7.0);
inline constexpr double kReportedRate = 234.5;
inline constexpr double kReportedTimeMs = 29.9;

struct RunSummary {
    std::size_t index = 0;
    ModelKind kind = ModelKind::IGNN;
    DynamicsClass dynamics = DynamicsClass::ODE;
    bool integrated = false;
    std::string note;  // e.g. why a run was not integrated

    DenseVector x0;
    DenseVector final_state;
    double initial_residual = 0.0;
    double final_residual = 0.0;
    std::optional<double> final_error;  // ||x - x_star|| for Unique problems
    std::optional<double> fitted_rate;
    std::optional<double> convergence_time;  // seconds
    std::optional<double> predicted_time;    // (7 + ln r(0)) / fitted_rate
    std::optional<double> asymptotic_residual;
    bool residual_monotone = false;
    bool lyapunov_monotone = false;
    bool converged = false;

    std::optional<Trajectory> trajectory;
};

struct ExperimentReport {
    std::string scenario;
    std::uint64_t seed = 0;
    double gamma = 0.0;
    double h = 0.0;
    double threshold = 0.0;
    LinearProblem problem;
    RateReport rates;
    std::optional<double> min_residual;  // least-squares optimum
    std::vector<RunSummary> runs;
    std::map<std::string, bool> flags;

    bool all_ok() const;
};

inline constexpr double kMonotoneSlack = 1e-10;

struct Figure1Options {
    double gamma = 1000.0;
    std::size_t n_inits = 6;
    std::uint64_t seed = 1;
    std::vector<double> sigma{std::sqrt(0.2345), 1.0, 2.0};
    double t_end = 0.060;
    double h = 0.0;  // 0 -> stable_step / 10
    std::size_t stride = 0;
};

ExperimentReport run_figure1(const Figure1Options& opts);
ExperimentReport run_figure1(double gamma, std::size_t n_inits, std::uint64_t seed);

struct Figure2Options {
    SingularCase which = SingularCase::NoSolution;
    double gamma = 1000.0;
    std::size_t n_inits = 6;
    std::uint64_t seed = 1;
    double t_end = 0.100;
    double h = 0.0;
    std::size_t stride = 0;
};

ExperimentReport run_figure2(const Figure2Options& opts);
ExperimentReport run_figure2(SingularCase which, double gamma, std::size_t n_inits, std::uint64_t seed);

struct CompareOptions {
    std::optional<double> t_end;  // default: 30 slowest-mode time constants, or 100 ms for singular A
    double h = 0.0;               // default: smallest stable_step / 10 over the integrable kinds
    std::size_t stride = 0;
    std::uint64_t seed = 0;
    double threshold = std::exp(-7.0);
};

ExperimentReport compare_models(const LinearProblem& p, double gamma, const DenseVector& x0,
                                const CompareOptions& opts = {});

// Slowest nonzero modal decay rate of the model's error dynamics (1/s);
// 0 when A = 0.
double slowest_modal_rate(const NeuralModel& m);

// Simulation horizon covering `time_constants` of the slowest mode.
double suggested_t_end(const NeuralModel& m, double time_constants = 30.0);

}  // namespace neurodyn
