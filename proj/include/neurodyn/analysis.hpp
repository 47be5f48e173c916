#pragma once

// Lyapunov functions, rate predictions and trajectory measurements for the
// implicit gradient network (IGNN).
//
// Two rate predictions are carried side by side. The guaranteed rate from
// the Lyapunov argument is gamma * alpha for 0 < alpha < 1 and gamma for
// alpha >= 1, with alpha = lambda_min(A^T A). The modal rate follows from
// diagonalizing the error dynamics (A^T A + I) e' = -gamma A^T A e: the
// slowest mode decays at gamma * alpha / (1 + alpha). The modal rate is what
// simulations actually show, and it is strictly slower than the guaranteed
// rate whenever 0 < alpha < 1.

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "neurodyn/integrator.hpp"

namespace neurodyn {

struct RateReport {
    double alpha = 0.0;       // lambda_min(A^T A)
    double beta = 1.0;        // lambda_min(A^T A + I)
    double guaranteed_rate = 0.0;  // guaranteed by the Lyapunov bound; 0 when alpha == 0
    double modal_rate = 0.0;  // gamma * alpha / (1 + alpha)
    std::optional<double> fitted_rate;
    double gamma = 0.0;
};

// ||(A^T A + I)(x - x_star)||^2 / 2. Throws NotUnique.
double lyapunov_unique(const LinearProblem& p, const DenseVector& x);

// ||A^T A x - A^T b||^2 / 2 + ||A x - b||^2 / 2.
double lyapunov_degenerate(const LinearProblem& p, const DenseVector& x);

enum class LyapunovForm { Unique, Degenerate };
std::string_view to_string(LyapunovForm f);

// Unique problems use the error-based form, everything else the
// residual-based form.
LyapunovForm lyapunov_form_for(const LinearProblem& p);
double lyapunov(LyapunovForm form, const LinearProblem& p, const DenseVector& x);

// Fills traj.lyapunov from the stored states.
LyapunovForm attach_lyapunov(Trajectory& traj, const LinearProblem& p);

// Throws NonPositiveGamma.
RateReport theoretical_rates(const LinearProblem& p, double gamma);

struct TimeWindow {
    double lo;
    double hi;
};

inline constexpr double kFitResidualFloor = 1e-13;
inline constexpr std::size_t kMinFitSamples = 10;

// [0.6, 0.95] * t_end.
TimeWindow late_window(const Trajectory& traj);

// Late window shrunk so it ends before the residual reaches round-off level
// (below max(1e-11, 1e-10 * residual(0))).
TimeWindow resolved_late_window(const Trajectory& traj);

// Least-squares slope of -ln(residual) against t over the window.
// Throws InsufficientData with fewer than kMinFitSamples usable samples.
double fit_decay_rate(const Trajectory& traj, TimeWindow window);

// Same fit over raw series; used for synthetic data.
double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& residuals, TimeWindow window);

// First time the residual reaches threshold, log-linearly interpolated
// between samples. nullopt if never reached.
std::optional<double> convergence_time(const Trajectory& traj, double threshold);
std::optional<double> convergence_time(const std::vector<double>& times, const std::vector<double>& residuals,
                                       double threshold);

// Mean residual over the final 10% of samples. Throws NotSettled unless the
// spread over that tail is below 1e-6 * max(tail mean, residual(0)).
double asymptotic_residual(const Trajectory& traj);
double asymptotic_residual(const std::vector<double>& residuals);

// Largest increase series[i+1] - series[i] (0 for a non-increasing series).
double max_increase(const std::vector<double>& series);
bool non_increasing(const std::vector<double>& series, double slack);

struct DecayBoundCheck {
    bool ok = true;
    std::size_t checked = 0;
    // min over checked samples of -dphi/dt / (gamma alpha beta ||e||^2);
    // the bound holds where this is >= 1 - rel_slack.
    double min_ratio = 0.0;
    std::size_t worst_index = 0;
};

// Central differences of the unique-form Lyapunov value at interior samples
// against the bound -gamma alpha beta ||e||^2, with relative slack. Samples
// whose error has decayed below 1e-10 * ||e(0)|| are skipped.
DecayBoundCheck check_lyapunov_decay_bound(const Trajectory& traj, const LinearProblem& p, const RateReport& rates,
                                           double rel_slack);

}  // namespace neurodyn
