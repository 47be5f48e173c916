#pragma once

// Fixed-step RK4 for mass-matrix dynamics M x' = f(x), with M factored once,
// plus the exact modal solution of the IGNN / GNN error dynamics.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "neurodyn/models.hpp"

namespace neurodyn {

class SolvableModel {
public:
    const NeuralModel& model() const noexcept { return model_; }
    double stable_step() const noexcept { return stable_step_; }
    bool mass_is_spd() const noexcept { return std::holds_alternative<CholeskyFactor>(factor_); }

    // M^{-1} r
    DenseVector apply_mass_inverse(const DenseVector& r) const;
    // M^{-1} rhs(x)
    DenseVector velocity(const DenseVector& x) const;

private:
    friend SolvableModel prefactorize(const NeuralModel& m);
    SolvableModel(NeuralModel m, std::variant<CholeskyFactor, LuFactor> f, double h)
        : model_(std::move(m)), factor_(std::move(f)), stable_step_(h) {}

    NeuralModel model_;
    std::variant<CholeskyFactor, LuFactor> factor_;
    double stable_step_;
};

// Throws DaeNotIntegrable for a DAE-classified model, FactorizationFailed on
// numerical breakdown.
SolvableModel prefactorize(const NeuralModel& m);

// Largest eigenvalue of M^{-1} K A by power iteration.
double spectral_radius_estimate(const NeuralModel& m, int iterations = 50, double tol = 1e-8);

// 0.5 * 2.78 / (gamma * rho), clamped to [kMinStep, kMaxStep].
inline constexpr double kRk4StabilityInterval = 2.78;
inline constexpr double kMinStep = 1e-8;
inline constexpr double kMaxStep = 1e-2;
double auto_step_size(const NeuralModel& m);

// Any state component beyond this magnitude aborts integration.
inline constexpr double kDivergenceBound = 1e12;

// Classical RK4. Throws NonFiniteState if the new state overflows the
// divergence bound.
DenseVector rk4_step(const SolvableModel& s, const DenseVector& x, double h);

struct TrajectoryMeta {
    double gamma = 0.0;
    double h = 0.0;
    std::size_t stride = 1;
    std::uint64_t seed = 0;
    ModelKind kind = ModelKind::IGNN;
};

struct Trajectory {
    std::vector<double> times;  // seconds
    std::vector<DenseVector> states;
    std::vector<double> residuals;
    std::optional<std::vector<double>> lyapunov;
    TrajectoryMeta meta;

    std::size_t size() const noexcept { return times.size(); }
};

struct IntegrateOptions {
    double t_end = 0.0;
    double h = 0.0;  // <= 0 selects stable_step / 10
    std::size_t stride = 0;  // 0 keeps at most kMaxSamples samples
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxSamples = 5000;

// March from x0 to t_end with a uniform step no larger than the requested h.
// Stores every stride-th sample and always the final state.
Trajectory integrate(const SolvableModel& s, const DenseVector& x0, const IntegrateOptions& opts);

// Q diag(exp(-gamma r_i t)) Q^T e0 with A^T A = Q diag(lambda) Q^T and
// r_i = lambda_i / (1 + lambda_i) (IGNN) or lambda_i (GNN).
// Throws UnsupportedKind for ZNN / IZNN.
DenseVector closed_form_error(const NeuralModel& m, const DenseVector& e0, double t);

// Reference point the IGNN / GNN flow relaxes toward: the minimum-norm least
// squares solution. x(t) = x_ref + closed_form_error(x0 - x_ref, t).
DenseVector flow_reference_point(const LinearProblem& p);

}  // namespace neurodyn
