#include "neurodyn/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "neurodyn/kernels.hpp"

namespace neurodyn {
namespace {

using MassFactor = std::variant<CholeskyFactor, LuFactor>;

MassFactor factor_mass(const DenseMatrix& mass) {
    if (is_symmetric(mass)) {
        try {
            return cholesky(mass);
        } catch (const Error& e) {
            if (e.code() != Errc::NotPositiveDefinite) throw;
        }
    }
    try {
        return lu(mass);
    } catch (const Error& e) {
        throw Error(Errc::FactorizationFailed, std::string("mass matrix factorization failed: ") + e.what());
    }
}

DenseVector solve_with(const MassFactor& f, const DenseVector& r) {
    return std::visit([&](const auto& fac) { return fac.solve(r); }, f);
}

void require_ode(const NeuralModel& m, const char* op) {
    if (m.classification == DynamicsClass::DAE)
        throw Error(Errc::DaeNotIntegrable,
                    std::string(op) + ": " + std::string(to_string(m.kind)) +
                        " has a singular mass matrix; the system is a DAE (differential-algebraic), not an ODE, "
                        "and cannot be integrated");
}

double power_iteration(const MassFactor& f, const NeuralModel& m, int iterations, double tol) {
    const std::size_t n = m.problem.dim();
    if (n == 0) return 0.0;
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> unit(0.5, 1.5);
    DenseVector v(n);
    for (double& x : v.values()) x = unit(rng);
    v = scaled(v, 1.0 / norm2(v));

    double rho = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const DenseVector w = solve_with(f, mat_vec(m.gain, mat_vec(m.problem.a, v)));
        const double next = norm2(w);
        if (next == 0.0) return 0.0;
        v = scaled(w, 1.0 / next);
        const bool done = std::abs(next - rho) <= tol * next;
        rho = next;
        if (done) break;
    }
    return rho;
}

double step_from_radius(double gamma, double rho) {
    if (!(rho > 0.0)) return kMaxStep;
    return std::clamp(0.5 * kRk4StabilityInterval / (gamma * rho), kMinStep, kMaxStep);
}

}  // namespace

DenseVector SolvableModel::apply_mass_inverse(const DenseVector& r) const { return solve_with(factor_, r); }

DenseVector SolvableModel::velocity(const DenseVector& x) const { return solve_with(factor_, rhs(model_, x)); }

SolvableModel prefactorize(const NeuralModel& m) {
    require_ode(m, "prefactorize");
    MassFactor f = factor_mass(m.mass);
    const double h = step_from_radius(m.gamma, power_iteration(f, m, 50, 1e-8));
    return SolvableModel(m, std::move(f), h);
}

double spectral_radius_estimate(const NeuralModel& m, int iterations, double tol) {
    require_ode(m, "spectral_radius_estimate");
    return power_iteration(factor_mass(m.mass), m, iterations, tol);
}

double auto_step_size(const NeuralModel& m) { return step_from_radius(m.gamma, spectral_radius_estimate(m)); }

DenseVector rk4_step(const SolvableModel& s, const DenseVector& x, double h) {
    if (!(h > 0.0)) throw Error(Errc::InvalidArgument, "rk4_step: h must be positive");
    const DenseVector k1 = s.velocity(x);
    DenseVector tmp = x;
    kernels::axpy(0.5 * h, k1.values(), tmp.values());
    const DenseVector k2 = s.velocity(tmp);
    tmp = x;
    kernels::axpy(0.5 * h, k2.values(), tmp.values());
    const DenseVector k3 = s.velocity(tmp);
    tmp = x;
    kernels::axpy(h, k3.values(), tmp.values());
    const DenseVector k4 = s.velocity(tmp);

    DenseVector out = x;
    const double w = h / 6.0;
    kernels::axpy(w, k1.values(), out.values());
    kernels::axpy(2.0 * w, k2.values(), out.values());
    kernels::axpy(2.0 * w, k3.values(), out.values());
    kernels::axpy(w, k4.values(), out.values());

    for (double v : out.values())
        if (!std::isfinite(v) || std::abs(v) > kDivergenceBound)
            throw Error(Errc::NonFiniteState, "rk4_step: state diverged with h = " + std::to_string(h) +
                                                  " s; try a step at or below auto_step_size = " +
                                                  std::to_string(s.stable_step()) + " s");
    return out;
}

Trajectory integrate(const SolvableModel& s, const DenseVector& x0, const IntegrateOptions& opts) {
    const NeuralModel& m = s.model();
    if (x0.dim() != m.problem.dim())
        throw Error(Errc::DimensionMismatch, "integrate: x0 dimension does not match the problem");
    if (!(opts.t_end > 0.0) || !std::isfinite(opts.t_end))
        throw Error(Errc::InvalidArgument, "integrate: t_end must be positive");
    const double h_req = opts.h > 0.0 ? opts.h : s.stable_step() / 10.0;

    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(opts.t_end / h_req * (1.0 - 1e-12))));
    const double h = opts.t_end / static_cast<double>(steps);
    const std::size_t stride =
        opts.stride > 0 ? opts.stride : std::max<std::size_t>(1, (steps + kMaxSamples - 3) / (kMaxSamples - 2));

    Trajectory traj;
    traj.meta = {m.gamma, h, stride, opts.seed, m.kind};
    const std::size_t expected = steps / stride + 2;
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    traj.residuals.reserve(expected);

    auto record = [&](std::size_t k, const DenseVector& x) {
        traj.times.push_back(static_cast<double>(k) * h);
        traj.states.push_back(x);
        traj.residuals.push_back(residual(m.problem, x));
    };

    DenseVector x = x0;
    record(0, x);
    for (std::size_t k = 1; k <= steps; ++k) {
        try {
            x = rk4_step(s, x, h);
        } catch (const Error& e) {
            if (e.code() != Errc::NonFiniteState) throw;
            const double t = static_cast<double>(k) * h;
            throw Error(Errc::NonFiniteState, std::string(e.what()) + " (at t = " + std::to_string(t) + " s)", t);
        }
        if (k % stride == 0 || k == steps) record(k, x);
    }
    // The last sample sits exactly at t_end.
    traj.times.back() = opts.t_end;
    return traj;
}

DenseVector closed_form_error(const NeuralModel& m, const DenseVector& e0, double t) {
    if (m.kind != ModelKind::IGNN && m.kind != ModelKind::GNN)
        throw Error(Errc::UnsupportedKind,
                    "closed_form_error: no closed form for " + std::string(to_string(m.kind)));
    if (e0.dim() != m.problem.dim()) throw Error(Errc::DimensionMismatch, "closed_form_error: e0 dimension");

    const SymEigen eig = sym_eigen(gram(m.problem.a));
    const std::size_t n = e0.dim();
    DenseVector out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = std::max(0.0, eig.eigenvalues[k]);
        const double rate = m.kind == ModelKind::IGNN ? lambda / (1.0 + lambda) : lambda;
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += eig.eigenvectors(i, k) * e0[i];
        c *= std::exp(-m.gamma * rate * t);
        for (std::size_t i = 0; i < n; ++i) out[i] += c * eig.eigenvectors(i, k);
    }
    return out;
}

DenseVector flow_reference_point(const LinearProblem& p) {
    if (p.x_star) return *p.x_star;
    return least_squares(p.a, p.b).x;
}

}  // namespace neurodyn
