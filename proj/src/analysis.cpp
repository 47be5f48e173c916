#include "neurodyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace neurodyn {

double lyapunov_unique(const LinearProblem& p, const DenseVector& x) {
    if (p.classification != Solvability::Unique || !p.x_star)
        throw Error(Errc::NotUnique, "lyapunov_unique: problem has no unique solution");
    const DenseVector e = sub(x, *p.x_star);
    const DenseVector w = add(mat_t_vec(p.a, mat_vec(p.a, e)), e);
    const double nw = norm2(w);
    return 0.5 * nw * nw;
}

double lyapunov_degenerate(const LinearProblem& p, const DenseVector& x) {
    const DenseVector r = sub(mat_vec(p.a, x), p.b);
    const double ng = norm2(mat_t_vec(p.a, r));
    const double nr = norm2(r);
    return 0.5 * ng * ng + 0.5 * nr * nr;
}

std::string_view to_string(LyapunovForm f) { return f == LyapunovForm::Unique ? "unique" : "degenerate"; }

LyapunovForm lyapunov_form_for(const LinearProblem& p) {
    return p.classification == Solvability::Unique ? LyapunovForm::Unique : LyapunovForm::Degenerate;
}

double lyapunov(LyapunovForm form, const LinearProblem& p, const DenseVector& x) {
    return form == LyapunovForm::Unique ? lyapunov_unique(p, x) : lyapunov_degenerate(p, x);
}

LyapunovForm attach_lyapunov(Trajectory& traj, const LinearProblem& p) {
    const LyapunovForm form = lyapunov_form_for(p);
    std::vector<double> values;
    values.reserve(traj.size());
    for (const DenseVector& x : traj.states) values.push_back(lyapunov(form, p, x));
    traj.lyapunov = std::move(values);
    return form;
}

RateReport theoretical_rates(const LinearProblem& p, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw Error(Errc::NonPositiveGamma, "theoretical_rates: gamma must be positive");
    const DenseMatrix ata = gram(p.a);
    RateReport r;
    r.gamma = gamma;
    // A singular coefficient matrix has alpha = 0 exactly; the eigensolver
    // would report round-off instead.
    r.alpha = p.classification == Solvability::Unique ? std::max(0.0, sym_eigen(ata).eigenvalues.front()) : 0.0;
    r.beta = p.classification == Solvability::Unique ? sym_eigen(add_identity(ata)).eigenvalues.front() : 1.0;
    if (r.alpha <= 0.0)
        r.guaranteed_rate = 0.0;
    else if (r.alpha < 1.0)
        r.guaranteed_rate = gamma * r.alpha;
    else
        r.guaranteed_rate = gamma;
    r.modal_rate = gamma * r.alpha / (1.0 + r.alpha);
    return r;
}

TimeWindow late_window(const Trajectory& traj) {
    const double t_end = traj.times.empty() ? 0.0 : traj.times.back();
    return {0.6 * t_end, 0.95 * t_end};
}

TimeWindow resolved_late_window(const Trajectory& traj) {
    TimeWindow w = late_window(traj);
    if (traj.residuals.empty()) return w;
    const double floor = std::max(1e-11, 1e-10 * traj.residuals.front());
    double last_resolved = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        if (traj.residuals[i] > floor) last_resolved = traj.times[i];
    if (last_resolved < w.hi) w = {0.6 * last_resolved / 0.95, last_resolved};
    return w;
}

double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& residuals, TimeWindow window) {
    if (times.size() != residuals.size())
        throw Error(Errc::DimensionMismatch, "fit_decay_rate: times and residuals differ in length");
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (t < window.lo || t > window.hi || !(residuals[i] > kFitResidualFloor)) continue;
        const double y = -std::log(residuals[i]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++count;
    }
    if (count < kMinFitSamples)
        throw Error(Errc::InsufficientData, "fit_decay_rate: only " + std::to_string(count) +
                                                " usable samples in window (need " +
                                                std::to_string(kMinFitSamples) + ")");
    const double c = static_cast<double>(count);
    const double denom = c * stt - st * st;
    if (!(denom > 0.0)) throw Error(Errc::InsufficientData, "fit_decay_rate: degenerate time window");
    return (c * sty - st * sy) / denom;
}

double fit_decay_rate(const Trajectory& traj, TimeWindow window) {
    return fit_decay_rate(traj.times, traj.residuals, window);
}

std::optional<double> convergence_time(const std::vector<double>& times, const std::vector<double>& residuals,
                                       double threshold) {
    if (!(threshold > 0.0)) throw Error(Errc::InvalidArgument, "convergence_time: threshold must be positive");
    if (times.size() != residuals.size())
        throw Error(Errc::DimensionMismatch, "convergence_time: times and residuals differ in length");
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        if (residuals[i] > threshold) continue;
        if (i == 0) return times[0];
        const double r0 = residuals[i - 1];
        const double r1 = residuals[i];
        const double t0 = times[i - 1];
        const double t1 = times[i];
        double frac;
        if (r1 > 0.0)
            frac = (std::log(threshold) - std::log(r0)) / (std::log(r1) - std::log(r0));
        else
            frac = (threshold - r0) / (r1 - r0);
        return t0 + std::clamp(frac, 0.0, 1.0) * (t1 - t0);
    }
    return std::nullopt;
}

std::optional<double> convergence_time(const Trajectory& traj, double threshold) {
    return convergence_time(traj.times, traj.residuals, threshold);
}

double asymptotic_residual(const std::vector<double>& residuals) {
    if (residuals.size() < 2) throw Error(Errc::NotSettled, "asymptotic_residual: trajectory too short");
    const std::size_t tail = std::max<std::size_t>(2, residuals.size() / 10);
    const auto first = residuals.end() - static_cast<std::ptrdiff_t>(tail);
    const auto [lo, hi] = std::minmax_element(first, residuals.end());
    const double mean = std::accumulate(first, residuals.end(), 0.0) / static_cast<double>(tail);
    const double scale = std::max(mean, residuals.front());
    if (*hi - *lo > 1e-6 * scale)
        throw Error(Errc::NotSettled, "asymptotic_residual: final 10% of samples still varies by " +
                                          std::to_string(*hi - *lo) + " (mean " + std::to_string(mean) + ")");
    return mean;
}

double asymptotic_residual(const Trajectory& traj) { return asymptotic_residual(traj.residuals); }

double max_increase(const std::vector<double>& series) {
    double worst = 0.0;
    for (std::size_t i = 1; i < series.size(); ++i) worst = std::max(worst, series[i] - series[i - 1]);
    return worst;
}

bool non_increasing(const std::vector<double>& series, double slack) { return max_increase(series) <= slack; }

DecayBoundCheck check_lyapunov_decay_bound(const Trajectory& traj, const LinearProblem& p, const RateReport& rates,
                                           double rel_slack) {
    if (p.classification != Solvability::Unique || !p.x_star)
        throw Error(Errc::NotUnique, "check_lyapunov_decay_bound: problem has no unique solution");
    DecayBoundCheck out;
    out.min_ratio = std::numeric_limits<double>::infinity();
    if (traj.size() < 3) return out;

    std::vector<double> phi(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) phi[i] = lyapunov_unique(p, traj.states[i]);
    const double e0 = norm2(sub(traj.states.front(), *p.x_star));
    const double coef = rates.gamma * rates.alpha * rates.beta;

    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        const double e = norm2(sub(traj.states[i], *p.x_star));
        if (e <= 1e-10 * e0) continue;
        const double dphi = (phi[i + 1] - phi[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]);
        const double bound = coef * e * e;
        const double ratio = -dphi / bound;
        ++out.checked;
        if (ratio < out.min_ratio) {
            out.min_ratio = ratio;
            out.worst_index = i;
        }
        if (dphi > -bound + rel_slack * bound) out.ok = false;
    }
    return out;
}

}  // namespace neurodyn
