#include <doctest.h>

#include <cmath>
#include <random>

#include "neurodyn/experiments.hpp"
#include "neurodyn/integrator.hpp"
#include "oracles.hpp"

using namespace neurodyn;

namespace {

const DenseMatrix kAs{{1, -1, 0}, {-1, 2, 1}, {0, 1, 1}};

Errc error_code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected neurodyn::Error");
    return Errc::Io;
}

LinearProblem random_problem(std::mt19937_64& rng, std::size_t n, bool singular) {
    DenseMatrix a = oracle::random_matrix(n, n, rng);
    if (singular) a = mat_mul(oracle::random_matrix(n, n - 1, rng), oracle::random_matrix(n - 1, n, rng));
    return build_problem(std::move(a), oracle::random_vector(n, rng));
}

DenseVector oracle_state(const NeuralModel& m, const DenseVector& x0, double t) {
    const DenseVector ref = flow_reference_point(m.problem);
    return add(ref, closed_form_error(m, sub(x0, ref), t));
}

}  // namespace

TEST_CASE("prefactorize") {
    const LinearProblem sing = build_problem(kAs, DenseVector{1, 1, 1});
    CHECK(prefactorize(build_model(ModelKind::IGNN, sing, 1000.0)).mass_is_spd());
    CHECK(prefactorize(build_model(ModelKind::GNN, sing, 1000.0)).mass_is_spd());
    for (ModelKind k : {ModelKind::ZNN, ModelKind::IZNN}) {
        try {
            prefactorize(build_model(k, sing, 1000.0));
            FAIL("expected DaeNotIntegrable");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::DaeNotIntegrable);
            CHECK(std::string(e.what()).find("DAE") != std::string::npos);
        }
    }
    // Non-symmetric mass falls back to LU.
    std::mt19937_64 rng(1);
    const LinearProblem p = random_problem(rng, 4, false);
    const SolvableModel z = prefactorize(build_model(ModelKind::ZNN, p, 1.0));
    CHECK_FALSE(z.mass_is_spd());
    const DenseVector r = oracle::random_vector(4, rng);
    CHECK(norm2(sub(mat_vec(p.a, z.apply_mass_inverse(r)), r)) <= 1e-10 * (1.0 + norm2(r)));
}

TEST_CASE("auto_step_size examples") {
    const LinearProblem id = build_problem(DenseMatrix::identity(3), DenseVector{1, 1, 1});
    CHECK(spectral_radius_estimate(build_model(ModelKind::IGNN, id, 1000.0)) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(auto_step_size(build_model(ModelKind::IGNN, id, 1000.0)) == doctest::Approx(2.78e-3).epsilon(1e-8));
    CHECK(auto_step_size(build_model(ModelKind::GNN, id, 1000.0)) == doctest::Approx(1.39e-3).epsilon(1e-8));

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const LinearProblem p = random_problem(rng, 2 + trial % 4, false);
        for (ModelKind k : kAllModelKinds) {
            const double h1 = auto_step_size(build_model(k, p, 1000.0));
            const double h2 = auto_step_size(build_model(k, p, 2000.0));
            if (h1 < kMaxStep && h2 > kMinStep) CHECK(h2 == doctest::Approx(h1 / 2.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("spectral radius estimate and the stability margin of the auto step") {
    // Clustered spectra slow the fixed 50-iteration power method, so the
    // estimate may undershoot slightly. It must never overshoot, and the auto
    // step must keep gamma * h * rho inside the RK4 interval.
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const LinearProblem p = random_problem(rng, 2 + trial % 5, trial % 2 == 1);
        const double lmax = sym_eigen(gram(p.a)).eigenvalues.back();
        const std::pair<ModelKind, double> cases[] = {{ModelKind::GNN, lmax}, {ModelKind::IGNN, lmax / (1.0 + lmax)}};
        for (const auto& [kind, rho] : cases) {
            const NeuralModel m = build_model(kind, p, 1000.0);
            const double est = spectral_radius_estimate(m);
            CHECK(est <= rho * (1.0 + 1e-9));
            CHECK(est >= 0.95 * rho);
            const double h = auto_step_size(m);
            if (h < kMaxStep) CHECK(1000.0 * h * rho <= 0.55 * kRk4StabilityInterval);
        }
    }
}

TEST_CASE("rk4_step on the scalar problem reproduces the Taylor polynomial") {
    const LinearProblem p = build_problem(DenseMatrix{{1.0}}, DenseVector{0.0});
    const SolvableModel s = prefactorize(build_model(ModelKind::IGNN, p, 1000.0));
    for (double h : {1e-5, 1e-4, 1e-3}) {
        const double z = -500.0 * h;
        const double taylor = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
        CHECK(rk4_step(s, DenseVector{1.0}, h)[0] == doctest::Approx(taylor).epsilon(1e-14));
    }
}

TEST_CASE("rk4_step consistency and fixed point") {
    std::mt19937_64 rng(19);
    const LinearProblem p = random_problem(rng, 4, false);
    const SolvableModel s = prefactorize(build_model(ModelKind::IGNN, p, 1000.0));
    const DenseVector x = oracle::random_vector(4, rng);
    const DenseVector v = s.velocity(x);
    double prev = 0.0;
    for (double h : {1e-4, 5e-5, 2.5e-5}) {
        const DenseVector euler = add(x, scaled(v, h));
        const double dev = norm2(sub(rk4_step(s, x, h), euler));
        if (prev > 0.0) CHECK(dev / prev == doctest::Approx(0.25).epsilon(0.05));  // O(h^2)
        prev = dev;
    }
    const DenseVector xs = *p.x_star;
    CHECK(norm2(sub(rk4_step(s, xs, s.stable_step()), xs)) <= 1e-14 * (1.0 + norm2(xs)) * 100);
}

TEST_CASE("rk4_step flags divergence") {
    const LinearProblem p = build_problem(DenseMatrix::identity(2), DenseVector{0, 0});
    const SolvableModel s = prefactorize(build_model(ModelKind::GNN, p, 1000.0));
    CHECK(error_code_of([&] {
              DenseVector x{1, 1};
              for (int i = 0; i < 200; ++i) x = rk4_step(s, x, 0.1);
          }) == Errc::NonFiniteState);
    try {
        integrate(s, DenseVector{1, 1}, IntegrateOptions{.t_end = 5.0, .h = 0.1});
        FAIL("expected NonFiniteState");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NonFiniteState);
        REQUIRE(e.at_time());
        CHECK(*e.at_time() > 0.0);
        CHECK(*e.at_time() <= 5.0);
    }
}

TEST_CASE("integrate identity example") {
    const LinearProblem p = build_problem(DenseMatrix::identity(3), DenseVector{1, 1, 1});
    const SolvableModel s = prefactorize(build_model(ModelKind::IGNN, p, 1000.0));
    const Trajectory t = integrate(s, DenseVector(3), IntegrateOptions{.t_end = 0.01, .h = 1e-5});
    CHECK(t.times.front() == 0.0);
    CHECK(t.times.back() == doctest::Approx(0.01).epsilon(1e-14));
    const double expect = 1.0 - std::exp(-5.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(t.states.back()[i] == doctest::Approx(expect).epsilon(1e-10));
    CHECK(expect == doctest::Approx(0.993262).epsilon(1e-6));
    CHECK(t.meta.gamma == 1000.0);
    CHECK(t.meta.kind == ModelKind::IGNN);
    CHECK(t.size() <= kMaxSamples + 1);
}

TEST_CASE("integrate stride and sampling") {
    const LinearProblem p = build_problem(DenseMatrix::identity(2), DenseVector{1, 1});
    const SolvableModel s = prefactorize(build_model(ModelKind::IGNN, p, 1000.0));
    const Trajectory t = integrate(s, DenseVector(2), IntegrateOptions{.t_end = 0.01, .h = 1e-4, .stride = 7});
    // 100 steps: samples at 0, 7, ..., 98 and the final step 100.
    CHECK(t.size() == 16);
    CHECK(t.meta.stride == 7);
    CHECK(t.times.back() == doctest::Approx(0.01).epsilon(1e-14));
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(t.residuals[i] == doctest::Approx(residual(p, t.states[i])).epsilon(1e-15));

    const Trajectory d = integrate(s, DenseVector(2), IntegrateOptions{.t_end = 1.0, .h = 1e-6});
    CHECK(d.size() <= kMaxSamples + 1);
    CHECK(d.times.back() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(error_code_of([&] { integrate(s, DenseVector(2), IntegrateOptions{.t_end = 0.0}); }) ==
          Errc::InvalidArgument);
    CHECK(error_code_of([&] { integrate(s, DenseVector(3), IntegrateOptions{.t_end = 1.0}); }) ==
          Errc::DimensionMismatch);
}

TEST_CASE("integrate from x_star stays put") {
    std::mt19937_64 rng(5);
    const LinearProblem p = random_problem(rng, 3, false);
    const SolvableModel s = prefactorize(build_model(ModelKind::IGNN, p, 1000.0));
    const Trajectory t = integrate(s, *p.x_star, IntegrateOptions{.t_end = 0.05});
    for (const DenseVector& x : t.states) CHECK(norm2(sub(x, *p.x_star)) <= 1e-12);
}

TEST_CASE("equilibrium preservation over 1e6 steps") {
    const LinearProblem p = build_problem(kAs, DenseVector{0, 1, 1});
    const SolvableModel s = prefactorize(build_model(ModelKind::IGNN, p, 1000.0));
    const DenseVector x0 = least_squares(kAs, p.b).x;
    DenseVector x = x0;
    const double h = s.stable_step() / 10.0;
    for (int i = 0; i < 1000000; ++i) x = rk4_step(s, x, h);
    CHECK(norm2(sub(x, x0)) <= 1e-10);
}

TEST_CASE("closed_form_error examples") {
    const LinearProblem id = build_problem(DenseMatrix::identity(3), DenseVector{1, 1, 1});
    const NeuralModel m = build_model(ModelKind::IGNN, id, 1000.0);
    const DenseVector e0{0.5, -1.0, 2.0};
    CHECK(closed_form_error(m, e0, 0.0) == e0);
    const DenseVector e = closed_form_error(m, e0, 0.002);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(e[i] - e0[i] * std::exp(-1.0)) <= 1e-12);

    const NeuralModel sing = build_model(ModelKind::IGNN, build_problem(kAs, DenseVector{1, 1, 1}), 1000.0);
    const DenseVector nullv = scaled(DenseVector{1, 1, -1}, 1.0 / std::sqrt(3.0));
    const DenseVector f0{0.3, -0.2, 1.1};
    for (double t : {0.0, 0.001, 0.01, 1.0}) {
        const DenseVector f = closed_form_error(sing, f0, t);
        CHECK(dot(f, nullv) == doctest::Approx(dot(f0, nullv)).epsilon(1e-12));
    }

    CHECK(error_code_of([&] { closed_form_error(build_model(ModelKind::ZNN, id, 1.0), e0, 0.1); }) ==
          Errc::UnsupportedKind);
}

TEST_CASE("integrate matches the closed form and is fourth order") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 2 + trial % 4;
        const LinearProblem p = random_problem(rng, n, trial % 2 == 1);
        for (ModelKind k : {ModelKind::IGNN, ModelKind::GNN}) {
            const NeuralModel m = build_model(k, p, 1000.0);
            const SolvableModel s = prefactorize(m);
            const DenseVector x0 = oracle::random_vector(n, rng);
            const double t_end = 5.0 / 1000.0;
            // Coarse enough that truncation error dominates round-off.
            const double h = s.stable_step() / 4.0;
            const DenseVector exact = oracle_state(m, x0, t_end);
            const Trajectory a = integrate(s, x0, IntegrateOptions{.t_end = t_end, .h = h});
            const Trajectory b = integrate(s, x0, IntegrateOptions{.t_end = t_end, .h = h / 2.0});
            const double ea = norm2(sub(a.states.back(), exact));
            const double eb = norm2(sub(b.states.back(), exact));
            if (ea > 1e-11 * norm2(x0)) {
                const double ratio = ea / eb;
                CHECK(ratio >= 12.0);
                CHECK(ratio <= 20.0);
            }
        }
    }
}

TEST_CASE("IGNN residual is non-increasing; last residual not above first") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 2 + trial % 4;
        const LinearProblem p = random_problem(rng, n, trial % 2 == 0);
        for (ModelKind k : {ModelKind::IGNN, ModelKind::GNN}) {
            const SolvableModel s = prefactorize(build_model(k, p, 1000.0));
            const Trajectory t = integrate(s, oracle::random_vector(n, rng), IntegrateOptions{.t_end = 0.02});
            for (double r : t.residuals) CHECK(std::isfinite(r));
            CHECK(t.residuals.back() <= t.residuals.front());
            for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.residuals[i] <= t.residuals[i - 1] + 1e-10);
        }
    }
}

TEST_CASE("integrate is deterministic") {
    std::mt19937_64 rng(3);
    const LinearProblem p = random_problem(rng, 3, false);
    const SolvableModel s = prefactorize(build_model(ModelKind::IGNN, p, 1000.0));
    const DenseVector x0 = oracle::random_vector(3, rng);
    const Trajectory a = integrate(s, x0, IntegrateOptions{.t_end = 0.03});
    const Trajectory b = integrate(s, x0, IntegrateOptions{.t_end = 0.03});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.states[i] == b.states[i]);
}
