#include <doctest.h>

#include <cmath>

#include "neurodyn/experiments.hpp"
#include "oracles.hpp"

using namespace neurodyn;

namespace {

const std::vector<double> kFig1Sigma{std::sqrt(0.2345), 1.0, 2.0};

}  // namespace

TEST_CASE("gen_prescribed") {
    const LinearProblem p = gen_prescribed(3, kFig1Sigma, 1);
    CHECK(p.classification == Solvability::Unique);
    const auto lam = sym_eigen(gram(p.a)).eigenvalues;
    CHECK(lam[0] == doctest::Approx(0.2345).epsilon(1e-9));
    CHECK(lam[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lam[2] == doctest::Approx(4.0).epsilon(1e-9));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK((*p.x_star)[i] >= -2.0 - 1e-9);
        CHECK((*p.x_star)[i] <= 2.0 + 1e-9);
    }

    const LinearProblem orth = gen_prescribed(4, {1, 1, 1, 1}, 5);
    const DenseMatrix g = gram(orth.a);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);

    const LinearProblem again = gen_prescribed(3, kFig1Sigma, 1);
    CHECK(again.a == p.a);
    CHECK(again.b == p.b);
    CHECK_FALSE(gen_prescribed(3, kFig1Sigma, 2).a == p.a);

    CHECK_THROWS_AS(gen_prescribed(3, {1, 2}, 1), Error);
    CHECK_THROWS_AS(gen_prescribed(2, {0, 1}, 1), Error);
}

TEST_CASE("random_orthogonal and random_initial_states") {
    const DenseMatrix q = random_orthogonal(5, 42);
    const DenseMatrix qtq = mat_mul(transpose(q), q);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-13);
    CHECK(random_orthogonal(5, 42) == q);

    const auto xs = random_initial_states(3, 6, 1);
    CHECK(xs.size() == 6);
    for (const DenseVector& x : xs)
        for (double v : x.values()) {
            CHECK(v >= -2.0);
            CHECK(v <= 2.0);
        }
    const auto ys = random_initial_states(3, 6, 1);
    for (std::size_t i = 0; i < 6; ++i) CHECK(xs[i] == ys[i]);
}

TEST_CASE("singular_example") {
    const LinearProblem a = singular_example(SingularCase::NoSolution);
    const LinearProblem b = singular_example(SingularCase::MultiSolution);
    CHECK(a.classification == Solvability::NoSolution);
    CHECK(b.classification == Solvability::MultiSolution);
    CHECK(a.b == DenseVector{1, 1, 1});
    CHECK(b.b == DenseVector{0, 1, 1});
    CHECK(theoretical_rates(a, 1000.0).alpha == 0.0);
    CHECK(theoretical_rates(b, 1000.0).alpha == 0.0);
}

TEST_CASE("run_figure1 at gamma 1000") {
    const ExperimentReport rep = run_figure1(1000.0, 6, 1);
    CHECK(rep.scenario == "fig1");
    REQUIRE(rep.runs.size() == 6);
    CHECK(rep.all_ok());
    for (const RunSummary& r : rep.runs) {
        CHECK(r.residual_monotone);
        CHECK(r.converged);
        CHECK(r.final_residual <= std::exp(-7.0));
        REQUIRE(r.fitted_rate);
        CHECK(*r.fitted_rate == doctest::Approx(189.96).epsilon(0.05));
        REQUIRE(r.trajectory);
        CHECK(r.trajectory->meta.h == rep.h);
        CHECK(r.trajectory->meta.gamma == rep.gamma);
    }
}

TEST_CASE("run_figure1 convergence times halve when gamma doubles") {
    Figure1Options o;
    const ExperimentReport slow = run_figure1(o);
    o.gamma = 2000.0;
    o.t_end = 0.030;
    const ExperimentReport fast = run_figure1(o);
    REQUIRE(slow.runs.size() == fast.runs.size());
    for (std::size_t i = 0; i < slow.runs.size(); ++i) {
        REQUIRE(slow.runs[i].convergence_time);
        REQUIRE(fast.runs[i].convergence_time);
        CHECK(*fast.runs[i].convergence_time == doctest::Approx(*slow.runs[i].convergence_time / 2.0).epsilon(0.10));
    }
}

TEST_CASE("run_figure2") {
    const ExperimentReport nosol = run_figure2(SingularCase::NoSolution, 1000.0, 6, 1);
    CHECK(nosol.flags.at("asymptotic_residual_ok"));
    CHECK(nosol.all_ok());
    for (const RunSummary& r : nosol.runs) {
        REQUIRE(r.asymptotic_residual);
        CHECK(*r.asymptotic_residual == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-3));
        CHECK(r.lyapunov_monotone);
    }

    const ExperimentReport multi = run_figure2(SingularCase::MultiSolution, 1000.0, 6, 1);
    CHECK(multi.all_ok());
    for (const RunSummary& r : multi.runs) {
        REQUIRE(r.asymptotic_residual);
        CHECK(*r.asymptotic_residual <= 1e-6);
        CHECK(norm2(sub(mat_vec(multi.problem.a, r.final_state), multi.problem.b)) <= 1e-6);
        CHECK(r.lyapunov_monotone);
    }
}

TEST_CASE("compare_models") {
    SUBCASE("unique problem: all kinds reach x_star") {
        const LinearProblem p = gen_prescribed(3, kFig1Sigma, 3);
        const ExperimentReport rep = compare_models(p, 1000.0, DenseVector{1.5, -0.5, 0.25});
        REQUIRE(rep.runs.size() == 4);
        CHECK(rep.all_ok());
        for (const RunSummary& r : rep.runs) {
            CHECK(r.integrated);
            CHECK(r.dynamics == DynamicsClass::ODE);
            REQUIRE(r.final_error);
            CHECK(*r.final_error <= 1e-6);
            CHECK(r.convergence_time);
            REQUIRE(r.trajectory);
            CHECK(r.trajectory->meta.h == rep.h);
        }
    }
    SUBCASE("singular example: ZNN and IZNN refused") {
        const ExperimentReport rep = compare_models(singular_example(SingularCase::NoSolution), 1000.0,
                                                    DenseVector{0.5, 0.5, 0.5});
        CHECK(rep.flags.at("dae_kinds_refused"));
        for (const RunSummary& r : rep.runs) {
            const bool dae = r.kind == ModelKind::ZNN || r.kind == ModelKind::IZNN;
            CHECK(r.integrated == !dae);
            CHECK((r.dynamics == DynamicsClass::DAE) == dae);
        }
    }
    SUBCASE("orthogonal A: GNN at gamma, IGNN at gamma / 2") {
        const LinearProblem p = gen_prescribed(3, {1, 1, 1}, 9);
        const ExperimentReport rep = compare_models(p, 1000.0, DenseVector{1, 1, 1});
        for (const RunSummary& r : rep.runs) {
            if (r.kind == ModelKind::GNN) {
                REQUIRE(r.fitted_rate);
                CHECK(*r.fitted_rate == doctest::Approx(1000.0).epsilon(0.01));
            }
            if (r.kind == ModelKind::IGNN) {
                REQUIRE(r.fitted_rate);
                CHECK(*r.fitted_rate == doctest::Approx(500.0).epsilon(0.01));
            }
        }
        CHECK(slowest_modal_rate(build_model(ModelKind::GNN, p, 1000.0)) == doctest::Approx(1000.0).epsilon(1e-9));
        CHECK(slowest_modal_rate(build_model(ModelKind::IGNN, p, 1000.0)) == doctest::Approx(500.0).epsilon(1e-9));
    }
}
