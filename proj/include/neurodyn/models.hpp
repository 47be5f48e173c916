#pragma once

// Linear systems A x = b and the four analogue neural dynamics that solve
// them, all written in mass-matrix form
//
//     M x'(t) = -gamma K (A x(t) - b).
//
//   kind   M          K
//   GNN    I          A^T          explicit gradient flow
//   ZNN    A          I            Zhang network
//   IZNN   A          A A^T + I    improved Zhang network
//   IGNN   A^T A + I  A^T          implicit gradient network
//
// A singular mass matrix turns the system into a DAE. Such models can be
// built and inspected but the integrator refuses them.

#include <array>
#include <optional>
#include <string_view>

#include "neurodyn/dense.hpp"

namespace neurodyn {

enum class Solvability { Unique, NoSolution, MultiSolution };
enum class ModelKind { GNN, ZNN, IZNN, IGNN };
enum class DynamicsClass { ODE, DAE };

inline constexpr std::array<ModelKind, 4> kAllModelKinds{ModelKind::GNN, ModelKind::ZNN, ModelKind::IZNN,
                                                         ModelKind::IGNN};

std::string_view to_string(Solvability s);
std::string_view to_string(ModelKind k);
std::string_view to_string(DynamicsClass c);
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct LinearProblem {
    DenseMatrix a;
    DenseVector b;
    Solvability classification = Solvability::Unique;
    std::optional<DenseVector> x_star;  // set iff Unique

    std::size_t dim() const noexcept { return b.dim(); }
};

// Classifies via numerical rank of A and [A|b]; x_star by pivoted
// Gaussian elimination.
LinearProblem build_problem(DenseMatrix a, DenseVector b);

struct NeuralModel {
    ModelKind kind;
    double gamma;
    DenseMatrix mass;
    DenseMatrix gain;
    LinearProblem problem;
    DynamicsClass classification;
};

// Throws NonPositiveGamma for gamma <= 0 (or non-finite).
NeuralModel build_model(ModelKind kind, const LinearProblem& p, double gamma);

// -gamma K (A x - b)
DenseVector rhs(const NeuralModel& m, const DenseVector& x);

// ||A x - b||_2
double residual(const LinearProblem& p, const DenseVector& x);

}  // namespace neurodyn
