#include "neurodyn/models.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace neurodyn {

std::string_view to_string(Solvability s) {
    switch (s) {
        case Solvability::Unique: return "Unique";
        case Solvability::NoSolution: return "NoSolution";
        case Solvability::MultiSolution: return "MultiSolution";
    }
    return "?";
}

std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::GNN: return "GNN";
        case ModelKind::ZNN: return "ZNN";
        case ModelKind::IZNN: return "IZNN";
        case ModelKind::IGNN: return "IGNN";
    }
    return "?";
}

std::string_view to_string(DynamicsClass c) { return c == DynamicsClass::ODE ? "ODE" : "DAE"; }

std::optional<ModelKind> parse_model_kind(std::string_view name) {
    std::string upper(name);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (ModelKind k : kAllModelKinds)
        if (upper == to_string(k)) return k;
    return std::nullopt;
}

LinearProblem build_problem(DenseMatrix a, DenseVector b) {
    if (!a.square()) throw Error(Errc::DimensionMismatch, "build_problem: A must be square");
    if (b.dim() != a.rows()) throw Error(Errc::DimensionMismatch, "build_problem: b.dim must equal A.rows");

    const std::size_t n = a.rows();
    const std::size_t rank_a = rank(a);
    LinearProblem p;
    if (rank_a == n) {
        p.classification = Solvability::Unique;
        p.x_star = solve_dense(a, b);
    } else {
        const std::size_t rank_ab = rank(hstack(a, b));
        p.classification = rank_ab > rank_a ? Solvability::NoSolution : Solvability::MultiSolution;
    }
    p.a = std::move(a);
    p.b = std::move(b);
    return p;
}

NeuralModel build_model(ModelKind kind, const LinearProblem& p, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw Error(Errc::NonPositiveGamma, "build_model: gamma must be positive, got " + std::to_string(gamma));

    const std::size_t n = p.dim();
    DenseMatrix mass;
    DenseMatrix gain;
    switch (kind) {
        case ModelKind::GNN:
            mass = DenseMatrix::identity(n);
            gain = transpose(p.a);
            break;
        case ModelKind::ZNN:
            mass = p.a;
            gain = DenseMatrix::identity(n);
            break;
        case ModelKind::IZNN:
            mass = p.a;
            gain = add_identity(mat_mul(p.a, transpose(p.a)));
            break;
        case ModelKind::IGNN:
            mass = add_identity(gram(p.a));
            gain = transpose(p.a);
            break;
    }
    const DynamicsClass cls = rank(mass) == n ? DynamicsClass::ODE : DynamicsClass::DAE;
    return NeuralModel{kind, gamma, std::move(mass), std::move(gain), p, cls};
}

DenseVector rhs(const NeuralModel& m, const DenseVector& x) {
    const DenseVector err = sub(mat_vec(m.problem.a, x), m.problem.b);
    return scaled(mat_vec(m.gain, err), -m.gamma);
}

double residual(const LinearProblem& p, const DenseVector& x) { return norm2(sub(mat_vec(p.a, x), p.b)); }

}  // namespace neurodyn
