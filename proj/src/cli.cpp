#include "neurodyn/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "neurodyn/io.hpp"

namespace neurodyn::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("NEURODYN_SEED"); env != nullptr && *env != '\0') {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("NEURODYN_SEED is not an unsigned integer: ") + env);
        }
    }
    return 1;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw UsageError("not a number: '" + cell + "'");
        }
    }
    return out;
}

// "a,b;c,d" -> rows
DenseMatrix parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string row;
    while (std::getline(ss, row, ';')) rows.push_back(parse_list(row));
    if (rows.empty()) throw UsageError("--matrix is empty");
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw UsageError("--matrix rows differ in length");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return DenseMatrix(rows.size(), rows.front().size(), std::move(flat));
}

struct ProblemSource {
    std::string path;
    std::string matrix;
    std::string rhs;
    std::string named;
    std::size_t n = 3;
    std::string sigma;

    void attach(CLI::App& app) {
        app.add_option("--problem", path, "Problem JSON file {n, A (row-major), b}");
        app.add_option("--matrix", matrix, "Inline A, rows separated by ';' (e.g. \"1,0;0,1\")");
        app.add_option("--rhs", rhs, "Inline b (e.g. \"1,2\")");
        app.add_option("--named", named, "Built-in problem")
            ->check(CLI::IsMember({"identity", "singular-nosol", "singular-multi", "prescribed"}));
        app.add_option("--n", n, "Dimension for --named identity/prescribed");
        app.add_option("--sigma", sigma, "Singular values for --named prescribed (comma separated)");
    }

    bool given() const { return !path.empty() || !matrix.empty() || !named.empty(); }

    LinearProblem resolve(std::uint64_t seed) const {
        const int sources = int(!path.empty()) + int(!matrix.empty()) + int(!named.empty());
        if (sources != 1) throw UsageError("give exactly one of --problem, --matrix/--rhs, --named");
        if (!path.empty()) return io::read_problem_file(path);
        if (!matrix.empty()) {
            if (rhs.empty()) throw UsageError("--matrix needs --rhs");
            DenseMatrix a = parse_matrix(matrix);
            if (!a.square()) throw UsageError("--matrix must be square");
            std::vector<double> b = parse_list(rhs);
            if (b.size() != a.rows()) throw UsageError("--rhs length must match --matrix");
            return build_problem(std::move(a), DenseVector(std::move(b)));
        }
        if (named == "singular-nosol") return singular_example(SingularCase::NoSolution);
        if (named == "singular-multi") return singular_example(SingularCase::MultiSolution);
        if (named == "identity") {
            std::vector<double> b(n);
            for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<double>(i + 1);
            return build_problem(DenseMatrix::identity(n), DenseVector(std::move(b)));
        }
        std::vector<double> s = sigma.empty() ? Figure1Options{}.sigma : parse_list(sigma);
        return gen_prescribed(s.size(), s, seed);
    }
};

struct RunFlags {
    std::string model = "IGNN";
    double gamma = 1000.0;
    double h = 0.0;
    double t_end_ms = 0.0;
    std::size_t stride = 0;
    std::uint64_t seed = 0;
    std::string x0;
    double threshold = std::exp(-7.0);
    std::string out;

    void attach(CLI::App& app, bool with_model) {
        if (with_model)
            app.add_option("--model", model, "GNN, ZNN, IZNN or IGNN")
                ->check(CLI::IsMember({"GNN", "ZNN", "IZNN", "IGNN"}, CLI::ignore_case));
        app.add_option("--gamma", gamma, "Design parameter gamma (1/s)")->check(CLI::PositiveNumber);
        app.add_option("--h", h, "Step size in seconds (default: auto)")->check(CLI::PositiveNumber);
        app.add_option("--t-end-ms", t_end_ms, "Simulated horizon in ms")->check(CLI::PositiveNumber);
        app.add_option("--stride", stride, "Store every stride-th step")->check(CLI::PositiveNumber);
        app.add_option("--seed", seed, "Seed (default: NEURODYN_SEED or 1)");
    }
};

DenseVector initial_state(const RunFlags& f, std::size_t n) {
    if (f.x0.empty()) return random_initial_states(n, 1, f.seed).front();
    std::vector<double> v = parse_list(f.x0);
    if (v.size() != n) throw UsageError("--x0 length must match the problem dimension");
    return DenseVector(std::move(v));
}

struct Simulation {
    NeuralModel model;
    Trajectory traj;
    LyapunovForm form;
};

// Builds, integrates and annotates one run. DAE and divergence propagate as
// Error.
Simulation simulate(const LinearProblem& p, const RunFlags& f) {
    const ModelKind kind = *parse_model_kind(f.model);
    NeuralModel m = build_model(kind, p, f.gamma);
    const SolvableModel s = prefactorize(m);
    const double t_end = f.t_end_ms > 0.0 ? f.t_end_ms * 1e-3 : suggested_t_end(m);
    Trajectory traj = integrate(s, initial_state(f, p.dim()), {t_end, f.h, f.stride, f.seed});
    const LyapunovForm form = attach_lyapunov(traj, p);
    return {std::move(m), std::move(traj), form};
}

void emit(const std::string& out_path, const Json& j, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        out << text;
    else
        io::write_text(out_path, text);
}

int cmd_solve(const ProblemSource& src, const RunFlags& f, std::ostream& out, std::ostream& err) {
    const LinearProblem p = src.resolve(f.seed);
    Json report;
    report["command"] = "solve";
    report["model"] = f.model;
    report["problem"] = io::problem_json(p);

    int code = kOk;
    try {
        Simulation sim = simulate(p, f);
        RateReport rates = theoretical_rates(p, f.gamma);
        try {
            rates.fitted_rate = fit_decay_rate(sim.traj, resolved_late_window(sim.traj));
        } catch (const Error& e) {
            if (e.code() != Errc::InsufficientData) throw;
        }
        const auto t_conv = convergence_time(sim.traj, f.threshold);
        report["dynamics"] = to_string(sim.model.classification);
        report["h"] = sim.traj.meta.h;
        report["t_end_ms"] = sim.traj.times.back() * 1e3;
        report["x0"] = sim.traj.states.front().vec();
        report["final_state"] = sim.traj.states.back().vec();
        report["residual"] = sim.traj.residuals.back();
        report["threshold"] = f.threshold;
        report["convergence_time_ms"] = t_conv ? Json(*t_conv * 1e3) : Json(nullptr);
        report["rates"] = io::rate_report_json(rates);
        try {
            report["asymptotic_residual"] = asymptotic_residual(sim.traj);
            report["status"] = "settled";
        } catch (const Error& e) {
            if (e.code() != Errc::NotSettled) throw;
            report["asymptotic_residual"] = nullptr;
            report["status"] = "not-settled";
            err << "solve: " << e.what() << "\n";
            code = kNotSettled;
        }
    } catch (const Error& e) {
        if (e.code() == Errc::DaeNotIntegrable) {
            err << "solve: " << e.what() << "\n";
            return kDae;
        }
        if (e.code() != Errc::NonFiniteState) throw;
        report["status"] = "diverged";
        report["divergence_time_ms"] = e.at_time() ? Json(*e.at_time() * 1e3) : Json(nullptr);
        err << "solve: " << e.what() << "\n";
        code = kNotSettled;
    }
    emit(f.out, report, out);
    return code;
}

int cmd_simulate(const ProblemSource& src, const RunFlags& f, std::ostream& out, std::ostream& err) {
    const LinearProblem p = src.resolve(f.seed);
    try {
        const Simulation sim = simulate(p, f);
        const std::string csv = io::trajectory_csv(sim.traj);
        const Json meta = io::trajectory_meta_json(sim.traj, sim.model, sim.form);
        if (f.out.empty()) {
            out << csv;
        } else {
            io::write_text(f.out, csv);
            io::write_text(f.out + ".meta.json", meta.dump(2) + "\n");
        }
        return kOk;
    } catch (const Error& e) {
        if (e.code() == Errc::DaeNotIntegrable) {
            err << "simulate: " << e.what() << "\n";
            return kDae;
        }
        if (e.code() == Errc::NonFiniteState) {
            err << "simulate: " << e.what() << "\n";
            return kNotSettled;
        }
        throw;
    }
}

struct ExperimentFlags {
    std::string name;
    std::size_t inits = 6;
    bool singular = false;
};

int cmd_experiment(const ExperimentFlags& ef, const ProblemSource& src, const RunFlags& f, std::ostream& out,
                   std::ostream& err) {
    ExperimentReport rep;
    if (ef.name == "fig1") {
        Figure1Options o;
        o.gamma = f.gamma;
        o.n_inits = ef.inits;
        o.seed = f.seed;
        if (!src.sigma.empty()) o.sigma = parse_list(src.sigma);
        if (f.t_end_ms > 0.0) o.t_end = f.t_end_ms * 1e-3;
        o.h = f.h;
        o.stride = f.stride;
        rep = run_figure1(o);
    } else if (ef.name == "fig2-nosol" || ef.name == "fig2-multi") {
        Figure2Options o;
        o.which = ef.name == "fig2-nosol" ? SingularCase::NoSolution : SingularCase::MultiSolution;
        o.gamma = f.gamma;
        o.n_inits = ef.inits;
        o.seed = f.seed;
        if (f.t_end_ms > 0.0) o.t_end = f.t_end_ms * 1e-3;
        o.h = f.h;
        o.stride = f.stride;
        rep = run_figure2(o);
    } else {
        LinearProblem p = src.given()       ? src.resolve(f.seed)
                          : ef.singular     ? singular_example(SingularCase::NoSolution)
                                            : gen_prescribed(3, Figure1Options{}.sigma, f.seed);
        CompareOptions o;
        if (f.t_end_ms > 0.0) o.t_end = f.t_end_ms * 1e-3;
        o.h = f.h;
        o.stride = f.stride;
        o.seed = f.seed;
        o.threshold = f.threshold;
        rep = compare_models(p, f.gamma, initial_state(f, p.dim()), o);
    }

    // Everything is rendered before the first file is touched.
    std::vector<std::pair<fs::path, std::string>> files;
    const fs::path dir = f.out.empty() ? fs::path("out") / ef.name : fs::path(f.out);
    for (const RunSummary& r : rep.runs) {
        if (!r.trajectory) continue;
        const std::string stem = "run_" + std::to_string(r.index);
        files.emplace_back(dir / (stem + ".csv"), io::trajectory_csv(*r.trajectory));
    }
    const Json report = io::experiment_report_json(rep);
    files.emplace_back(dir / "report.json", report.dump(2) + "\n");
    for (const auto& [path, text] : files) io::write_text(path, text);

    out << rep.scenario << ": " << rep.runs.size() << " runs, report " << (dir / "report.json").string() << "\n";
    for (const auto& [flag, ok] : rep.flags) out << "  " << flag << " = " << (ok ? "true" : "false") << "\n";
    if (!rep.all_ok()) {
        err << "experiment " << ef.name << ": some expectations failed\n";
        return kNotSettled;
    }
    return kOk;
}

int cmd_rates(const ProblemSource& src, const RunFlags& f, std::ostream& out) {
    const LinearProblem p = src.resolve(f.seed);
    Json j = io::rate_report_json(theoretical_rates(p, f.gamma));
    j["classification"] = to_string(p.classification);
    emit(f.out, j, out);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analogue neural dynamics for linear equations A x = b", "neurodyn"};
    app.require_subcommand(1);
    // --h is the step size; help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");

    ProblemSource src;
    RunFlags f;
    ExperimentFlags ef;
    f.seed = 0;

    auto* solve = app.add_subcommand("solve", "Simulate one model until it settles and write a JSON summary");
    src.attach(*solve);
    f.attach(*solve, true);
    solve->add_option("--x0", f.x0, "Initial state (default: seeded uniform in [-2,2]^n)");
    solve->add_option("--threshold", f.threshold, "Residual threshold for convergence time")
        ->check(CLI::PositiveNumber);
    solve->add_option("--out", f.out, "Report path (default: stdout)");

    auto* sim = app.add_subcommand("simulate", "Write a trajectory CSV plus <out>.meta.json");
    src.attach(*sim);
    f.attach(*sim, true);
    sim->add_option("--x0", f.x0, "Initial state (default: seeded uniform in [-2,2]^n)");
    sim->add_option("--out", f.out, "CSV path (default: stdout, no metadata)");

    auto* exp = app.add_subcommand("experiment", "Run a scripted scenario");
    exp->add_option("name", ef.name, "fig1, fig2-nosol, fig2-multi or compare")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2-nosol", "fig2-multi", "compare"}));
    src.attach(*exp);
    f.attach(*exp, false);
    exp->add_option("--inits", ef.inits, "Number of initial states")->check(CLI::PositiveNumber);
    exp->add_flag("--singular", ef.singular, "compare: use the singular 3x3 example");
    exp->add_option("--x0", f.x0, "compare: initial state");
    exp->add_option("--out", f.out, "Output directory (default: out/<name>)");

    auto* rates = app.add_subcommand("rates", "Print alpha, beta and the predicted rates");
    src.attach(*rates);
    rates->add_option("--gamma", f.gamma, "Design parameter gamma (1/s)")->check(CLI::PositiveNumber);
    rates->add_option("--seed", f.seed, "Seed for --named prescribed");
    rates->add_option("--out", f.out, "Report path (default: stdout)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kUsage;
    }

    try {
        const bool seed_given = [&] {
            for (auto* sc : {solve, sim, exp, rates})
                if (sc->parsed() && sc->count("--seed") > 0) return true;
            return false;
        }();
        if (!seed_given) f.seed = default_seed();

        if (solve->parsed()) return cmd_solve(src, f, out, err);
        if (sim->parsed()) return cmd_simulate(src, f, out, err);
        if (exp->parsed()) return cmd_experiment(ef, src, f, out, err);
        return cmd_rates(src, f, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << to_string(e.code()) << ": " << e.what() << "\n";
        return e.code() == Errc::DaeNotIntegrable ? kDae : kFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace neurodyn::cli
