#include "neurodyn/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace neurodyn::io {
namespace {

[[noreturn]] void io_error(const std::string& what) { throw Error(Errc::Io, what); }

std::vector<double> numbers(const Json& node, const char* field) {
    if (!node.is_array()) io_error(std::string("problem: '") + field + "' must be an array");
    std::vector<double> out;
    for (const Json& v : node) {
        if (v.is_array()) {
            for (const Json& w : v) {
                if (!w.is_number()) io_error(std::string("problem: non-numeric entry in '") + field + "'");
                out.push_back(w.get<double>());
            }
        } else if (v.is_number()) {
            out.push_back(v.get<double>());
        } else {
            io_error(std::string("problem: non-numeric entry in '") + field + "'");
        }
    }
    return out;
}

Json vector_json(const DenseVector& v) { return Json(v.vec()); }

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

double parse_number(std::string_view cell) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        io_error("trajectory csv: bad number '" + std::string(cell) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

LinearProblem parse_problem_json(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        io_error(std::string("problem: invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("A") || !j.contains("b")) io_error("problem: expected fields 'A' and 'b'");
    std::vector<double> a = numbers(j["A"], "A");
    std::vector<double> b = numbers(j["b"], "b");
    const std::size_t n = j.contains("n") ? j["n"].get<std::size_t>() : b.size();
    if (b.size() != n) io_error("problem: 'b' must have n entries");
    if (a.size() != n * n) io_error("problem: 'A' must have n*n entries");
    return build_problem(DenseMatrix(n, n, std::move(a)), DenseVector(std::move(b)));
}

LinearProblem read_problem_file(const std::filesystem::path& path) { return parse_problem_json(read_text(path)); }

Json problem_json(const LinearProblem& p) {
    Json j;
    j["n"] = p.dim();
    j["A"] = std::vector<double>(p.a.values().begin(), p.a.values().end());
    j["b"] = vector_json(p.b);
    j["classification"] = to_string(p.classification);
    j["x_star"] = p.x_star ? vector_json(*p.x_star) : Json(nullptr);
    return j;
}

std::string trajectory_csv(const Trajectory& traj) {
    if (!traj.lyapunov || traj.lyapunov->size() != traj.size())
        throw Error(Errc::InvalidArgument, "trajectory_csv: lyapunov values missing");
    const std::size_t n = traj.states.empty() ? 0 : traj.states.front().dim();
    std::string out = "t_ms,residual,lyapunov";
    for (std::size_t i = 0; i < n; ++i) out += ",x_" + std::to_string(i);
    out += '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out += format_double(traj.times[k] * 1e3);
        out += ',';
        out += format_double(traj.residuals[k]);
        out += ',';
        out += format_double((*traj.lyapunov)[k]);
        for (double v : traj.states[k].values()) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

CsvTrajectory parse_trajectory_csv(std::string_view text) {
    CsvTrajectory out;
    std::size_t pos = 0;
    bool header = true;
    std::size_t n = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (header) {
            if (cells.size() < 3 || cells[0] != "t_ms" || cells[1] != "residual" || cells[2] != "lyapunov")
                io_error("trajectory csv: unexpected header");
            n = cells.size() - 3;
            for (std::size_t i = 0; i < n; ++i)
                if (cells[3 + i] != "x_" + std::to_string(i)) io_error("trajectory csv: unexpected state column");
            header = false;
            continue;
        }
        if (cells.size() != n + 3) io_error("trajectory csv: row has wrong column count");
        out.t_ms.push_back(parse_number(cells[0]));
        out.residual.push_back(parse_number(cells[1]));
        out.lyapunov.push_back(parse_number(cells[2]));
        DenseVector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = parse_number(cells[3 + i]);
        out.states.push_back(std::move(x));
    }
    if (header) io_error("trajectory csv: missing header");
    return out;
}

Json rate_report_json(const RateReport& r) {
    Json j;
    j["gamma"] = r.gamma;
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
    j["guaranteed_rate"] = r.guaranteed_rate;
    j["modal_rate"] = r.modal_rate;
    j["fitted_rate"] = optional_json(r.fitted_rate);
    return j;
}

Json trajectory_meta_json(const Trajectory& traj, const NeuralModel& m, LyapunovForm form) {
    Json j;
    j["model"] = to_string(m.kind);
    j["dynamics"] = to_string(m.classification);
    j["problem_classification"] = to_string(m.problem.classification);
    j["gamma"] = traj.meta.gamma;
    j["h"] = traj.meta.h;
    j["stride"] = traj.meta.stride;
    j["seed"] = traj.meta.seed;
    j["samples"] = traj.size();
    j["t_end_ms"] = traj.times.empty() ? 0.0 : traj.times.back() * 1e3;
    j["lyapunov_form"] = to_string(form);
    return j;
}

Json run_summary_json(const RunSummary& r) {
    auto ms = [](const std::optional<double>& s) { return s ? Json(*s * 1e3) : Json(nullptr); };
    Json j;
    j["index"] = r.index;
    j["model"] = to_string(r.kind);
    j["dynamics"] = to_string(r.dynamics);
    j["integrated"] = r.integrated;
    if (!r.note.empty()) j["note"] = r.note;
    j["x0"] = vector_json(r.x0);
    j["final_state"] = vector_json(r.final_state);
    j["initial_residual"] = r.initial_residual;
    j["final_residual"] = r.final_residual;
    j["final_error"] = optional_json(r.final_error);
    j["fitted_rate"] = optional_json(r.fitted_rate);
    j["convergence_time_ms"] = ms(r.convergence_time);
    j["predicted_time_ms"] = ms(r.predicted_time);
    j["asymptotic_residual"] = optional_json(r.asymptotic_residual);
    j["residual_monotone"] = r.residual_monotone;
    j["lyapunov_monotone"] = r.lyapunov_monotone;
    j["converged"] = r.converged;
    return j;
}

Json experiment_report_json(const ExperimentReport& rep) {
    Json j;
    j["scenario"] = rep.scenario;
    j["seed"] = rep.seed;
    j["gamma"] = rep.gamma;
    j["h"] = rep.h;
    j["threshold"] = rep.threshold;
    j["problem"] = problem_json(rep.problem);
    j["rates"] = rate_report_json(rep.rates);
    j["min_residual"] = optional_json(rep.min_residual);
    if (rep.scenario == "fig1") {
        j["reported_rate"] = kReportedRate;
        j["reported_time_ms"] = kReportedTimeMs;
    }
    Json runs = Json::array();
    for (const RunSummary& r : rep.runs) runs.push_back(run_summary_json(r));
    j["runs"] = std::move(runs);
    Json flags = Json::object();
    for (const auto& [k, v] : rep.flags) flags[k] = v;
    j["flags"] = std::move(flags);
    j["all_ok"] = rep.all_ok();
    return j;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) io_error("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) io_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace neurodyn::io
