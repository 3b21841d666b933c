// Command-line front end: parse graph/vector inputs, run the path-following
// solver, emit a JSON result and an optional CSV convergence trace.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ppf/graph.hpp"
#include "ppf/oracle.hpp"
#include "ppf/pathfollow.hpp"
#include "ppf/problems.hpp"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitIterationCap = 2;
constexpr int kExitSubsolverFailure = 3;
constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("bad number: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ppf::GraphParseError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* status_name(ppf::SolveStatus s) {
  switch (s) {
    case ppf::SolveStatus::Converged: return "converged";
    case ppf::SolveStatus::IterationCap: return "iteration_cap";
    case ppf::SolveStatus::SubsolverFailure: return "subsolver_failure";
  }
  return "unknown";
}

void write_trace_csv(const std::string& path, const ppf::SolveTrace& trace) {
  std::ofstream out(path);
  out << "k,t,objective,sub_iters,gap_bound,wall_ms\n";
  out.precision(17);
  for (const auto& r : trace.records)
    out << r.k << ',' << r.t << ',' << r.objective << ',' << r.sub_iters << ','
        << r.gap_bound << ',' << r.wall_ms << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal path-following solver for composite conic problems"};
  app.require_subcommand(1);

  auto* cmd = app.add_subcommand("solve", "Solve a problem instance");
  std::string problem_kind, graph_path, c_list, l_list, u_list;
  std::string t0_arg = "auto", x0_arg = "auto", trace_path, out_path;
  int k = 4, max_iters = 100000;
  double eps = 1e-3;
  double beta = -1.0, delta = -1.0;
  bool exact_variant = false, quiet = false;

  cmd->add_option("--problem", problem_kind, "maxcut|maxkcut|boxlp")->required();
  cmd->add_option("--graph", graph_path, "graph file (maxcut/maxkcut)");
  cmd->add_option("--c", c_list, "cost vector, comma separated (boxlp)");
  cmd->add_option("--l", l_list, "lower bounds, comma separated (boxlp)");
  cmd->add_option("--u", u_list, "upper bounds, comma separated (boxlp)");
  cmd->add_option("--k", k, "number of parts (maxkcut)");
  cmd->add_option("--eps", eps, "target accuracy");
  cmd->add_option("--beta", beta, "neighborhood parameter");
  cmd->add_option("--t0", t0_arg, "auto or a positive value");
  cmd->add_option("--x0", x0_arg, "auto or identity");
  cmd->add_flag("--exact-variant", exact_variant, "use exact subproblem solves");
  cmd->add_option("--max-iters", max_iters, "iteration cap");
  cmd->add_option("--delta", delta, "subsolver accuracy override");
  cmd->add_option("--trace", trace_path, "CSV trace output path");
  cmd->add_option("--out", out_path, "JSON result output path");
  cmd->add_flag("--quiet", quiet, "suppress stdout summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    ppf::CompositeProblem problem = [&] {
      if (problem_kind == "maxcut" || problem_kind == "maxkcut") {
        if (graph_path.empty())
          throw CLI::ValidationError("--graph is required for " + problem_kind);
        const ppf::GraphFile gf = ppf::parse_graph(read_file(graph_path));
        const Eigen::MatrixXd L = ppf::laplacian(gf);
        return problem_kind == "maxcut" ? ppf::maxcut(L, true) : ppf::maxkcut(L, k, true);
      }
      if (problem_kind == "boxlp") {
        if (c_list.empty() || l_list.empty() || u_list.empty())
          throw CLI::ValidationError("boxlp requires --c, --l and --u");
        const auto c = parse_list(c_list), l = parse_list(l_list), u = parse_list(u_list);
        if (c.size() != l.size() || c.size() != u.size())
          throw CLI::ValidationError("--c/--l/--u lengths differ");
        const auto map = [](const std::vector<double>& v) {
          return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()).eval();
        };
        return ppf::box_lp(map(c), map(l), map(u));
      }
      throw CLI::ValidationError("unknown --problem: " + problem_kind);
    }();

    ppf::SolverConfig config;
    config.epsilon = eps;
    config.exact_variant = exact_variant;
    config.max_iterations = max_iters;
    if (beta > 0.0) config.beta = beta;
    if (delta > 0.0) config.delta = delta;
    if (t0_arg != "auto") config.t0 = std::stod(t0_arg);
    if (x0_arg == "identity") {
      if (!problem.matrix_dim)
        throw CLI::ValidationError("--x0 identity only applies to matrix problems");
      config.x0 = ppf::pack_sym(Eigen::MatrixXd::Identity(*problem.matrix_dim,
                                                          *problem.matrix_dim));
    } else if (x0_arg != "auto") {
      throw CLI::ValidationError("unknown --x0: " + x0_arg);
    }

    const auto start = std::chrono::steady_clock::now();
    const ppf::SolveResult result = ppf::solve(problem, config);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();

    nlohmann::json j{{"status", status_name(result.trace.status)},
                     {"objective", result.objective},
                     {"iterations", result.trace.records.size()},
                     {"t_final", result.trace.records.empty()
                                     ? result.cert.t0
                                     : result.trace.records.back().t},
                     {"epsilon", config.epsilon},
                     {"beta", result.cert.beta},
                     {"sigma_beta", result.cert.sigma_beta},
                     {"psi", result.cert.psi},
                     {"t0", result.cert.t0},
                     {"wall_ms", wall_ms},
                     {"theoretical_init", result.cert.theoretical_mode},
                     {"preconditions_hold", result.cert.preconditions_hold},
                     {"psi_from_formula", result.cert.psi_from_formula}};
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      out << j.dump(2) << "\n";
    }
    if (!trace_path.empty()) write_trace_csv(trace_path, result.trace);
    if (!quiet) std::cout << j.dump(2) << "\n";

    switch (result.trace.status) {
      case ppf::SolveStatus::Converged: return kExitConverged;
      case ppf::SolveStatus::IterationCap: return kExitIterationCap;
      case ppf::SolveStatus::SubsolverFailure: return kExitSubsolverFailure;
    }
    return kExitConverged;
  } catch (const ppf::GraphParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitParse;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ppf::InitializationError& e) {
    std::cerr << "usage error: " << e.what()
              << " (for SDP problems pass --t0 VALUE and --x0 identity)\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
