#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace ppf {

struct GraphParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphEdge {
  int i = 0;  // 1-based
  int j = 0;
  double w = 1.0;
};

struct GraphFile {
  int n = 0;
  int m = 0;
  std::vector<GraphEdge> edges;
};

// Format: first non-comment line "n m"; then m lines "i j [w]" with 1-based
// indices, default weight 1.  Comment lines start with '#' or '%'.
inline GraphFile parse_graph(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  GraphFile gf;
  bool have_header = false;
  std::set<std::pair<int, int>> seen;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#' || line[first] == '%') continue;
    std::istringstream ls(line);
    if (!have_header) {
      if (!(ls >> gf.n >> gf.m) || gf.n <= 0 || gf.m < 0)
        throw GraphParseError("line " + std::to_string(line_no) +
                              ": expected header 'n m'");
      std::string rest;
      if (ls >> rest)
        throw GraphParseError("line " + std::to_string(line_no) +
                              ": trailing tokens after header");
      have_header = true;
      continue;
    }
    GraphEdge e;
    if (!(ls >> e.i >> e.j))
      throw GraphParseError("line " + std::to_string(line_no) + ": expected 'i j [w]'");
    if (!(ls >> e.w)) e.w = 1.0;
    std::string rest;
    if (ls >> rest)
      throw GraphParseError("line " + std::to_string(line_no) + ": trailing tokens");
    if (e.i < 1 || e.i > gf.n || e.j < 1 || e.j > gf.n)
      throw GraphParseError("line " + std::to_string(line_no) +
                            ": node index out of range");
    if (e.i == e.j)
      throw GraphParseError("line " + std::to_string(line_no) + ": self-loop");
    const auto key = std::minmax(e.i, e.j);
    if (!seen.insert(key).second)
      throw GraphParseError("line " + std::to_string(line_no) + ": duplicate edge");
    gf.edges.push_back(e);
  }
  if (!have_header) throw GraphParseError("missing header line 'n m'");
  if (static_cast<int>(gf.edges.size()) != gf.m)
    throw GraphParseError("edge count mismatch: header says " + std::to_string(gf.m) +
                          ", found " + std::to_string(gf.edges.size()));
  return gf;
}

// L = D - W with degrees taken as row sums, so rows sum to zero exactly.
inline Eigen::MatrixXd laplacian(const GraphFile& gf) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(gf.n, gf.n);
  for (const GraphEdge& e : gf.edges) {
    const int i = e.i - 1, j = e.j - 1;
    L(i, j) -= e.w;
    L(j, i) -= e.w;
    L(i, i) += e.w;
    L(j, j) += e.w;
  }
  return L;
}

}  // namespace ppf
