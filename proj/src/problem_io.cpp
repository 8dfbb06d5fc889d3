#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "amix/io.hpp"

namespace amix {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Adds (row, col, value) to the matrix of constraint j (-1 = cost) on
// block b, creating the block term on first use.
void add_entry(SdpProblem<double>& p, long long j, int b, int row, int col, double value) {
  if (j < 0) {
    p.costs[b].add(row, col, value);
    return;
  }
  auto& terms = p.constraints[j].terms;
  auto it = std::find_if(terms.begin(), terms.end(), [b](const auto& t) { return t.block == b; });
  if (it == terms.end()) {
    terms.push_back({b, SymMatrix<double>(p.block_sizes[b])});
    it = terms.end() - 1;
  }
  it->matrix.add(row, col, value);
}

}  // namespace

SdpProblem<double> parse_native(std::istream& in) {
  SdpProblem<double> p;
  std::string raw;
  int lineno = 0;
  bool have_blocks = false, have_constraints = false, have_rhs = false;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("line " + std::to_string(lineno) + ": " + msg);
  };
  auto number = [&](std::istringstream& ss) {
    std::string tok;
    if (!(ss >> tok)) fail("missing value");
    try {
      return ScalarTraits<double>::parse(tok);
    } catch (const std::invalid_argument&) {
      fail("expected number, found '" + tok + "'");
    }
    return 0.0;
  };
  auto integer = [&](std::istringstream& ss) {
    std::string tok;
    if (!(ss >> tok)) fail("missing integer");
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) fail("expected integer, found '" + tok + "'");
    return v;
  };
  auto at_end = [&](std::istringstream& ss) {
    std::string extra;
    if (ss >> extra) fail("unexpected token '" + extra + "'");
  };

  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    std::string head;
    if (!(ss >> head)) continue;
    if (head == "blocks") {
      if (have_blocks) fail("duplicate 'blocks' line");
      auto q = integer(ss);
      if (q < 1) fail("block count must be positive");
      for (long long b = 0; b < q; ++b) {
        auto n = integer(ss);
        if (n < 1) fail("block sizes must be positive");
        p.block_sizes.push_back(int(n));
        p.costs.emplace_back(int(n));
      }
      at_end(ss);
      have_blocks = true;
    } else if (head == "constraints") {
      if (have_constraints) fail("duplicate 'constraints' line");
      auto m = integer(ss);
      auto start = integer(ss);
      if (m < 0) fail("constraint count must be nonnegative");
      at_end(ss);
      p.constraints.resize(std::size_t(m));
      p.ineq_start = int(start);
      have_constraints = true;
    } else if (head == "rhs") {
      if (!have_constraints) fail("'rhs' before 'constraints'");
      if (have_rhs) fail("duplicate 'rhs' line");
      for (int j = 0; j < p.num_constraints(); ++j) p.rhs.push_back(number(ss));
      at_end(ss);
      have_rhs = true;
    } else if (head == "objective") {
      p.orientation.sign = number(ss);
      p.orientation.offset = number(ss);
      at_end(ss);
    } else {
      if (!have_blocks || !have_constraints || !have_rhs) {
        fail("entry before 'blocks', 'constraints' and 'rhs' header lines");
      }
      std::istringstream row_ss(raw);
      auto j = integer(row_ss);
      auto b = integer(row_ss);
      auto r = integer(row_ss);
      auto c = integer(row_ss);
      double v = number(row_ss);
      at_end(row_ss);
      if (j < 0 || j > p.num_constraints()) fail("constraint index out of range");
      if (b < 1 || b > p.num_blocks()) fail("block index out of range");
      if (r < 1 || c < 1 || r > p.block_sizes[b - 1] || c > p.block_sizes[b - 1]) {
        fail("entry outside block " + std::to_string(b));
      }
      add_entry(p, j - 1, int(b - 1), int(r - 1), int(c - 1), v);
    }
  }
  if (!have_blocks) fail("missing 'blocks' line");
  if (!have_constraints) fail("missing 'constraints' line");
  if (!have_rhs) fail("missing 'rhs' line");
  validate(p);
  return p;
}

void write_native(const SdpProblem<double>& p, std::ostream& out) {
  out << "blocks " << p.num_blocks();
  for (int n : p.block_sizes) out << ' ' << n;
  out << "\nconstraints " << p.num_constraints() << ' ' << p.ineq_start << "\nrhs";
  for (double b : p.rhs) out << ' ' << fmt(b);
  out << '\n';
  if (!(p.orientation == ObjectiveOrientation{})) {
    out << "objective " << fmt(p.orientation.sign) << ' ' << fmt(p.orientation.offset) << '\n';
  }
  auto emit = [&out](int j, int b, const SymMatrix<double>& m) {
    for (const auto& e : m.entries()) {
      out << j << ' ' << b + 1 << ' ' << e.row + 1 << ' ' << e.col + 1 << ' ' << fmt(e.value) << '\n';
    }
  };
  for (int b = 0; b < p.num_blocks(); ++b) emit(0, b, p.costs[b]);
  for (int j = 0; j < p.num_constraints(); ++j) {
    for (const auto& t : p.constraints[j].terms) emit(j + 1, t.block, t.matrix);
  }
}

SdpProblem<double> parse_sdpa(std::istream& in) {
  // Header tokens may be separated by commas, braces or parentheses. The two
  // count lines carry only a leading integer; anything after it is a comment.
  std::vector<std::pair<std::string, int>> tokens;
  std::string raw;
  int lineno = 0, content_lines = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '*' || raw[first] == '"') continue;
    if (++content_lines <= 2) {
      std::istringstream ss(raw);
      std::string tok;
      ss >> tok;
      auto digits = tok.find_first_not_of("+-0123456789");
      if (digits != std::string::npos && digits > 0) tok.resize(digits);
      tokens.emplace_back(tok, lineno);
      continue;
    }
    for (char& ch : raw) {
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    }
    std::istringstream ss(raw);
    std::string tok;
    while (ss >> tok) tokens.emplace_back(tok, lineno);
  }
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) -> void {
    int line = pos < tokens.size() ? tokens[pos].second : lineno;
    throw ParseError("sdpa line " + std::to_string(line) + ": " + msg);
  };
  auto integer = [&](const char* what) {
    if (pos >= tokens.size()) fail(std::string("missing ") + what);
    const auto& tok = tokens[pos].first;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) fail(std::string("malformed ") + what + " '" + tok + "'");
    ++pos;
    return v;
  };
  auto number = [&](const char* what) {
    if (pos >= tokens.size()) fail(std::string("missing ") + what);
    const auto& tok = tokens[pos].first;
    double v = 0.0;
    try {
      v = ScalarTraits<double>::parse(tok);
    } catch (const std::invalid_argument&) {
      fail(std::string("malformed ") + what + " '" + tok + "'");
    }
    ++pos;
    return v;
  };

  auto m = integer("constraint count");
  auto nblocks = integer("block count");
  if (m < 0 || nblocks < 1) fail("malformed header");
  // SDPA block -> (first block of ours, is LP)
  std::vector<std::pair<int, bool>> map;
  std::vector<int> sizes;
  for (long long b = 0; b < nblocks; ++b) {
    auto s = integer("block size");
    if (s == 0) fail("block size 0");
    map.emplace_back(int(sizes.size()), s < 0);
    if (s > 0) {
      sizes.push_back(int(s));
    } else {
      for (long long i = 0; i < -s; ++i) sizes.push_back(1);
    }
  }
  auto p = make_problem<double>(sizes);
  p.constraints.resize(std::size_t(m));
  for (long long j = 0; j < m; ++j) p.rhs.push_back(number("objective vector entry"));
  p.ineq_start = int(m) + 1;

  std::vector<bool> seen(std::size_t(m) + 1, false);
  while (pos < tokens.size()) {
    auto j = integer("matrix index");
    auto b = integer("block index");
    auto r = integer("row");
    auto c = integer("column");
    double v = number("value");
    if (j < 0 || j > m) fail("matrix index out of range");
    if (b < 1 || b > nblocks) fail("block index out of range");
    seen[std::size_t(j)] = true;
    auto [first, lp] = map[std::size_t(b - 1)];
    int block = first, row = int(r - 1), col = int(c - 1);
    if (lp) {
      if (r != c) fail("off-diagonal entry in an LP block");
      int width = (std::size_t(b) < map.size() ? map[std::size_t(b)].first : int(sizes.size())) - first;
      if (r < 1 || r > width) fail("entry outside LP block");
      block = first + int(r - 1);
      row = col = 0;
    } else if (r < 1 || c < 1 || r > sizes[first] || c > sizes[first]) {
      fail("entry outside block");
    }
    if (v == 0.0) continue;
    add_entry(p, j - 1, block, row, col, v);
  }
  for (long long j = 1; j <= m; ++j) {
    if (!seen[std::size_t(j)]) {
      throw ParseError("sdpa: header declares " + std::to_string(m) +
                       " constraints but constraint " + std::to_string(j) + " has no data");
    }
  }
  validate(p);
  return p;
}

SdpProblem<double> load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open problem file " + path.string());
  auto name = path.filename().string();
  auto ends_with = [&name](const std::string& suf) {
    return name.size() >= suf.size() && name.compare(name.size() - suf.size(), suf.size(), suf) == 0;
  };
  try {
    if (ends_with(".dat-s") || ends_with(".sdpa")) return parse_sdpa(in);
    return parse_native(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_problem(const SdpProblem<double>& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  write_native(p, out);
  if (!out) throw std::invalid_argument("write failed for " + path.string());
}

}  // namespace amix
