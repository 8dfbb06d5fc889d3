#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amix/precision.hpp"
#include "amix/problem.hpp"
#include "amix/solver.hpp"

namespace amix {

/// Raised for malformed input files; the message carries the line number.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Native problem format (see README):
//
//   # comment
//   blocks q n_1 ... n_q
//   constraints m ineq_start
//   rhs b_1 ... b_m
//   objective sign offset        (optional)
//   j block row col value        (1-based; j = 0 is the cost)
SdpProblem<double> parse_native(std::istream& in);
void write_native(const SdpProblem<double>& p, std::ostream& out);

/// SDPA sparse (.dat-s), read as: minimize <F0, X> s.t. <F_j, X> = c_j.
/// A negative block size -s becomes s blocks of order 1.
SdpProblem<double> parse_sdpa(std::istream& in);

/// Dispatches on the extension: .dat-s / .sdpa are SDPA, anything else native.
SdpProblem<double> load_problem(const std::filesystem::path& path);
void save_problem(const SdpProblem<double>& p, const std::filesystem::path& path);

namespace detail {

/// Whitespace tokenizer that remembers line numbers for diagnostics.
class TokenReader {
 public:
  TokenReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::string next() {
    std::string tok;
    while (!(line_ >> tok)) {
      std::string raw;
      if (!std::getline(in_, raw)) fail("unexpected end of file");
      ++lineno_;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      line_.clear();
      line_.str(raw);
    }
    return tok;
  }

  void expect(const std::string& word) {
    auto tok = next();
    if (tok != word) fail("expected '" + word + "', found '" + tok + "'");
  }

  long long integer() {
    auto tok = next();
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || tok.empty()) fail("expected integer, found '" + tok + "'");
    return v;
  }

  template <class T>
  T scalar() {
    auto tok = next();
    try {
      return ScalarTraits<T>::parse(tok);
    } catch (const std::invalid_argument&) {
      fail("expected number, found '" + tok + "'");
    }
    return T(0.0);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(what_ + " line " + std::to_string(lineno_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::string what_;
  std::istringstream line_;
  int lineno_ = 0;
};

template <class T>
void write_matrix(std::ostream& out, const DenseMatrix<T>& m) {
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) out << (r ? " " : "") << ScalarTraits<T>::format(m(r, c));
    out << '\n';
  }
}

template <class T>
DenseMatrix<T> read_matrix(TokenReader& rd, int rows, int cols) {
  DenseMatrix<T> m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = rd.scalar<T>();
  }
  return m;
}

template <class T>
void write_vector(std::ostream& out, const char* tag, const std::vector<T>& v) {
  out << tag << ' ' << v.size() << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << ScalarTraits<T>::format(v[i]);
  out << '\n';
}

template <class T>
std::vector<T> read_vector(TokenReader& rd, const char* tag) {
  rd.expect(tag);
  auto n = rd.integer();
  if (n < 0) rd.fail("negative length");
  std::vector<T> v;
  for (long long i = 0; i < n; ++i) v.push_back(rd.scalar<T>());
  return v;
}

inline ScalarKind read_kind(TokenReader& rd) {
  rd.expect("precision");
  auto tok = rd.next();
  try {
    return parse_kind(tok);
  } catch (const std::invalid_argument&) {
    rd.fail("unknown precision '" + tok + "'");
  }
}

template <class T>
void check_kind(TokenReader& rd, ScalarKind found) {
  if (found != ScalarTraits<T>::kind) {
    rd.fail("file precision is " + std::string(kind_name(found)) + ", expected " +
            std::string(kind_name(ScalarTraits<T>::kind)));
  }
}

}  // namespace detail

// Solution file:
//
//   amix-solution 1
//   precision double|dd
//   status tol|iter|time|numerical_error
//   iterations N   seconds S
//   objective primal dual
//   errors pinf gap dinf compl compl_star     (absent measures written as -)
//   blocks q
//   factor k n   followed by n columns of k values (one block after another)
//   y m  followed by the m duals
//   z n  followed by the n columns of Z (per block; optional as a whole)
template <class T>
void write_solution(const Solution<T>& s, std::ostream& out) {
  using Tr = ScalarTraits<T>;
  auto opt = [](const std::optional<T>& v) { return v ? Tr::format(*v) : std::string("-"); };
  out << "amix-solution 1\n";
  out << "precision " << kind_name(Tr::kind) << '\n';
  out << "status " << status_name(s.status) << '\n';
  out << "iterations " << s.iterations << " seconds " << s.seconds << '\n';
  out << "objective " << Tr::format(s.primal_objective) << ' ' << Tr::format(s.dual_objective)
      << '\n';
  out << "errors " << Tr::format(s.report.pinf) << ' ' << Tr::format(s.report.gap) << ' '
      << opt(s.report.dinf) << ' ' << opt(s.report.compl_) << ' '
      << Tr::format(s.report.compl_star) << '\n';
  out << "blocks " << s.factors.size() << '\n';
  for (const auto& f : s.factors) {
    out << "factor " << f.rows() << ' ' << f.cols() << '\n';
    detail::write_matrix(out, f);
  }
  detail::write_vector(out, "y", s.y);
  for (const auto& z : s.z) {
    out << "z " << z.cols() << '\n';
    detail::write_matrix(out, z);
  }
}

/// Reads the kind recorded in a solution or warm-start file.
inline ScalarKind peek_kind(std::istream& in) {
  auto pos = in.tellg();
  detail::TokenReader rd(in, "header");
  rd.next();
  rd.next();
  auto kind = detail::read_kind(rd);
  in.clear();
  in.seekg(pos);
  return kind;
}

template <class T>
Solution<T> read_solution(std::istream& in) {
  detail::TokenReader rd(in, "solution");
  rd.expect("amix-solution");
  if (rd.integer() != 1) rd.fail("unsupported version");
  detail::check_kind<T>(rd, detail::read_kind(rd));
  Solution<T> s;
  rd.expect("status");
  try {
    s.status = parse_status(rd.next());
  } catch (const std::invalid_argument& e) {
    rd.fail(e.what());
  }
  rd.expect("iterations");
  s.iterations = rd.integer();
  rd.expect("seconds");
  s.seconds = rd.scalar<double>();
  rd.expect("objective");
  s.primal_objective = rd.scalar<T>();
  s.dual_objective = rd.scalar<T>();
  rd.expect("errors");
  auto opt = [&rd]() -> std::optional<T> {
    auto tok = rd.next();
    if (tok == "-") return std::nullopt;
    try {
      return ScalarTraits<T>::parse(tok);
    } catch (const std::invalid_argument&) {
      rd.fail("expected number, found '" + tok + "'");
    }
  };
  s.report.pinf = rd.scalar<T>();
  s.report.gap = rd.scalar<T>();
  s.report.dinf = opt();
  s.report.compl_ = opt();
  s.report.compl_star = rd.scalar<T>();
  rd.expect("blocks");
  auto q = rd.integer();
  if (q < 1) rd.fail("block count must be positive");
  for (long long b = 0; b < q; ++b) {
    rd.expect("factor");
    auto k = rd.integer(), n = rd.integer();
    if (k < 1 || n < 1) rd.fail("bad factor shape");
    s.factors.push_back(detail::read_matrix<T>(rd, int(k), int(n)));
  }
  s.y = detail::read_vector<T>(rd, "y");
  // Z is optional: stop cleanly at end of input.
  for (long long b = 0; b < q; ++b) {
    std::string tok;
    try {
      tok = rd.next();
    } catch (const ParseError&) {
      if (b == 0) break;
      throw;
    }
    if (tok != "z") rd.fail("expected 'z', found '" + tok + "'");
    auto n = rd.integer();
    if (n != s.factors[b].cols()) rd.fail("z block order does not match the factor");
    s.z.push_back(detail::read_matrix<T>(rd, int(n), int(n)));
  }
  return s;
}

// Warm-start file:
//
//   amix-warm-start 1
//   precision double|dd
//   mu value
//   blocks q
//   factor k n   + columns
//   y_eq m_a + values
//   y_ineq m_b + values
template <class T>
void write_warm_start(const WarmStart<T>& w, std::ostream& out) {
  using Tr = ScalarTraits<T>;
  out << "amix-warm-start 1\n";
  out << "precision " << kind_name(Tr::kind) << '\n';
  out << "mu " << Tr::format(w.mu) << '\n';
  out << "blocks " << w.factors.size() << '\n';
  for (const auto& f : w.factors) {
    out << "factor " << f.rows() << ' ' << f.cols() << '\n';
    detail::write_matrix(out, f);
  }
  detail::write_vector(out, "y_eq", w.y_eq);
  detail::write_vector(out, "y_ineq", w.y_ineq);
}

template <class T>
WarmStart<T> read_warm_start(std::istream& in) {
  detail::TokenReader rd(in, "warm start");
  rd.expect("amix-warm-start");
  if (rd.integer() != 1) rd.fail("unsupported version");
  detail::check_kind<T>(rd, detail::read_kind(rd));
  WarmStart<T> w;
  rd.expect("mu");
  w.mu = rd.scalar<T>();
  rd.expect("blocks");
  auto q = rd.integer();
  if (q < 1) rd.fail("block count must be positive");
  for (long long b = 0; b < q; ++b) {
    rd.expect("factor");
    auto k = rd.integer(), n = rd.integer();
    if (k < 1 || n < 1) rd.fail("bad factor shape");
    w.factors.push_back(detail::read_matrix<T>(rd, int(k), int(n)));
  }
  w.y_eq = detail::read_vector<T>(rd, "y_eq");
  w.y_ineq = detail::read_vector<T>(rd, "y_ineq");
  return w;
}

}  // namespace amix
