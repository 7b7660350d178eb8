#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "Highs.h"
#include "sse/errors.hpp"
#include "sse/game.hpp"

namespace sse {

struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0;

  LinExpr& add(int var, double c) {
    if (c != 0) terms.emplace_back(var, c);
    return *this;
  }
  LinExpr& operator+=(const LinExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
  }
  LinExpr& scale(double k) {
    for (auto& t : terms) t.second *= k;
    constant *= k;
    return *this;
  }
};

enum class Sense { LE, GE, EQ };

enum class MilpStatus { Optimal, Infeasible, TimeLimit, Error };

struct MilpResult {
  MilpStatus status = MilpStatus::Error;
  double objective = 0;
  std::vector<double> x;
  bool has_incumbent = false;
};

struct MilpOptions {
  double abs_gap = 1e-6;
  double time_limit = kInf;
  double feas_tol = 1e-9;
};

// Solver-agnostic model: continuous or binary variables, linear rows, linear
// objective. Constants in row expressions are folded into the bounds.
class MilpModel {
 public:
  int add_var(double lb, double ub, bool binary = false, std::string name = {}) {
    lb_.push_back(binary ? 0.0 : lb);
    ub_.push_back(binary ? 1.0 : ub);
    bin_.push_back(binary);
    if (name.empty()) name = (binary ? "b" : "x") + std::to_string(lb_.size() - 1);
    names_.push_back(std::move(name));
    return int(lb_.size()) - 1;
  }

  void add_row(const LinExpr& e, Sense s, double rhs) {
    Row r;
    r.terms = e.terms;
    double b = rhs - e.constant;
    r.lo = s == Sense::LE ? -kInf : b;
    r.hi = s == Sense::GE ? kInf : b;
    for (auto& [v, c] : r.terms)
      if (v < 0 || v >= num_vars()) throw DomainError("MilpModel: row references undeclared variable");
    // the matrix API wants each column at most once per row
    std::sort(r.terms.begin(), r.terms.end());
    std::size_t n = 0;
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
      if (n && r.terms[n - 1].first == r.terms[i].first)
        r.terms[n - 1].second += r.terms[i].second;
      else
        r.terms[n++] = r.terms[i];
    }
    r.terms.resize(n);
    std::erase_if(r.terms, [](const auto& t) { return t.second == 0; });
    rows_.push_back(std::move(r));
  }

  void set_objective(const LinExpr& e, bool maximize) {
    obj_ = e;
    maximize_ = maximize;
  }

  int num_vars() const { return int(lb_.size()); }
  int num_rows() const { return int(rows_.size()); }
  int num_binaries() const {
    int n = 0;
    for (bool b : bin_) n += b;
    return n;
  }
  bool is_binary(int v) const { return bin_[v]; }

  // Industry-standard LP text format.
  std::string to_lp() const {
    std::ostringstream os;
    os.precision(17);
    auto term_list = [&](const std::vector<std::pair<int, double>>& t) {
      if (t.empty()) {
        if (!names_.empty()) os << " 0 " << names_[0];
        return;
      }
      for (auto& [v, c] : t) os << (c < 0 ? " - " : " + ") << std::abs(c) << ' ' << names_[v];
    };
    os << (maximize_ ? "Maximize\n obj:" : "Minimize\n obj:");
    term_list(obj_.terms);
    os << "\nSubject To\n";
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Row& r = rows_[i];
      auto emit = [&](const char* tag, const char* op, double b) {
        os << " r" << i << tag << ':';
        term_list(r.terms);
        os << ' ' << op << ' ' << b << '\n';
      };
      if (r.lo == r.hi)
        emit("", "=", r.lo);
      else {
        if (r.lo > -kInf) emit("_lo", ">=", r.lo);
        if (r.hi < kInf) emit("_hi", "<=", r.hi);
      }
    }
    os << "Bounds\n";
    for (int v = 0; v < num_vars(); ++v) {
      if (bin_[v]) continue;
      os << ' ';
      if (lb_[v] == -kInf) os << "-inf"; else os << lb_[v];
      os << " <= " << names_[v] << " <= ";
      if (ub_[v] == kInf) os << "+inf"; else os << ub_[v];
      os << '\n';
    }
    if (num_binaries()) {
      os << "Binaries\n";
      for (int v = 0; v < num_vars(); ++v)
        if (bin_[v]) os << ' ' << names_[v] << '\n';
    }
    os << "End\n";
    return os.str();
  }

  MilpResult solve(const MilpOptions& opt = {}) const;

 private:
  friend class HighsBackend;
  struct Row {
    std::vector<std::pair<int, double>> terms;
    double lo, hi;
  };
  std::vector<double> lb_, ub_;
  std::vector<bool> bin_;
  std::vector<std::string> names_;
  std::vector<Row> rows_;
  LinExpr obj_;
  bool maximize_ = true;
};

class HighsBackend {
 public:
  static MilpResult solve(const MilpModel& m, const MilpOptions& opt) {
    HighsLp lp;
    lp.num_col_ = m.num_vars();
    lp.num_row_ = m.num_rows();
    lp.col_cost_.assign(lp.num_col_, 0.0);
    for (auto& [v, c] : m.obj_.terms) lp.col_cost_[v] += c;
    lp.offset_ = m.obj_.constant;
    lp.sense_ = m.maximize_ ? ObjSense::kMaximize : ObjSense::kMinimize;
    lp.col_lower_ = m.lb_;
    lp.col_upper_ = m.ub_;
    for (auto& x : lp.col_lower_) if (x == -kInf) x = -kHighsInf;
    for (auto& x : lp.col_upper_) if (x == kInf) x = kHighsInf;
    lp.row_lower_.reserve(lp.num_row_);
    lp.row_upper_.reserve(lp.num_row_);
    auto& A = lp.a_matrix_;
    A.format_ = MatrixFormat::kRowwise;
    A.num_col_ = lp.num_col_;
    A.num_row_ = lp.num_row_;
    A.start_.assign(1, 0);
    for (const auto& r : m.rows_) {
      lp.row_lower_.push_back(r.lo == -kInf ? -kHighsInf : r.lo);
      lp.row_upper_.push_back(r.hi == kInf ? kHighsInf : r.hi);
      for (auto& [v, c] : r.terms) {
        A.index_.push_back(v);
        A.value_.push_back(c);
      }
      A.start_.push_back(HighsInt(A.index_.size()));
    }
    bool mip = m.num_binaries() > 0;
    if (mip) {
      lp.integrality_.assign(lp.num_col_, HighsVarType::kContinuous);
      for (int v = 0; v < lp.num_col_; ++v)
        if (m.bin_[v]) lp.integrality_[v] = HighsVarType::kInteger;
    }

    Highs h;
    h.setOptionValue("output_flag", false);
    h.setOptionValue("threads", 1);
    h.setOptionValue("random_seed", 0);
    h.setOptionValue("mip_abs_gap", opt.abs_gap);
    h.setOptionValue("mip_rel_gap", 0.0);
    h.setOptionValue("mip_feasibility_tolerance", opt.feas_tol);
    h.setOptionValue("primal_feasibility_tolerance", opt.feas_tol);
    h.setOptionValue("dual_feasibility_tolerance", opt.feas_tol);
    if (opt.time_limit < kInf) h.setOptionValue("time_limit", opt.time_limit);
    MilpResult res;
    if (h.passModel(lp) == HighsStatus::kError) throw DomainError("MILP backend rejected the model");
    h.run();
    HighsModelStatus st = h.getModelStatus();
    const auto& sol = h.getSolution();
    res.has_incumbent = sol.value_valid;
    if (sol.value_valid) {
      res.x = sol.col_value;
      res.objective = h.getInfo().objective_function_value;
    }
    switch (st) {
      case HighsModelStatus::kOptimal: res.status = MilpStatus::Optimal; break;
      case HighsModelStatus::kInfeasible: res.status = MilpStatus::Infeasible; break;
      case HighsModelStatus::kTimeLimit:
      case HighsModelStatus::kIterationLimit: res.status = MilpStatus::TimeLimit; break;
      default: res.status = MilpStatus::Error;
    }
    return res;
  }
};

// Backend is picked by SSE_MILP_BACKEND (only "highs" ships). When
// SSE_LP_DUMP is set, every model is also written to that path prefix.
inline MilpResult MilpModel::solve(const MilpOptions& opt) const {
  const char* be = std::getenv("SSE_MILP_BACKEND");
  if (be && std::string(be) != "highs") throw DomainError(std::string("unknown MILP backend '") + be + "'");
  if (const char* dump = std::getenv("SSE_LP_DUMP")) {
    static int counter = 0;
    std::ofstream(std::string(dump) + std::to_string(counter++) + ".lp") << to_lp();
  }
  return HighsBackend::solve(*this, opt);
}

// Upper bound on any gap between accumulated values.
inline double big_m(const Game& g) {
  double m = g.m();
  if (g.gamma == 1.0) return 2 * m * g.horizon + 1;
  return 2 * m * (1 - std::pow(g.gamma, g.horizon)) / (1 - g.gamma) + 1;
}

}  // namespace sse
