#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sse/errors.hpp"

namespace sse {

inline constexpr double kProbTol = 1e-9;
inline constexpr double kRenormTol = 1e-6;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Finite leader-follower general-sum stochastic game. Ids are dense; names are
// metadata. Call finalize() after filling the tensors; the game is immutable
// afterwards.
struct Game {
  std::vector<std::string> states;
  std::vector<std::string> leader_actions;
  std::vector<std::string> follower_actions;
  int initial_state = 0;
  double gamma = 1.0;
  int horizon = 1;
  nlohmann::json metadata = nlohmann::json::object();

  // Dense [s][aL][aF][s'] tensors.
  std::vector<double> P, RL, RF;

  int nS() const { return static_cast<int>(states.size()); }
  int nAL() const { return static_cast<int>(leader_actions.size()); }
  int nAF() const { return static_cast<int>(follower_actions.size()); }

  void resize() {
    std::size_t n = std::size_t(nS()) * nAL() * nAF() * nS();
    P.assign(n, 0.0);
    RL.assign(n, 0.0);
    RF.assign(n, 0.0);
  }

  std::size_t idx(int s, int aL, int aF, int s2) const {
    return ((std::size_t(s) * nAL() + aL) * nAF() + aF) * nS() + s2;
  }
  double p(int s, int aL, int aF, int s2) const { return P[idx(s, aL, aF, s2)]; }
  double rL(int s, int aL, int aF, int s2) const { return RL[idx(s, aL, aF, s2)]; }
  double rF(int s, int aL, int aF, int s2) const { return RF[idx(s, aL, aF, s2)]; }
  double r(int player, int s, int aL, int aF, int s2) const {
    return player == 0 ? rL(s, aL, aF, s2) : rF(s, aL, aF, s2);
  }

  void set_p(int s, int aL, int aF, int s2, double v) { P[idx(s, aL, aF, s2)] = v; }
  void set_r(int s, int aL, int aF, int s2, double l, double f) {
    RL[idx(s, aL, aF, s2)] = l;
    RF[idx(s, aL, aF, s2)] = f;
  }

  // Largest one-step reward magnitude.
  double m() const {
    double v = 0;
    for (double x : RL) v = std::max(v, std::abs(x));
    for (double x : RF) v = std::max(v, std::abs(x));
    return v;
  }

  double discount_pow(int t) const { return gamma == 1.0 ? 1.0 : std::pow(gamma, t); }

  struct Succ {
    int s2;
    double p;
  };
  // Sparse successors of (s, aL, aF); valid after finalize().
  const std::vector<Succ>& succ(int s, int aL, int aF) const {
    return succ_[(std::size_t(s) * nAL() + aL) * nAF() + aF];
  }

  // Actions that differ in effect at s. Two actions are merged when their
  // transition and reward rows coincide against every opponent action, so
  // histories and decision rules only ever see the smallest representative.
  const std::vector<int>& leader_choices(int s) const { return lchoice_[s]; }
  const std::vector<int>& follower_choices(int s) const { return fchoice_[s]; }
  int canonical_leader(int s, int aL) const { return lcanon_[std::size_t(s) * nAL() + aL]; }
  int canonical_follower(int s, int aF) const { return fcanon_[std::size_t(s) * nAF() + aF]; }

  void finalize() {
    succ_.assign(std::size_t(nS()) * nAL() * nAF(), {});
    for (int s = 0; s < nS(); ++s)
      for (int a = 0; a < nAL(); ++a)
        for (int b = 0; b < nAF(); ++b)
          for (int s2 = 0; s2 < nS(); ++s2)
            if (p(s, a, b, s2) > 0) succ_[(std::size_t(s) * nAL() + a) * nAF() + b].push_back({s2, p(s, a, b, s2)});

    auto same_leader = [&](int s, int a1, int a2) {
      for (int b = 0; b < nAF(); ++b)
        for (int s2 = 0; s2 < nS(); ++s2)
          if (p(s, a1, b, s2) != p(s, a2, b, s2) || rL(s, a1, b, s2) != rL(s, a2, b, s2) ||
              rF(s, a1, b, s2) != rF(s, a2, b, s2))
            return false;
      return true;
    };
    auto same_follower = [&](int s, int b1, int b2) {
      for (int a = 0; a < nAL(); ++a)
        for (int s2 = 0; s2 < nS(); ++s2)
          if (p(s, a, b1, s2) != p(s, a, b2, s2) || rL(s, a, b1, s2) != rL(s, a, b2, s2) ||
              rF(s, a, b1, s2) != rF(s, a, b2, s2))
            return false;
      return true;
    };
    lcanon_.assign(std::size_t(nS()) * nAL(), 0);
    fcanon_.assign(std::size_t(nS()) * nAF(), 0);
    lchoice_.assign(nS(), {});
    fchoice_.assign(nS(), {});
    for (int s = 0; s < nS(); ++s) {
      for (int a = 0; a < nAL(); ++a) {
        int c = a;
        for (int k : lchoice_[s])
          if (same_leader(s, k, a)) { c = k; break; }
        if (c == a) lchoice_[s].push_back(a);
        lcanon_[std::size_t(s) * nAL() + a] = c;
      }
      for (int b = 0; b < nAF(); ++b) {
        int c = b;
        for (int k : fchoice_[s])
          if (same_follower(s, k, b)) { c = k; break; }
        if (c == b) fchoice_[s].push_back(b);
        fcanon_[std::size_t(s) * nAF() + b] = c;
      }
    }
  }

  int state_id(const std::string& n) const { return find(states, n, "state"); }
  int leader_action_id(const std::string& n) const { return find(leader_actions, n, "leader action"); }
  int follower_action_id(const std::string& n) const { return find(follower_actions, n, "follower action"); }

 private:
  static int find(const std::vector<std::string>& v, const std::string& n, const char* what) {
    auto it = std::find(v.begin(), v.end(), n);
    if (it == v.end()) throw ParseError(std::string("unknown ") + what + " '" + n + "'");
    return static_cast<int>(it - v.begin());
  }

  std::vector<std::vector<Succ>> succ_;
  std::vector<int> lcanon_, fcanon_;
  std::vector<std::vector<int>> lchoice_, fchoice_;
};

// Returns human-readable violations; empty iff the game is well formed.
inline std::vector<std::string> validate_game(const Game& g) {
  std::vector<std::string> out;
  if (g.nS() == 0) out.push_back("no states");
  if (g.nAL() == 0) out.push_back("no leader actions");
  if (g.nAF() == 0) out.push_back("no follower actions");
  if (!out.empty()) return out;
  if (g.P.size() != g.idx(g.nS() - 1, g.nAL() - 1, g.nAF() - 1, g.nS() - 1) + 1)
    return {"tensor sizes do not match the declared sets"};
  if (g.initial_state < 0 || g.initial_state >= g.nS()) out.push_back("initial state out of range");
  if (!(g.gamma > 0 && g.gamma <= 1)) out.push_back("discount must lie in (0, 1]");
  if (g.horizon < 1) out.push_back("horizon must be >= 1");
  for (int s = 0; s < g.nS(); ++s)
    for (int a = 0; a < g.nAL(); ++a)
      for (int b = 0; b < g.nAF(); ++b) {
        double sum = 0;
        bool neg = false, bad_r = false;
        for (int s2 = 0; s2 < g.nS(); ++s2) {
          double q = g.p(s, a, b, s2);
          if (q < 0 || !std::isfinite(q)) neg = true;
          sum += q;
          if (!std::isfinite(g.rL(s, a, b, s2)) || !std::isfinite(g.rF(s, a, b, s2))) bad_r = true;
        }
        std::string key = "(" + g.states[s] + ", " + g.leader_actions[a] + ", " + g.follower_actions[b] + ")";
        if (neg) out.push_back("negative or non-finite probability at " + key);
        if (std::abs(sum - 1.0) > kProbTol) {
          std::ostringstream os;
          os << "transition row " << key << " sums to " << sum;
          out.push_back(os.str());
        }
        if (bad_r) out.push_back("non-finite reward at " + key);
      }
  return out;
}

// Smallest l with m * gamma^l / (1 - gamma) <= epsilon, clamped to 1.
inline int truncation_horizon(double gamma, double epsilon, double m) {
  if (!(gamma > 0 && gamma < 1)) throw DomainError("truncation_horizon needs gamma in (0, 1)");
  if (!(epsilon > 0) || !(m > 0)) throw DomainError("truncation_horizon needs epsilon > 0 and m > 0");
  auto tail = [&](long l) { return m * std::pow(gamma, double(l)) / (1 - gamma); };
  double guess = std::ceil(std::log((1 - gamma) * epsilon / m) / std::log(gamma));
  long l = guess < 1 ? 1 : static_cast<long>(guess);
  while (tail(l) > epsilon) ++l;
  while (l > 1 && tail(l - 1) <= epsilon) --l;
  return static_cast<int>(l);
}

// ---------------------------------------------------------------------------
// JSON game format.

inline nlohmann::json game_to_json(const Game& g) {
  nlohmann::json j;
  j["states"] = g.states;
  j["leader_actions"] = g.leader_actions;
  j["follower_actions"] = g.follower_actions;
  j["initial_state"] = g.states[g.initial_state];
  j["gamma"] = g.gamma;
  j["horizon"] = g.horizon;
  auto tr = nlohmann::json::array();
  auto rw = nlohmann::json::array();
  for (int s = 0; s < g.nS(); ++s)
    for (int a = 0; a < g.nAL(); ++a)
      for (int b = 0; b < g.nAF(); ++b) {
        nlohmann::json dist = nlohmann::json::object();
        for (int s2 = 0; s2 < g.nS(); ++s2) {
          if (g.p(s, a, b, s2) > 0) dist[g.states[s2]] = g.p(s, a, b, s2);
          if (g.rL(s, a, b, s2) != 0 || g.rF(s, a, b, s2) != 0)
            rw.push_back({{"s", g.states[s]},
                          {"aL", g.leader_actions[a]},
                          {"aF", g.follower_actions[b]},
                          {"s'", g.states[s2]},
                          {"rL", g.rL(s, a, b, s2)},
                          {"rF", g.rF(s, a, b, s2)}});
        }
        tr.push_back({{"s", g.states[s]}, {"aL", g.leader_actions[a]}, {"aF", g.follower_actions[b]}, {"dist", dist}});
      }
  j["transitions"] = tr;
  j["rewards"] = rw;
  if (!g.metadata.empty()) j["metadata"] = g.metadata;
  return j;
}

inline Game game_from_json(const nlohmann::json& j) {
  Game g;
  try {
    g.states = j.at("states").get<std::vector<std::string>>();
    g.leader_actions = j.at("leader_actions").get<std::vector<std::string>>();
    g.follower_actions = j.at("follower_actions").get<std::vector<std::string>>();
    g.gamma = j.at("gamma").get<double>();
    g.horizon = j.at("horizon").get<int>();
    if (j.contains("metadata")) g.metadata = j["metadata"];
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("game file: ") + e.what());
  }
  if (g.states.empty() || g.leader_actions.empty() || g.follower_actions.empty())
    throw ParseError("game file: empty state or action set");
  g.initial_state = g.state_id(j.at("initial_state").get<std::string>());
  g.resize();

  std::vector<char> seen(std::size_t(g.nS()) * g.nAL() * g.nAF(), 0);
  for (const auto& row : j.at("transitions")) {
    int s = g.state_id(row.at("s")), a = g.leader_action_id(row.at("aL")), b = g.follower_action_id(row.at("aF"));
    std::size_t key = (std::size_t(s) * g.nAL() + a) * g.nAF() + b;
    if (seen[key]) throw ParseError("duplicate transition row for (" + g.states[s] + ", " + g.leader_actions[a] + ", " + g.follower_actions[b] + ")");
    seen[key] = 1;
    double sum = 0;
    for (const auto& [name, q] : row.at("dist").items()) {
      double v = q.get<double>();
      if (v < 0) throw ParseError("negative probability in row for state " + g.states[s]);
      g.set_p(s, a, b, g.state_id(name), v);
      sum += v;
    }
    if (std::abs(sum - 1.0) >= kRenormTol) {
      std::ostringstream os;
      os << "transition row (" << g.states[s] << ", " << g.leader_actions[a] << ", " << g.follower_actions[b]
         << ") sums to " << sum;
      throw ParseError(os.str());
    }
    // Float round-off inside the validation tolerance is kept verbatim so that
    // serialize/parse round-trips exactly.
    if (std::abs(sum - 1.0) > kProbTol)
      for (int s2 = 0; s2 < g.nS(); ++s2) g.set_p(s, a, b, s2, g.p(s, a, b, s2) / sum);
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k]) {
      int b = int(k % g.nAF()), a = int((k / g.nAF()) % g.nAL()), s = int(k / (std::size_t(g.nAF()) * g.nAL()));
      throw ParseError("missing transition row for (" + g.states[s] + ", " + g.leader_actions[a] + ", " + g.follower_actions[b] + ")");
    }
  if (j.contains("rewards"))
    for (const auto& row : j["rewards"]) {
      int s = g.state_id(row.at("s")), a = g.leader_action_id(row.at("aL")), b = g.follower_action_id(row.at("aF"));
      int s2 = g.state_id(row.at("s'"));
      g.set_r(s, a, b, s2, row.value("rL", 0.0), row.value("rF", 0.0));
    }
  g.finalize();
  return g;
}

inline Game load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return game_from_json(j);
}

inline void save_game(const Game& g, const std::string& path) {
  std::ofstream out(path);
  out << game_to_json(g).dump(2) << '\n';
}

}  // namespace sse
