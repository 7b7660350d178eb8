#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sse/errors.hpp"
#include "sse/game.hpp"

namespace sse {

enum class Player { Leader = 0, Follower = 1 };

using HistId = std::int32_t;

// Interned private histories (s0, a0, s1, ..., s_t) of one player. Ids are
// stable for the lifetime of the pool. In Markov mode a history is collapsed to
// (stage, last state): extending it forgets the past, which is how the Markov
// planning variant keeps supports small.
class HistoryPool {
 public:
  explicit HistoryPool(bool markov = false) : markov_(markov) {}

  bool markov() const { return markov_; }
  std::size_t size() const { return nodes_.size(); }

  HistId root(int s) { return intern(-1, -1, s, 0); }

  HistId extend(HistId h, int a, int s2) {
    const Node& n = nodes_.at(h);
    if (markov_) return intern(-1, -1, s2, n.stage + 1);
    return intern(h, a, s2, n.stage + 1);
  }

  int state(HistId h) const { return nodes_[h].state; }
  int stage(HistId h) const { return nodes_[h].stage; }
  HistId parent(HistId h) const { return nodes_[h].parent; }
  int action(HistId h) const { return nodes_[h].action; }

  // Alternating trace s0 a0 s1 ... s_t (Markov pools return just the state).
  std::vector<int> trace(HistId h) const {
    std::vector<int> rev;
    while (h >= 0) {
      rev.push_back(nodes_[h].state);
      if (nodes_[h].parent >= 0) rev.push_back(nodes_[h].action);
      h = nodes_[h].parent;
    }
    return {rev.rbegin(), rev.rend()};
  }

  std::string to_string(HistId h, const Game& g, Player who) const {
    auto tr = trace(h);
    std::string out;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (i) out += ' ';
      if (i % 2 == 0)
        out += g.states[tr[i]];
      else
        out += who == Player::Leader ? g.leader_actions[tr[i]] : g.follower_actions[tr[i]];
    }
    if (markov_) out = "t" + std::to_string(stage(h)) + ":" + out;
    return out;
  }

 private:
  struct Node {
    HistId parent;
    int action, state, stage;
  };

  HistId intern(HistId parent, int a, int s, int stage) {
    // parent < 2^31, action < 2^12, state < 2^20; Markov keys use the stage in
    // place of the parent.
    std::uint64_t hi = parent >= 0 ? std::uint64_t(parent) + 1 : (std::uint64_t(1) << 31) + std::uint64_t(stage);
    std::uint64_t key = (hi << 32) | (std::uint64_t(a + 1) << 20) | std::uint64_t(s);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    HistId id = static_cast<HistId>(nodes_.size());
    nodes_.push_back({parent, a, s, stage});
    index_.emplace(key, id);
    return id;
  }

  bool markov_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, HistId> index_;
};

// The two history pools of one solver run, plus the game they index.
struct HistorySpace {
  const Game* game;
  HistoryPool L, F;

  // markov_leader collapses only the leader's histories; the follower always
  // best-responds with full recall.
  explicit HistorySpace(const Game& g, bool markov_leader = false, bool markov_follower = false)
      : game(&g), L(markov_leader), F(markov_follower) {}

  HistId extend_leader(HistId h, int aL, int s2) { return L.extend(h, game->canonical_leader(L.state(h), aL), s2); }
  HistId extend_follower(HistId h, int aF, int s2) {
    return F.extend(h, game->canonical_follower(F.state(h), aF), s2);
  }
};

}  // namespace sse
