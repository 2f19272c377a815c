// Copyright 2026 The ATCC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "atcc/oracle/serialization.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace atcc {

const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::kWw: return "ww";
    case EdgeKind::kWr: return "wr";
    case EdgeKind::kRw: return "rw";
  }
  return "?";
}

namespace {

struct TxnView {
  std::vector<std::pair<Key, Version>> reads;
  std::vector<std::pair<Key, Version>> writes;
  bool committed = false;
};

// Committed transactions in order of first appearance.
std::vector<std::pair<std::uint64_t, TxnView>> committed_txns(const std::vector<HistoryEvent>& history) {
  std::map<std::uint64_t, TxnView> all;
  std::vector<std::uint64_t> order;
  for (const HistoryEvent& e : history) {
    auto [it, fresh] = all.try_emplace(e.txn);
    if (fresh) order.push_back(e.txn);
    switch (e.type) {
      case EventType::kRead: it->second.reads.emplace_back(e.key, e.version); break;
      case EventType::kWrite: it->second.writes.emplace_back(e.key, e.version); break;
      case EventType::kCommit: it->second.committed = true; break;
      default: break;
    }
  }
  std::vector<std::pair<std::uint64_t, TxnView>> out;
  for (std::uint64_t t : order) {
    if (all[t].committed) out.emplace_back(t, std::move(all[t]));
  }
  return out;
}

}  // namespace

SerializationGraph build_graph(const std::vector<HistoryEvent>& history) {
  auto txns = committed_txns(history);
  SerializationGraph g;
  g.nodes.push_back(kInitialTxn);
  // key -> version -> writer
  std::unordered_map<Key, std::map<Version, std::uint64_t>> versions;
  for (const auto& [id, t] : txns) {
    g.nodes.push_back(id);
    for (const auto& [k, v] : t.writes) versions[k][v] = id;
  }
  for (auto& [k, vs] : versions) vs.emplace(0, kInitialTxn);

  std::set<std::tuple<std::uint64_t, std::uint64_t, int, Key>> seen;
  auto add = [&](std::uint64_t from, std::uint64_t to, EdgeKind kind, Key key) {
    if (from == to) return;
    if (seen.emplace(from, to, static_cast<int>(kind), key).second) g.edges.push_back(Edge{from, to, kind, key});
  };

  for (const auto& [k, vs] : versions) {
    for (auto it = vs.begin(); std::next(it) != vs.end(); ++it) add(it->second, std::next(it)->second, EdgeKind::kWw, k);
  }
  for (const auto& [id, t] : txns) {
    for (const auto& [k, v] : t.reads) {
      auto kv = versions.find(k);
      std::uint64_t writer;
      std::map<Version, std::uint64_t>::const_iterator next;
      if (kv == versions.end()) {
        if (v != 0) {
          g.dirty_reads.push_back(DirtyRead{id, k, v});
          continue;
        }
        writer = kInitialTxn;
        add(writer, id, EdgeKind::kWr, k);
        continue;
      }
      auto at = kv->second.find(v);
      if (at == kv->second.end()) {
        g.dirty_reads.push_back(DirtyRead{id, k, v});
        continue;
      }
      writer = at->second;
      add(writer, id, EdgeKind::kWr, k);
      next = std::next(at);
      if (next != kv->second.end()) add(id, next->second, EdgeKind::kRw, k);
    }
  }
  return g;
}

CycleResult check_acyclic(const SerializationGraph& g) {
  std::unordered_map<std::uint64_t, std::size_t> index;
  for (std::uint64_t n : g.nodes) index.emplace(n, index.size());
  for (const Edge& e : g.edges) {
    index.emplace(e.from, index.size());
    index.emplace(e.to, index.size());
  }
  std::vector<std::uint64_t> id(index.size());
  for (const auto& [n, i] : index) id[i] = n;
  std::vector<std::vector<std::size_t>> adj(index.size());
  for (const Edge& e : g.edges) adj[index[e.from]].push_back(index[e.to]);

  enum Color : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<Color> color(index.size(), kWhite);
  std::vector<std::size_t> parent(index.size(), SIZE_MAX);
  CycleResult res;
  for (std::size_t root = 0; root < index.size(); ++root) {
    if (color[root] != kWhite) continue;
    // Iterative DFS: (node, next child position).
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    color[root] = kGrey;
    while (!stack.empty()) {
      auto& [u, pos] = stack.back();
      if (pos < adj[u].size()) {
        std::size_t v = adj[u][pos++];
        if (color[v] == kWhite) {
          color[v] = kGrey;
          parent[v] = u;
          stack.emplace_back(v, 0);
        } else if (color[v] == kGrey) {
          res.acyclic = false;
          std::vector<std::uint64_t> cyc;
          for (std::size_t w = u; w != v; w = parent[w]) cyc.push_back(id[w]);
          cyc.push_back(id[v]);
          std::reverse(cyc.begin(), cyc.end());
          res.cycle = std::move(cyc);
          return res;
        }
      } else {
        color[u] = kBlack;
        stack.pop_back();
      }
    }
  }
  return res;
}

bool brute_force_serializable(const std::vector<HistoryEvent>& history) {
  auto txns = committed_txns(history);
  if (txns.size() > kBruteForceLimit) {
    throw OracleSizeError("brute force limited to " + std::to_string(kBruteForceLimit) + " transactions, got " +
                          std::to_string(txns.size()));
  }
  // Writer of each observed version, and the final writer of each key.
  std::map<std::pair<Key, Version>, std::uint64_t> writer_of;
  std::map<Key, std::pair<Version, std::uint64_t>> final_writer;
  for (const auto& [id, t] : txns) {
    for (const auto& [k, v] : t.writes) {
      writer_of[{k, v}] = id;
      auto& f = final_writer[k];
      if (v >= f.first) f = {v, id};
    }
  }
  for (const auto& [id, t] : txns) {
    for (const auto& [k, v] : t.reads) {
      if (v != 0 && writer_of.find({k, v}) == writer_of.end()) return false;  // dirty read
    }
  }

  std::vector<std::size_t> perm(txns.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  do {
    std::map<Key, std::uint64_t> state;  // key -> last writer, absent = initial
    bool ok = true;
    for (std::size_t i : perm) {
      const auto& [id, t] = txns[i];
      for (const auto& [k, v] : t.reads) {
        auto s = state.find(k);
        std::uint64_t current = s == state.end() ? kInitialTxn : s->second;
        std::uint64_t expected = v == 0 ? kInitialTxn : writer_of[{k, v}];
        if (current != expected) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
      for (const auto& [k, v] : t.writes) state[k] = id;
    }
    if (!ok) continue;
    for (const auto& [k, f] : final_writer) {
      if (state[k] != f.second) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

OracleVerdict check_history(const std::vector<HistoryEvent>& history) {
  OracleVerdict v;
  v.graph = build_graph(history);
  v.cycle = check_acyclic(v.graph);
  v.serializable = v.graph.dirty_reads.empty() && v.cycle.acyclic;
  return v;
}

std::string OracleVerdict::describe() const {
  std::ostringstream os;
  if (serializable) {
    os << "serializable (" << graph.nodes.size() - 1 << " committed, " << graph.edges.size() << " edges)";
    return os.str();
  }
  for (const DirtyRead& d : graph.dirty_reads) {
    os << "dirty read: txn " << d.reader << " read key " << d.key << " at unproduced version " << d.version << "; ";
  }
  if (!cycle.acyclic) {
    os << "cycle:";
    for (std::uint64_t n : cycle.cycle) os << ' ' << n;
    for (std::size_t i = 0; i < cycle.cycle.size(); ++i) {
      std::uint64_t a = cycle.cycle[i], b = cycle.cycle[(i + 1) % cycle.cycle.size()];
      for (const Edge& e : graph.edges) {
        if (e.from == a && e.to == b) {
          os << " [" << a << "-" << to_string(e.kind) << "(k" << e.key << ")->" << b << "]";
          break;
        }
      }
    }
  }
  return os.str();
}

}  // namespace atcc
