/**
 * @file graph.hpp
 * @brief Immutable directed graph plus edge-list ingestion.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ffd {

using NodeId = std::int32_t;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/** @brief Raised when an edge-list line cannot be parsed. */
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/**
 * @brief Directed simple graph over dense ids [0, num_nodes).
 *
 * Stores the edge list in insertion order together with sorted successor,
 * predecessor and symmetrized neighbor lists. Construction rejects
 * self-loops, duplicates and out-of-range ids; use ingest() to drop them
 * instead.
 */
class DirectedGraph {
 public:
  DirectedGraph() = default;

  DirectedGraph(std::size_t num_nodes, std::vector<Edge> edges)
      : num_nodes_(num_nodes), edges_(std::move(edges)) {
    out_.assign(num_nodes_, {});
    in_.assign(num_nodes_, {});
    for (const Edge& e : edges_) {
      if (e.src < 0 || e.dst < 0 || static_cast<std::size_t>(e.src) >= num_nodes_ ||
          static_cast<std::size_t>(e.dst) >= num_nodes_) {
        throw std::invalid_argument("edge endpoint out of range");
      }
      if (e.src == e.dst) throw std::invalid_argument("self-loop at node " + std::to_string(e.src));
      out_[e.src].push_back(e.dst);
      in_[e.dst].push_back(e.src);
    }
    for (std::size_t v = 0; v < num_nodes_; ++v) {
      std::sort(out_[v].begin(), out_[v].end());
      std::sort(in_[v].begin(), in_[v].end());
      if (std::adjacent_find(out_[v].begin(), out_[v].end()) != out_[v].end()) {
        throw std::invalid_argument("duplicate edge from node " + std::to_string(v));
      }
    }
    sym_.assign(num_nodes_, {});
    for (std::size_t v = 0; v < num_nodes_; ++v) {
      auto& s = sym_[v];
      s.reserve(out_[v].size() + in_[v].size());
      std::set_union(out_[v].begin(), out_[v].end(), in_[v].begin(), in_[v].end(),
                     std::back_inserter(s));
    }
  }

  struct IngestReport {
    std::size_t self_loops = 0;
    std::size_t duplicates = 0;
  };

  /// Builds a graph, silently dropping self-loops and repeated edges.
  static DirectedGraph ingest(std::size_t num_nodes, const std::vector<Edge>& raw,
                              IngestReport* report = nullptr) {
    IngestReport rep;
    std::vector<Edge> kept;
    kept.reserve(raw.size());
    std::vector<Edge> seen(raw);
    std::sort(seen.begin(), seen.end());
    std::vector<char> used(seen.size(), 0);
    for (const Edge& e : raw) {
      if (e.src == e.dst) {
        ++rep.self_loops;
        continue;
      }
      auto idx = static_cast<std::size_t>(std::lower_bound(seen.begin(), seen.end(), e) - seen.begin());
      if (used[idx]) {
        ++rep.duplicates;
        continue;
      }
      used[idx] = 1;
      kept.push_back(e);
    }
    if (report) *report = rep;
    return DirectedGraph(num_nodes, std::move(kept));
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const NodeId> successors(NodeId v) const { return out_[v]; }
  std::span<const NodeId> predecessors(NodeId v) const { return in_[v]; }
  /// Union of successors and predecessors, sorted and unique.
  std::span<const NodeId> neighbors(NodeId v) const { return sym_[v]; }

  std::size_t out_degree(NodeId v) const { return out_[v].size(); }
  std::size_t in_degree(NodeId v) const { return in_[v].size(); }

  bool has_edge(NodeId u, NodeId v) const {
    const auto& s = out_[u];
    return std::binary_search(s.begin(), s.end(), v);
  }

  double average_degree() const {
    return num_nodes_ == 0 ? 0.0 : static_cast<double>(edges_.size()) / static_cast<double>(num_nodes_);
  }

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> out_, in_, sym_;
};

inline DirectedGraph reverse_view(const DirectedGraph& g) {
  std::vector<Edge> rev;
  rev.reserve(g.num_edges());
  for (const Edge& e : g.edges()) rev.push_back({e.dst, e.src});
  return DirectedGraph(g.num_nodes(), std::move(rev));
}

struct LoadedGraph {
  DirectedGraph graph;
  /// original_id[dense] for every node; identity when input ids were dense.
  std::vector<std::int64_t> original_id;
  bool relabeled = false;
  DirectedGraph::IngestReport dropped;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_i64(std::string_view& s, std::int64_t& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr == s.data()) return false;
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  return true;
}

}  // namespace detail

/**
 * @brief Parse a `src<TAB>dst` edge list.
 *
 * Lines starting with `#` are comments, except that a `# nodes: N` comment
 * (as written by save_edge_list) fixes the node count so isolated nodes
 * survive a round trip. Sparse ids are relabeled to dense ids in ascending
 * original order.
 */
inline LoadedGraph parse_edge_list(std::istream& in) {
  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::int64_t declared_nodes = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = detail::trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      constexpr std::string_view tag = "# nodes:";
      if (s.substr(0, tag.size()) == tag) {
        std::string_view rest = s.substr(tag.size());
        std::int64_t n;
        if (detail::parse_i64(rest, n) && n >= 0) declared_nodes = n;
      }
      continue;
    }
    std::int64_t a, b;
    if (!detail::parse_i64(s, a)) throw ParseError(lineno, "expected source id");
    if (s.empty() || (s.front() != ' ' && s.front() != '\t')) throw ParseError(lineno, "expected separator");
    if (!detail::parse_i64(s, b)) throw ParseError(lineno, "expected target id");
    if (!detail::trim(s).empty()) throw ParseError(lineno, "trailing characters");
    if (a < 0 || b < 0) throw ParseError(lineno, "negative node id");
    raw.emplace_back(a, b);
  }

  LoadedGraph out;
  std::int64_t max_id = -1;
  std::vector<std::int64_t> ids;
  ids.reserve(raw.size() * 2);
  for (auto [a, b] : raw) {
    ids.push_back(a);
    ids.push_back(b);
    max_id = std::max({max_id, a, b});
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  std::size_t n;
  if (static_cast<std::int64_t>(ids.size()) == max_id + 1 || declared_nodes > max_id) {
    n = static_cast<std::size_t>(std::max(max_id + 1, declared_nodes));
    out.original_id.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.original_id[i] = static_cast<std::int64_t>(i);
    for (auto [a, b] : raw) edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
  } else {
    out.relabeled = true;
    n = ids.size();
    out.original_id = ids;
    auto dense = [&](std::int64_t id) {
      return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    for (auto [a, b] : raw) edges.push_back({dense(a), dense(b)});
  }
  out.graph = DirectedGraph::ingest(n, edges, &out.dropped);
  return out;
}

inline LoadedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  return parse_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const DirectedGraph& g) {
  out << "# nodes: " << g.num_nodes() << '\n';
  for (const Edge& e : g.edges()) out << e.src << '\t' << e.dst << '\n';
}

inline void save_edge_list(const std::string& path, const DirectedGraph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  write_edge_list(out, g);
}

/// Writes `dense<TAB>original` lines.
inline void save_id_map(const std::string& path, const std::vector<std::int64_t>& original_id) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write id map: " + path);
  for (std::size_t i = 0; i < original_id.size(); ++i) out << i << '\t' << original_id[i] << '\n';
}

}  // namespace ffd
