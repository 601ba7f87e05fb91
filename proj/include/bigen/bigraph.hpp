#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bigen/rng.hpp"

namespace bigen {

enum class Modality : std::uint8_t { User = 0, Item = 1 };

constexpr Modality opposite(Modality m) {
  return m == Modality::User ? Modality::Item : Modality::User;
}

constexpr std::size_t slot(Modality m) { return static_cast<std::size_t>(m); }

std::string_view label(Modality m);
// Accepts "user"/"item" (case-sensitive). Throws std::invalid_argument.
Modality parseModality(std::string_view text);

struct NodeRef {
  Modality modality = Modality::User;
  std::uint32_t index = 0;

  auto operator<=>(const NodeRef&) const = default;
};

class DuplicateEdgeError : public std::invalid_argument {
 public:
  DuplicateEdgeError(std::uint32_t user, std::uint32_t item);
  std::uint32_t user;
  std::uint32_t item;
};

class EmptyModalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simple bipartite graph, append-only.
//
// Each node keeps its neighbors (indices into the opposite modality) in
// insertion order. Each modality also keeps an endpoint index: a flat list
// holding every node once per incident edge, so a uniform pick from it is a
// degree-proportional pick over the modality.
class Bigraph {
 public:
  Bigraph() = default;

  // m users and m items, user i joined to item i.
  static Bigraph withPairs(std::uint32_t m);

  NodeRef addNode(Modality modality);

  // Throws DuplicateEdgeError if the edge exists, std::out_of_range on a bad
  // index.
  void addEdge(std::uint32_t user, std::uint32_t item);
  void addEdge(NodeRef a, NodeRef b);

  bool hasEdge(std::uint32_t user, std::uint32_t item) const;

  std::size_t nodeCount(Modality m) const { return adjacency_[slot(m)].size(); }
  std::size_t userCount() const { return nodeCount(Modality::User); }
  std::size_t itemCount() const { return nodeCount(Modality::Item); }
  std::size_t edgeCount() const { return endpoints_[0].size(); }

  std::span<const std::uint32_t> neighbors(NodeRef n) const {
    return adjacency_[slot(n.modality)][n.index];
  }
  std::size_t degree(NodeRef n) const { return neighbors(n).size(); }
  bool contains(NodeRef n) const { return n.index < nodeCount(n.modality); }

  std::span<const std::uint32_t> endpoints(Modality m) const {
    return endpoints_[slot(m)];
  }

  // Uniform over the nodes of `m`. Throws EmptyModalityError.
  NodeRef drawUniform(Modality m, Rng& rng) const;
  // Probability degree / edgeCount, O(1). Throws EmptyModalityError when the
  // modality has no incident edges.
  NodeRef drawPreferential(Modality m, Rng& rng) const;

  // Edges as (user, item), sorted by user then item.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sortedEdges() const;

  // Full consistency check against a rebuild from adjacency. Throws
  // std::logic_error describing the first violated invariant.
  void checkInvariants() const;

  bool operator==(const Bigraph&) const = default;

 private:
  std::array<std::vector<std::vector<std::uint32_t>>, 2> adjacency_;
  std::array<std::vector<std::uint32_t>, 2> endpoints_;
};

}  // namespace bigen
