#include "bigen/bigraph.hpp"

#include <algorithm>
#include <string>

namespace bigen {

std::string_view label(Modality m) {
  return m == Modality::User ? "user" : "item";
}

Modality parseModality(std::string_view text) {
  if (text == "user") return Modality::User;
  if (text == "item") return Modality::Item;
  throw std::invalid_argument("unknown modality '" + std::string(text) +
                              "' (expected user or item)");
}

DuplicateEdgeError::DuplicateEdgeError(std::uint32_t u, std::uint32_t i)
    : std::invalid_argument("duplicate edge (user " + std::to_string(u) +
                            ", item " + std::to_string(i) + ")"),
      user(u),
      item(i) {}

Bigraph Bigraph::withPairs(std::uint32_t m) {
  if (m == 0) throw std::invalid_argument("initial pair count m must be >= 1");
  Bigraph g;
  for (auto& side : g.adjacency_) side.resize(m);
  for (auto& side : g.endpoints_) side.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    g.adjacency_[0][i].push_back(i);
    g.adjacency_[1][i].push_back(i);
    g.endpoints_[0].push_back(i);
    g.endpoints_[1].push_back(i);
  }
  return g;
}

NodeRef Bigraph::addNode(Modality modality) {
  auto& side = adjacency_[slot(modality)];
  side.emplace_back();
  return {modality, static_cast<std::uint32_t>(side.size() - 1)};
}

bool Bigraph::hasEdge(std::uint32_t user, std::uint32_t item) const {
  const auto& un = adjacency_[0][user];
  const auto& in = adjacency_[1][item];
  // Scan the smaller list.
  if (un.size() <= in.size()) return std::find(un.begin(), un.end(), item) != un.end();
  return std::find(in.begin(), in.end(), user) != in.end();
}

void Bigraph::addEdge(std::uint32_t user, std::uint32_t item) {
  if (user >= userCount() || item >= itemCount()) {
    throw std::out_of_range("edge (" + std::to_string(user) + ", " +
                            std::to_string(item) + ") references a missing node");
  }
  if (hasEdge(user, item)) throw DuplicateEdgeError(user, item);
  adjacency_[0][user].push_back(item);
  adjacency_[1][item].push_back(user);
  endpoints_[0].push_back(user);
  endpoints_[1].push_back(item);
}

void Bigraph::addEdge(NodeRef a, NodeRef b) {
  if (a.modality == b.modality) {
    throw std::invalid_argument("edge endpoints must have opposite modalities");
  }
  if (a.modality == Modality::User) {
    addEdge(a.index, b.index);
  } else {
    addEdge(b.index, a.index);
  }
}

NodeRef Bigraph::drawUniform(Modality m, Rng& rng) const {
  const std::size_t n = nodeCount(m);
  if (n == 0) {
    throw EmptyModalityError("cannot draw uniformly: no " +
                             std::string(label(m)) + " nodes");
  }
  return {m, static_cast<std::uint32_t>(rng.below(n))};
}

NodeRef Bigraph::drawPreferential(Modality m, Rng& rng) const {
  const auto& ends = endpoints_[slot(m)];
  if (ends.empty()) {
    throw EmptyModalityError("cannot draw preferentially: " +
                             std::string(label(m)) + " total degree is zero");
  }
  return {m, ends[rng.below(ends.size())]};
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Bigraph::sortedEdges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(edgeCount());
  for (std::uint32_t u = 0; u < userCount(); ++u) {
    for (std::uint32_t i : adjacency_[0][u]) edges.emplace_back(u, i);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

void Bigraph::checkInvariants() const {
  for (std::size_t s = 0; s < 2; ++s) {
    const std::size_t other = 1 - s;
    std::vector<std::size_t> endpointCount(adjacency_[s].size(), 0);
    for (std::uint32_t n : endpoints_[s]) {
      if (n >= adjacency_[s].size()) throw std::logic_error("endpoint index out of range");
      ++endpointCount[n];
    }
    std::size_t degreeSum = 0;
    for (std::size_t n = 0; n < adjacency_[s].size(); ++n) {
      const auto& adj = adjacency_[s][n];
      degreeSum += adj.size();
      if (endpointCount[n] != adj.size()) {
        throw std::logic_error("endpoint index count differs from degree");
      }
      std::vector<std::uint32_t> sorted(adj.begin(), adj.end());
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::logic_error("duplicate edge in adjacency");
      }
      for (std::uint32_t peer : adj) {
        if (peer >= adjacency_[other].size()) {
          throw std::logic_error("adjacency references a missing node");
        }
        const auto& back = adjacency_[other][peer];
        if (std::find(back.begin(), back.end(), n) == back.end()) {
          throw std::logic_error("adjacency is not symmetric");
        }
      }
    }
    if (degreeSum != edgeCount() || endpoints_[s].size() != edgeCount()) {
      throw std::logic_error("degree sum differs from edge count");
    }
  }
}

}  // namespace bigen
