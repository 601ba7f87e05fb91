#include "bigen/generator.hpp"

#include <algorithm>
#include <stdexcept>

namespace bigen {

NodeRef bounce(const Bigraph& graph, std::span<const NodeRef> anchors, Modality target,
               Rng& rng, std::optional<NodeRef> origin) {
  if (anchors.empty()) throw std::invalid_argument("bounce needs at least one anchor");
  for (const NodeRef& a : anchors) {
    if (a.modality != target || !graph.contains(a)) {
      throw std::invalid_argument("bounce anchor is not a node of the target modality");
    }
  }
  const NodeRef anchor = anchors[rng.below(anchors.size())];

  const auto first = graph.neighbors(anchor);
  const Modality mid = opposite(target);
  std::size_t skip = first.size();
  if (origin && origin->modality == mid) {
    // The origin's edge to the anchor is normally the most recent one.
    if (!first.empty() && first.back() == origin->index) {
      skip = first.size() - 1;
    } else {
      skip = static_cast<std::size_t>(std::find(first.begin(), first.end(), origin->index) -
                                      first.begin());
    }
  }
  const std::size_t choices = first.size() - (skip < first.size() ? 1 : 0);
  if (choices == 0) throw std::logic_error("bounce walk dead-ends at the anchor");
  std::size_t pos = rng.below(choices);
  if (pos >= skip) ++pos;
  const NodeRef hop{mid, first[pos]};

  const auto second = graph.neighbors(hop);
  if (second.empty()) throw std::logic_error("bounce walk dead-ends at the middle node");
  return {target, second[rng.below(second.size())]};
}

NodeRef drawAttachment(const Bigraph& graph, Modality target, double preferential,
                       Rng& rng) {
  if (rng.chance(preferential)) return graph.drawPreferential(target, rng);
  return graph.drawUniform(target, rng);
}

RunState::RunState(const GeneratorParams& params, std::uint64_t seed)
    : params_(params), seed_(seed), rng_(seed) {
  ensureValid(params_);
  graph_ = Bigraph::withPairs(params_.m);
}

std::optional<std::uint32_t> RunState::pickFallback(Modality target, NodeRef newNode) {
  const auto taken = graph_.neighbors(newNode);
  const std::size_t total = graph_.nodeCount(target);
  if (taken.size() >= total) return std::nullopt;
  std::vector<std::uint32_t> sorted(taken.begin(), taken.end());
  std::sort(sorted.begin(), sorted.end());
  // r-th free index in ascending order.
  auto r = static_cast<std::uint32_t>(rng_.below(total - sorted.size()));
  for (std::uint32_t used : sorted) {
    if (used <= r) ++r;
    else break;
  }
  return r;
}

IterationOutcome RunState::step() {
  IterationOutcome outcome;
  const bool userNode = rng_.chance(params_.p);
  const Modality own = userNode ? Modality::User : Modality::Item;
  const Modality target = opposite(own);
  const std::uint32_t requested = userNode ? params_.u : params_.v;
  const double preferential = userNode ? params_.alpha : params_.beta;

  const NodeRef newNode = graph_.addNode(own);
  outcome.newNode = newNode;
  outcome.requested = requested;
  outcome.attachments.reserve(requested);

  std::vector<NodeRef> anchors;
  anchors.reserve(requested);

  auto alreadyJoined = [&](NodeRef candidate) {
    const auto taken = graph_.neighbors(newNode);
    return std::find(taken.begin(), taken.end(), candidate.index) != taken.end();
  };

  for (std::uint32_t k = 0; k < requested; ++k) {
    const bool pref = rng_.chance(preferential);
    const bool bounced = pref && rng_.chance(params_.bounce);
    AttachmentKind kind = AttachmentKind::Random;
    if (pref) {
      kind = (bounced && !anchors.empty()) ? AttachmentKind::Bounced
                                           : AttachmentKind::Preferential;
    }

    std::optional<NodeRef> chosen;
    for (int attempt = 0; attempt < kResampleAttempts; ++attempt) {
      NodeRef candidate;
      switch (kind) {
        case AttachmentKind::Random:
          candidate = graph_.drawUniform(target, rng_);
          break;
        case AttachmentKind::Preferential:
          candidate = graph_.drawPreferential(target, rng_);
          break;
        case AttachmentKind::Bounced:
          candidate = bounce(graph_, anchors, target, rng_, newNode);
          break;
      }
      if (!alreadyJoined(candidate)) {
        chosen = candidate;
        break;
      }
    }
    if (!chosen) {
      const auto index = pickFallback(target, newNode);
      if (!index) continue;
      chosen = NodeRef{target, *index};
      kind = AttachmentKind::Random;
      ++outcome.fallbacks;
    }

    graph_.addEdge(newNode, *chosen);
    outcome.attachments.push_back({*chosen, kind});
    if (kind != AttachmentKind::Bounced) anchors.push_back(*chosen);
  }

  outcome.realized = static_cast<std::uint32_t>(outcome.attachments.size());
  ++t_;
  outcome.t = t_;
  realizedEdges_ += outcome.realized;
  fallbacks_ += outcome.fallbacks;
  if (outcome.realized < outcome.requested) ++shortfalls_;
  if (recordHistory_) history_.push_back(outcome);
  return outcome;
}

void RunState::runToEnd() {
  while (t_ < params_.iterations) step();
}

void RunState::applyPatch(const ParamPatch& patch) {
  params_ = patched(params_, patch);
  patches_.push_back({t_, patch});
}

RunState run(const GeneratorParams& params, std::uint64_t seed) {
  RunState state(params, seed);
  state.runToEnd();
  return state;
}

}  // namespace bigen
