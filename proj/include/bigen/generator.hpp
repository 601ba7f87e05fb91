#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bigen/bigraph.hpp"
#include "bigen/params.hpp"
#include "bigen/rng.hpp"

namespace bigen {

enum class AttachmentKind : std::uint8_t { Random, Preferential, Bounced };

struct Attachment {
  NodeRef target;
  AttachmentKind kind = AttachmentKind::Random;

  bool operator==(const Attachment&) const = default;
};

struct IterationOutcome {
  std::uint64_t t = 0;  // iteration number, 1-based
  NodeRef newNode;
  std::vector<Attachment> attachments;
  std::uint32_t requested = 0;
  std::uint32_t realized = 0;
  // Edges whose branch failed to find a fresh endpoint in the resample
  // budget and came from the uniform fallback instead.
  std::uint32_t fallbacks = 0;

  bool operator==(const IterationOutcome&) const = default;
};

// Recorded whenever a patch is applied, including empty ones.
struct PatchMarker {
  std::uint64_t t = 0;  // iterations completed when the patch took effect
  ParamPatch patch;

  bool operator==(const PatchMarker&) const = default;
};

// Same-branch resample budget before the uniform fallback.
inline constexpr int kResampleAttempts = 64;

// Three-step walk from an already-selected endpoint: a uniform anchor, a
// uniform neighbor of the anchor, then a uniform neighbor of that node. All
// anchors must belong to `target`. When `origin` is given (the node that is
// currently being attached), it is skipped in the second step.
// Throws std::invalid_argument on empty/mismatched anchors and
// std::logic_error if the walk dead-ends.
NodeRef bounce(const Bigraph& graph, std::span<const NodeRef> anchors,
               Modality target, Rng& rng, std::optional<NodeRef> origin = {});

// One endpoint in `target` drawn with the mixed rule: preferential with
// probability `preferential`, uniform otherwise. Consumes the branch draw then
// the endpoint draw.
NodeRef drawAttachment(const Bigraph& graph, Modality target, double preferential,
                       Rng& rng);

// Generator state machine.
//
// Per iteration the random stream is consumed in this order:
//   1. node type: uniform01() < p selects a user, otherwise an item;
//   2. for each requested edge:
//      a. branch: uniform01() < alpha (user) / beta (item) -> preferential;
//      b. only on the preferential branch: uniform01() < bounce -> bounce;
//      c. the endpoint draw(s) for the chosen branch, repeated on collision
//         with an endpoint already chosen in this iteration, up to
//         kResampleAttempts times;
//      d. if still colliding, one below(n) draw picking uniformly among the
//         target nodes not yet joined to the new node (none left: the edge
//         is dropped).
// Each accepted endpoint becomes an edge immediately. Endpoints from the
// uniform and preferential branches become bounce anchors; bounced ones do
// not. A bounce with no anchors yet is a plain preferential draw.
class RunState {
 public:
  // Validates and builds the m-pair starting graph. Throws ParamError.
  RunState(const GeneratorParams& params, std::uint64_t seed);

  IterationOutcome step();
  // Steps until t() == params().iterations.
  void runToEnd();
  // Takes effect from the next iteration. Throws ParamError (state unchanged).
  void applyPatch(const ParamPatch& patch);

  const Bigraph& graph() const { return graph_; }
  const GeneratorParams& params() const { return params_; }
  std::uint64_t t() const { return t_; }
  std::uint64_t seed() const { return seed_; }

  // Sum of realized edges over all iterations so far.
  std::uint64_t realizedEdges() const { return realizedEdges_; }
  // Iterations where fewer edges were realized than requested.
  std::uint64_t shortfallIterations() const { return shortfalls_; }
  std::uint64_t fallbackEdges() const { return fallbacks_; }

  void recordHistory(bool enabled) { recordHistory_ = enabled; }
  const std::vector<IterationOutcome>& history() const { return history_; }
  const std::vector<PatchMarker>& patches() const { return patches_; }

 private:
  std::optional<std::uint32_t> pickFallback(Modality target, NodeRef newNode);

  GeneratorParams params_;
  std::uint64_t seed_;
  Rng rng_;
  Bigraph graph_;
  std::uint64_t t_ = 0;
  std::uint64_t realizedEdges_ = 0;
  std::uint64_t shortfalls_ = 0;
  std::uint64_t fallbacks_ = 0;
  bool recordHistory_ = false;
  std::vector<IterationOutcome> history_;
  std::vector<PatchMarker> patches_;
};

// Builds the starting graph and performs params.iterations iterations.
RunState run(const GeneratorParams& params, std::uint64_t seed);

}  // namespace bigen
