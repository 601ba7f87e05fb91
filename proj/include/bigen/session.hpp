#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bigen/analytics.hpp"
#include "bigen/generator.hpp"
#include "bigen/params.hpp"

#include "json.hpp"

namespace bigen {

struct SessionOptions {
  std::uint64_t snapshotEvery = 100;
  // Above this many nodes in a modality, snapshot BLCC and neighborhood
  // means are computed on a uniform sample.
  std::size_t exactMetricsLimit = 10000;
  std::size_t metricsSample = 500;
  std::size_t histogramBins = 64;
  std::size_t edgePullLimit = 2000;
};

// Lowest `histogramBins` distinct degrees, plus the number of nodes whose
// degree lies beyond them.
struct TruncatedHistogram {
  std::vector<std::pair<std::uint32_t, std::uint64_t>> bins;
  std::uint64_t tailNodes = 0;
  std::optional<std::uint32_t> tailFrom;  // smallest degree in the tail

  bool operator==(const TruncatedHistogram&) const = default;
};

TruncatedHistogram truncate(const DegreeHistogram& h, std::size_t bins);

struct Snapshot {
  std::string session;
  std::uint64_t seq = 0;
  std::uint64_t t = 0;
  std::string reason;  // open, periodic, pause, param_change, reset, finished
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t edges = 0;
  TruncatedHistogram userHistogram;
  TruncatedHistogram itemHistogram;
  BlccMean userBlcc;
  BlccMean itemBlcc;
  double similarUsersMean = 0;
  double neighborItemsMean = 0;
  bool neighborhoodSampled = false;
  GeneratorParams params;
};

struct ParamUpdate {
  ParamPatch patch;
  std::string clientTag;
};

struct UpdateAck {
  std::uint64_t appliedAtT = 0;
  std::string clientTag;
  GeneratorParams params;
};

enum class ControlAction { Start, Pause, Resume, Reset, SetSpeed };

ControlAction parseControlAction(std::string_view text);  // start, pause, ...
std::string_view label(ControlAction a);

// A recorded input, sufficient to replay a session.
struct SessionEvent {
  enum class Kind { Advance, Update, Control } kind = Kind::Advance;
  std::uint64_t iterations = 0;  // Advance
  ParamPatch patch;              // Update
  ControlAction action = ControlAction::Start;  // Control
  double speed = 0;                             // Control / SetSpeed
};

// One live generation run. Not thread-safe; the owner serializes calls and
// only calls between iterations, so every input lands on an iteration
// boundary.
class Session {
 public:
  // Throws ParamError.
  Session(std::string id, const GeneratorParams& params, std::uint64_t seed,
          SessionOptions options = {});

  const std::string& id() const { return id_; }
  std::uint64_t seed() const { return seed_; }
  const RunState& state() const { return state_; }
  const SessionOptions& options() const { return options_; }
  bool running() const { return running_; }
  bool finished() const { return state_.t() >= state_.params().iterations; }
  // Iterations per second; 0 means unthrottled.
  double speed() const { return speed_; }

  // Builds a snapshot of the current state and consumes the next seq.
  Snapshot snapshot(std::string reason);

  // Steps up to `maxIterations` (stopping at T, which also pauses the
  // session). Returns the snapshots due on the way: one whenever t is a
  // multiple of snapshotEvery, and one when T is reached.
  std::vector<Snapshot> advance(std::uint64_t maxIterations);

  // Iterations left until the next periodic snapshot or T.
  std::uint64_t iterationsToBoundary() const;

  // Applies the patch now. Throws ParamError, leaving the session unchanged.
  std::pair<UpdateAck, Snapshot> applyUpdate(const ParamUpdate& update);

  // Pause and reset return the boundary snapshot. Throws
  // std::invalid_argument for a non-positive speed.
  std::optional<Snapshot> control(ControlAction action, double speed = 0);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

  const std::vector<SessionEvent>& log() const { return log_; }

 private:
  std::string id_;
  std::uint64_t seed_;
  GeneratorParams initialParams_;
  SessionOptions options_;
  RunState state_;
  std::uint64_t seq_ = 0;
  bool running_ = false;
  double speed_ = 0;
  std::vector<SessionEvent> log_;
};

// Re-executes a recorded event sequence and returns every snapshot produced,
// including the opening one.
std::vector<Snapshot> replay(const std::string& id, const GeneratorParams& params,
                             std::uint64_t seed, const SessionOptions& options,
                             const std::vector<SessionEvent>& events);

// --- wire format -------------------------------------------------------------

nlohmann::json toJson(const TruncatedHistogram& h);
// {"type":"snapshot", "session", "seq", "t", "reason", "format",
//  "format_version", "params", "counts", "histograms", "blcc", "neighborhood"}
nlohmann::json toJson(const Snapshot& s);
nlohmann::json ackJson(const std::string& session, const UpdateAck& ack);
nlohmann::json errorJson(const std::string& message,
                         const std::vector<FieldError>& fields = {},
                         const std::string& session = {},
                         const std::string& clientTag = {});

}  // namespace bigen
