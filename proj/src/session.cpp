#include "bigen/session.hpp"

#include "bigen/io.hpp"
#include "bigen/rng.hpp"

namespace bigen {

using nlohmann::json;

TruncatedHistogram truncate(const DegreeHistogram& h, std::size_t bins) {
  TruncatedHistogram out;
  for (const auto& [k, c] : h.counts) {
    if (out.bins.size() < bins) {
      out.bins.emplace_back(k, c);
    } else {
      if (!out.tailFrom) out.tailFrom = k;
      out.tailNodes += c;
    }
  }
  return out;
}

ControlAction parseControlAction(std::string_view text) {
  if (text == "start") return ControlAction::Start;
  if (text == "pause") return ControlAction::Pause;
  if (text == "resume") return ControlAction::Resume;
  if (text == "reset") return ControlAction::Reset;
  if (text == "set_speed") return ControlAction::SetSpeed;
  throw std::invalid_argument("unknown control action '" + std::string(text) + "'");
}

std::string_view label(ControlAction a) {
  switch (a) {
    case ControlAction::Start: return "start";
    case ControlAction::Pause: return "pause";
    case ControlAction::Resume: return "resume";
    case ControlAction::Reset: return "reset";
    case ControlAction::SetSpeed: return "set_speed";
  }
  return "";
}

Session::Session(std::string id, const GeneratorParams& params, std::uint64_t seed,
                 SessionOptions options)
    : id_(std::move(id)),
      seed_(seed),
      initialParams_(params),
      options_(options),
      state_(params, seed) {
  if (options_.snapshotEvery == 0) throw std::invalid_argument("snapshotEvery must be >= 1");
}

Snapshot Session::snapshot(std::string reason) {
  const Bigraph& g = state_.graph();
  Snapshot s;
  s.session = id_;
  s.seq = ++seq_;
  s.t = state_.t();
  s.reason = std::move(reason);
  s.users = g.userCount();
  s.items = g.itemCount();
  s.edges = g.edgeCount();
  s.userHistogram = truncate(degreeHistogram(g, Modality::User), options_.histogramBins);
  s.itemHistogram = truncate(degreeHistogram(g, Modality::Item), options_.histogramBins);
  s.params = state_.params();

  // Sampling streams depend only on (seed, seq), so replays match.
  auto metricsFor = [&](Modality m) {
    if (g.nodeCount(m) <= options_.exactMetricsLimit) return blccMean(g, m);
    Rng rng(deriveSeed(seed_, s.seq, slot(m)));
    return blccMeanSampled(g, m, options_.metricsSample, rng);
  };
  s.userBlcc = metricsFor(Modality::User);
  s.itemBlcc = metricsFor(Modality::Item);

  NeighborhoodReport hood;
  if (g.userCount() <= options_.exactMetricsLimit) {
    hood = neighborhoodReport(g);
  } else {
    Rng rng(deriveSeed(seed_, s.seq, 2));
    hood = neighborhoodReportSampled(g, options_.metricsSample, rng);
  }
  s.similarUsersMean = hood.meanSimilarUsers;
  s.neighborItemsMean = hood.meanNeighborItems;
  s.neighborhoodSampled = hood.sampled;
  return s;
}

std::uint64_t Session::iterationsToBoundary() const {
  const std::uint64_t t = state_.t();
  const std::uint64_t total = state_.params().iterations;
  if (t >= total) return 0;
  const std::uint64_t toPeriodic = options_.snapshotEvery - t % options_.snapshotEvery;
  return std::min(toPeriodic, total - t);
}

std::vector<Snapshot> Session::advance(std::uint64_t maxIterations) {
  std::vector<Snapshot> out;
  std::uint64_t done = 0;
  while (done < maxIterations && !finished()) {
    state_.step();
    ++done;
    if (finished()) {
      running_ = false;
      out.push_back(snapshot("finished"));
    } else if (state_.t() % options_.snapshotEvery == 0) {
      out.push_back(snapshot("periodic"));
    }
  }
  if (done > 0) {
    SessionEvent e;
    e.kind = SessionEvent::Kind::Advance;
    e.iterations = done;
    log_.push_back(e);
  }
  return out;
}

std::pair<UpdateAck, Snapshot> Session::applyUpdate(const ParamUpdate& update) {
  state_.applyPatch(update.patch);
  SessionEvent e;
  e.kind = SessionEvent::Kind::Update;
  e.patch = update.patch;
  log_.push_back(e);
  UpdateAck ack{state_.t(), update.clientTag, state_.params()};
  return {ack, snapshot("param_change")};
}

std::optional<Snapshot> Session::control(ControlAction action, double speed) {
  if (action == ControlAction::SetSpeed && !(speed > 0)) {
    throw std::invalid_argument("speed must be > 0 iterations per second");
  }
  SessionEvent e;
  e.kind = SessionEvent::Kind::Control;
  e.action = action;
  e.speed = speed;
  log_.push_back(e);

  switch (action) {
    case ControlAction::Start:
    case ControlAction::Resume:
      running_ = !finished();
      return std::nullopt;
    case ControlAction::Pause:
      running_ = false;
      return snapshot("pause");
    case ControlAction::Reset: {
      // Back to t = 0 with the current (possibly steered) parameters.
      GeneratorParams params = state_.params();
      state_ = RunState(params, seed_);
      running_ = false;
      return snapshot("reset");
    }
    case ControlAction::SetSpeed:
      speed_ = speed;
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Session::edges() const {
  return state_.graph().sortedEdges();
}

std::vector<Snapshot> replay(const std::string& id, const GeneratorParams& params,
                             std::uint64_t seed, const SessionOptions& options,
                             const std::vector<SessionEvent>& events) {
  Session session(id, params, seed, options);
  std::vector<Snapshot> out{session.snapshot("open")};
  for (const auto& e : events) {
    switch (e.kind) {
      case SessionEvent::Kind::Advance: {
        auto batch = session.advance(e.iterations);
        out.insert(out.end(), batch.begin(), batch.end());
        break;
      }
      case SessionEvent::Kind::Update:
        out.push_back(session.applyUpdate({e.patch, {}}).second);
        break;
      case SessionEvent::Kind::Control:
        if (auto s = session.control(e.action, e.speed)) out.push_back(std::move(*s));
        break;
    }
  }
  return out;
}

// --- wire format ---------------------------------------------------------------

namespace {

json blccJson(const BlccMean& b) {
  return {{"mean", b.mean ? json(*b.mean) : json(nullptr)},
          {"defined", b.defined},
          {"examined", b.examined},
          {"sampled", b.sampled}};
}

}  // namespace

json toJson(const TruncatedHistogram& h) {
  json bins = json::array();
  for (const auto& [k, c] : h.bins) bins.push_back({k, c});
  return {{"bins", std::move(bins)},
          {"tail_nodes", h.tailNodes},
          {"tail_from", h.tailFrom ? json(*h.tailFrom) : json(nullptr)}};
}

json toJson(const Snapshot& s) {
  return {{"type", "snapshot"},
          {"session", s.session},
          {"seq", s.seq},
          {"t", s.t},
          {"reason", s.reason},
          {"format", kReportFormatTag},
          {"format_version", kReportFormatVersion},
          {"params", toJson(s.params)},
          {"counts", {{"users", s.users}, {"items", s.items}, {"edges", s.edges}}},
          {"histograms", {{"user", toJson(s.userHistogram)}, {"item", toJson(s.itemHistogram)}}},
          {"blcc", {{"user", blccJson(s.userBlcc)}, {"item", blccJson(s.itemBlcc)}}},
          {"neighborhood",
           {{"similar_users_mean", s.similarUsersMean},
            {"neighbor_items_mean", s.neighborItemsMean},
            {"sampled", s.neighborhoodSampled}}}};
}

json ackJson(const std::string& session, const UpdateAck& ack) {
  return {{"type", "ack"},
          {"action", "param_update"},
          {"session", session},
          {"client_tag", ack.clientTag},
          {"applied_at_t", ack.appliedAtT},
          {"params", toJson(ack.params)}};
}

json errorJson(const std::string& message, const std::vector<FieldError>& fields,
               const std::string& session, const std::string& clientTag) {
  json j = {{"type", "error"}, {"message", message}};
  if (!fields.empty()) {
    json f = json::array();
    for (const auto& e : fields) f.push_back({{"field", e.field}, {"message", e.message}});
    j["fields"] = std::move(f);
  }
  if (!session.empty()) j["session"] = session;
  if (!clientTag.empty()) j["client_tag"] = clientTag;
  return j;
}

}  // namespace bigen
