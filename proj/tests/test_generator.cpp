#include <cmath>
#include <map>
#include <random>
#include <set>

#include "bigen/generator.hpp"
#include "doctest.h"

using namespace bigen;

namespace {

GeneratorParams small(std::uint64_t T) {
  GeneratorParams p;
  p.iterations = T;
  return p;
}

// Exact landing law of the three-step walk, by enumerating every branch.
std::map<std::uint32_t, double> walkLaw(const Bigraph& g, const std::vector<NodeRef>& anchors,
                                        std::optional<NodeRef> origin) {
  std::map<std::uint32_t, double> law;
  for (const auto& a : anchors) {
    std::vector<std::uint32_t> mids;
    for (auto x : g.neighbors(a)) {
      if (origin && x == origin->index) continue;
      mids.push_back(x);
    }
    for (auto x : mids) {
      auto ends = g.neighbors({opposite(a.modality), x});
      for (auto e : ends) {
        law[e] += 1.0 / anchors.size() / mids.size() / ends.size();
      }
    }
  }
  return law;
}

}  // namespace

TEST_CASE("rng primitives") {
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(deriveSeed(1, 2, 3) == mix64(mix64(mix64(1) ^ 2) ^ 3));
  CHECK(deriveSeed(1, 2, 3) != deriveSeed(1, 3, 2));

  Rng a(7), b(7);
  for (int k = 0; k < 1000; ++k) REQUIRE(a.raw() == b.raw());
  Rng r(3);
  for (int k = 0; k < 10000; ++k) {
    const double x = r.uniform01();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    REQUIRE(r.below(7) < 7);
  }
  CHECK(r.below(1) == 0);
}

TEST_CASE("parameter validation") {
  CHECK(validate(GeneratorParams{}).empty());
  GeneratorParams bad;
  bad.m = 0;
  bad.p = 1.5;
  bad.u = 0;
  bad.alpha = -0.1;
  bad.bounce = std::nan("");
  const auto errs = validate(bad);
  std::set<std::string> fields;
  for (const auto& e : errs) fields.insert(e.field);
  CHECK(fields == std::set<std::string>{"m", "p", "u", "alpha", "bounce"});
  CHECK_THROWS_AS(RunState(bad, 1), ParamError);

  const auto d = derive(GeneratorParams{});
  CHECK(d.eta == doctest::Approx(7));
  CHECK(*d.avgUserDegree == doctest::Approx(14));
  CHECK(*d.avgItemDegree == doctest::Approx(14));
  GeneratorParams allUsers;
  allUsers.p = 1;
  CHECK_FALSE(derive(allUsers).avgItemDegree.has_value());
}

TEST_CASE("eta lies between u and v") {
  for (double p = 0; p <= 1.0; p += 0.05) {
    for (std::uint32_t u = 1; u < 12; u += 3) {
      for (std::uint32_t v = 1; v < 12; v += 4) {
        GeneratorParams gp;
        gp.p = p;
        gp.u = u;
        gp.v = v;
        const double eta = derive(gp).eta;
        CHECK(eta >= std::min(u, v) - 1e-12);
        CHECK(eta <= std::max(u, v) + 1e-12);
      }
    }
  }
}

TEST_CASE("T=0 leaves the starting graph") {
  auto state = run(small(0), 4);
  CHECK(state.graph() == Bigraph::withPairs(50));
  CHECK(state.t() == 0);
}

TEST_CASE("same seed, same graph") {
  auto a = run(small(2000), 42);
  auto b = run(small(2000), 42);
  auto c = run(small(2000), 43);
  CHECK(a.graph() == b.graph());
  CHECK(a.graph().sortedEdges() == b.graph().sortedEdges());
  CHECK_FALSE(a.graph() == c.graph());
}

TEST_CASE("p=1 only adds users") {
  GeneratorParams gp = small(200);
  gp.p = 1;
  gp.u = 3;
  RunState state(gp, 9);
  state.recordHistory(true);
  state.runToEnd();
  CHECK(state.graph().itemCount() == 50);
  CHECK(state.graph().userCount() == 250);
  for (const auto& o : state.history()) {
    CHECK(o.newNode.modality == Modality::User);
    CHECK(o.realized == 3);
  }
}

TEST_CASE("small growth example") {
  GeneratorParams gp;
  gp.m = 10;
  gp.iterations = 30;
  gp.u = gp.v = 3;
  double users = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    auto state = run(gp, s);
    // u = v and at least 10 candidates: every request is met
    CHECK(state.graph().edgeCount() == 100);
    users += state.graph().userCount();
  }
  users /= seeds;
  // 10 + Binomial(30, 1/2): sd of the mean is sqrt(7.5 / 200)
  CHECK(std::abs(users - 25) < 3 * std::sqrt(7.5 / seeds));
}

TEST_CASE("iteration outcomes are well formed") {
  std::mt19937_64 gen(17);
  for (int round = 0; round < 30; ++round) {
    GeneratorParams gp;
    gp.m = 1 + gen() % 6;
    gp.iterations = 300;
    gp.p = (gen() % 11) / 10.0;
    gp.u = 1 + gen() % 9;
    gp.v = 1 + gen() % 9;
    gp.alpha = (gen() % 11) / 10.0;
    gp.beta = (gen() % 11) / 10.0;
    gp.bounce = (gen() % 11) / 10.0;
    RunState state(gp, gen());
    state.recordHistory(true);
    std::uint64_t realized = 0;
    while (state.t() < gp.iterations) {
      const auto o = state.step();
      realized += o.realized;
      REQUIRE(o.realized <= o.requested);
      REQUIRE(o.realized == o.attachments.size());
      REQUIRE(o.requested == (o.newNode.modality == Modality::User ? gp.u : gp.v));
      std::set<NodeRef> targets;
      for (const auto& a : o.attachments) {
        REQUIRE(a.target.modality == opposite(o.newNode.modality));
        targets.insert(a.target);
        if (gp.alpha == 0 && gp.beta == 0) REQUIRE(a.kind == AttachmentKind::Random);
        if (gp.bounce == 0) REQUIRE(a.kind != AttachmentKind::Bounced);
      }
      REQUIRE(targets.size() == o.attachments.size());
      REQUIRE(state.graph().degree(o.newNode) == o.realized);
      if (o.realized < o.requested) {
        // only when the target modality is exhausted
        REQUIRE(o.realized == state.graph().nodeCount(opposite(o.newNode.modality)));
      }
    }
    state.graph().checkInvariants();
    CHECK(state.graph().userCount() + state.graph().itemCount() == 2 * gp.m + gp.iterations);
    CHECK(state.graph().edgeCount() == gp.m + realized);
    CHECK(state.realizedEdges() == realized);
    CHECK(state.history().size() == gp.iterations);
  }
}

TEST_CASE("alpha=beta=0 makes bounce inert") {
  GeneratorParams gp = small(3000);
  gp.alpha = gp.beta = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    gp.bounce = 0;
    auto a = run(gp, seed);
    gp.bounce = 1;
    auto b = run(gp, seed);
    gp.bounce = 0.4;
    auto c = run(gp, seed);
    CHECK(a.graph() == b.graph());
    CHECK(a.graph() == c.graph());
  }
}

TEST_CASE("mean user degree approaches eta/p") {
  auto state = run(small(10000), 8);
  const auto& g = state.graph();
  const double mean = static_cast<double>(g.edgeCount()) / g.userCount();
  CHECK(std::abs(mean - 14) / 14 < 0.05);
}

TEST_CASE("bounce walk") {
  Rng rng(3);
  SUBCASE("forced return") {
    auto g = Bigraph::withPairs(1);
    std::vector<NodeRef> anchors{{Modality::Item, 0}};
    for (int k = 0; k < 20; ++k) CHECK(bounce(g, anchors, Modality::Item, rng) == anchors[0]);
  }
  SUBCASE("four-cycle lands on either item") {
    Bigraph g;
    g.addNode(Modality::User);
    g.addNode(Modality::User);
    g.addNode(Modality::Item);
    g.addNode(Modality::Item);
    g.addEdge(0, 0);
    g.addEdge(1, 0);
    g.addEdge(1, 1);
    g.addEdge(0, 1);
    std::vector<NodeRef> anchors{{Modality::Item, 0}};
    const int trials = 100000;
    int first = 0;
    for (int k = 0; k < trials; ++k) first += bounce(g, anchors, Modality::Item, rng).index == 0;
    CHECK(std::abs(first - trials / 2.0) <= 3 * std::sqrt(trials * 0.25));
  }
  SUBCASE("matches walk enumeration") {
    // small irregular graph, with an origin user joined to two anchors
    Bigraph g;
    for (int k = 0; k < 5; ++k) g.addNode(Modality::User);
    for (int k = 0; k < 5; ++k) g.addNode(Modality::Item);
    const std::pair<int, int> edges[] = {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {1, 3}, {2, 3},
                                         {2, 4}, {3, 0}, {3, 4}, {4, 1}, {4, 2}, {4, 4}};
    for (auto [u, i] : edges) g.addEdge(u, i);
    const NodeRef origin{Modality::User, 4};
    std::vector<NodeRef> anchors{{Modality::Item, 1}, {Modality::Item, 4}};
    for (auto withOrigin : {false, true}) {
      std::optional<NodeRef> o;
      if (withOrigin) o = origin;
      const auto law = walkLaw(g, anchors, o);
      const int trials = 100000;
      std::map<std::uint32_t, int> hits;
      for (int k = 0; k < trials; ++k) ++hits[bounce(g, anchors, Modality::Item, rng, o).index];
      double mass = 0;
      for (const auto& [idx, prob] : law) {
        mass += prob;
        CHECK(std::abs(hits[idx] - trials * prob) <= 3 * std::sqrt(trials * prob * (1 - prob)) + 1);
      }
      CHECK(mass == doctest::Approx(1.0));
      for (const auto& [idx, count] : hits) CHECK(law.count(idx) == 1);
    }
  }
  SUBCASE("bad anchors") {
    auto g = Bigraph::withPairs(2);
    std::vector<NodeRef> none;
    CHECK_THROWS_AS(bounce(g, none, Modality::Item, rng), std::invalid_argument);
    std::vector<NodeRef> wrong{{Modality::User, 0}};
    CHECK_THROWS_AS(bounce(g, wrong, Modality::Item, rng), std::invalid_argument);
  }
}

TEST_CASE("bounce raises the share of bounced edges with b") {
  GeneratorParams gp = small(2000);
  gp.alpha = gp.beta = 1;
  gp.bounce = 0.5;
  RunState state(gp, 5);
  state.recordHistory(true);
  state.runToEnd();
  std::size_t bounced = 0, total = 0;
  for (const auto& o : state.history()) {
    for (const auto& a : o.attachments) {
      bounced += a.kind == AttachmentKind::Bounced;
      ++total;
    }
  }
  // the first edge of every node cannot bounce: share is about 0.5 * 6/7
  const double share = static_cast<double>(bounced) / total;
  CHECK(share > 0.35);
  CHECK(share < 0.47);
}

TEST_CASE("collision ladder") {
  SUBCASE("dead-end bounces fall back to free items") {
    // every bounce from an initial pair returns to the anchor itself
    GeneratorParams gp;
    gp.m = 3;
    gp.iterations = 1;
    gp.p = 1;
    gp.u = 3;
    gp.alpha = 1;
    gp.bounce = 1;
    RunState state(gp, 1);
    const auto o = state.step();
    CHECK(o.realized == 3);
    CHECK(o.fallbacks == 2);
    CHECK(o.attachments[0].kind == AttachmentKind::Preferential);
    CHECK(o.attachments[1].kind == AttachmentKind::Random);
    CHECK(state.fallbackEdges() == 2);
    CHECK(state.shortfallIterations() == 0);
  }
  SUBCASE("requests beyond the modality size are dropped") {
    GeneratorParams gp;
    gp.m = 2;
    gp.iterations = 1;
    gp.p = 1;
    gp.u = 5;
    RunState state(gp, 1);
    const auto o = state.step();
    CHECK(o.requested == 5);
    CHECK(o.realized == 2);
    CHECK(state.shortfallIterations() == 1);
    CHECK(state.graph().edgeCount() == 4);
  }
}

TEST_CASE("drawAttachment") {
  auto g = Bigraph::withPairs(3);
  g.addEdge(0, 1);
  g.addEdge(2, 1);
  Rng a(4), b(4);
  // preferential = 1 consumes the branch draw, then a preferential draw
  const auto n = drawAttachment(g, Modality::Item, 1.0, a);
  b.uniform01();
  CHECK(n == g.drawPreferential(Modality::Item, b));
  CHECK(a == b);
}

TEST_CASE("parameter patches") {
  GeneratorParams gp = small(10000);
  gp.alpha = 0;
  gp.beta = 0;
  RunState state(gp, 21);
  state.recordHistory(true);
  while (state.t() < 5000) state.step();

  ParamPatch mPatch;
  mPatch.m = 20;
  CHECK_THROWS_AS(state.applyPatch(mPatch), ParamError);
  ParamPatch badPatch;
  badPatch.alpha = 2;
  CHECK_THROWS_AS(state.applyPatch(badPatch), ParamError);
  CHECK(state.params() == gp);
  CHECK(state.patches().empty());

  const Bigraph before = state.graph();
  state.applyPatch({});
  CHECK(state.graph() == before);
  CHECK(state.params() == gp);
  REQUIRE(state.patches().size() == 1);
  CHECK(state.patches()[0].t == 5000);
  CHECK(state.patches()[0].patch.empty());

  ParamPatch alpha;
  alpha.alpha = 1;
  state.applyPatch(alpha);
  CHECK(state.params().alpha == 1);
  state.runToEnd();
  for (const auto& o : state.history()) {
    for (const auto& a : o.attachments) {
      if (o.t <= 5000 || o.newNode.modality == Modality::Item) {
        CHECK(a.kind == AttachmentKind::Random);
      } else {
        CHECK(a.kind == AttachmentKind::Preferential);
      }
    }
  }

  // lowering T below t simply ends the run
  ParamPatch shorter;
  shorter.iterations = 10;
  state.applyPatch(shorter);
  const auto t = state.t();
  state.runToEnd();
  CHECK(state.t() == t);
}
