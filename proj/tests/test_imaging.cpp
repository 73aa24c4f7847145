#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "qds/imaging.hpp"
#include "qds/rng.hpp"

using namespace qds;

TEST_CASE("retrieve counts sig hits per slot") {
  RecordBlock block;
  block.records = {{1, 0}, {2, 3}};
  SignatureElements sig{{1, 5}};
  const GhostImage img = retrieve(sig, block, 10);
  REQUIRE(img.counts.size() == 10);
  CHECK(img.counts[0] == 1);
  for (int i = 1; i < 10; ++i) CHECK(img.counts[i] == 0);
  CHECK(img.block_mean == doctest::Approx(0.2));

  const GhostImage empty = retrieve({}, block, 10);
  for (auto c : empty.counts) CHECK(c == 0);
}

TEST_CASE("decision boundary at the reference scale") {
  GhostImage img;
  img.counts.assign(10, 0);
  img.block_mean = 561.93;
  img.sigma = std::sqrt(561.93 / 2.0);
  // boundary = 280.97 - 16.76 = 264.2
  CHECK(img.block_mean / 2.0 - img.sigma == doctest::Approx(264.2).epsilon(1e-3));

  img.counts[0] = 268;  // the observed signed-slot count, rounded down
  img.counts[1] = 10;
  Message m = decide_bits(img);
  CHECK(m.bits[0] == 1);
  CHECK(m.bits[1] == 0);

  img.counts[0] = 265;
  CHECK(decide_bits(img).bits[0] == 1);
  img.counts[0] = 264;  // just below 264.2
  CHECK(decide_bits(img).bits[0] == 0);
}

TEST_CASE("all-zero counts decide the all-zero message") {
  GhostImage img;
  img.counts.assign(10, 0);
  img.block_mean = 100.0;
  img.sigma = std::sqrt(50.0);
  const Message m = decide_bits(img);
  for (auto b : m.bits) CHECK(b == 0);
}

TEST_CASE("undecidable image throws") {
  GhostImage img;
  img.counts.assign(10, 0);
  img.block_mean = 0.0;
  CHECK_THROWS(decide_bits(img));
  CHECK_THROWS(noise_factors(img, Message::from_string("0000000000")));
}

TEST_CASE("noise factors of zero slots") {
  GhostImage img;
  img.counts.assign(10, 0);
  img.block_mean = 561.93;
  img.sigma = std::sqrt(561.93 / 2.0);
  img.counts[0] = 268;
  img.counts[1] = 10;
  const Message decided = decide_bits(img);
  const NoiseReport rep = noise_factors(img, decided);
  REQUIRE(rep.zero_slots.size() == 9);
  CHECK(rep.zero_slots[0] == 1);
  CHECK(rep.factors[0] == doctest::Approx(10.0 / 280.965).epsilon(1e-6));
  CHECK(rep.factors[0] == doctest::Approx(0.0356).epsilon(2e-3));
  CHECK(rep.factors[1] == 0.0);  // counts 0 -> f 0
  CHECK(rep.max_factor == doctest::Approx(10.0 / 280.965));
}

TEST_CASE("retrieval matches exhaustive cross-tabulation") {
  Rng rng(0xdecaf);
  for (int trial = 0; trial < 300; ++trial) {
    const int slots = 2 + static_cast<int>(rng.below(9));
    RecordBlock block;
    const int n = 1 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i)
      block.records.push_back({static_cast<std::int64_t>(rng.below(30)),
                               static_cast<int>(rng.below(slots))});
    block.sort_by_frame();
    // enforce at most one record per frame
    auto& r = block.records;
    r.erase(std::unique(r.begin(), r.end(),
                        [](auto& a, auto& b) { return a.frame == b.frame; }),
            r.end());
    SignatureElements sig;
    const int m = static_cast<int>(rng.below(25));
    for (int i = 0; i < m; ++i)
      sig.frames.push_back(static_cast<std::int64_t>(rng.below(30)));
    sig.normalize();

    const GhostImage img = retrieve(sig, block, slots);
    std::vector<std::int64_t> oracle(slots, 0);
    for (auto f : sig.frames)
      for (const auto& rec : block.records)
        if (rec.frame == f) ++oracle[rec.slot];
    REQUIRE(img.counts == oracle);
    CHECK(img.block_mean ==
          doctest::Approx(static_cast<double>(block.size()) / slots));
    CHECK(img.sigma == doctest::Approx(std::sqrt(img.block_mean / 2.0)));
  }
}
