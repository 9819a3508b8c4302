#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "evfilter/errors.hpp"
#include "evfilter/features.hpp"
#include "test_support.hpp"

using namespace evfilter;
using evfilter::test::make_bundle;
using evfilter::test::make_record;

namespace {

std::vector<LabeledSample> samples_with(std::size_t pos, std::size_t neg) {
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < pos + neg; ++i) {
    LabeledSample s;
    s.features[0] = static_cast<double>(i);
    s.label = i < pos ? 1 : 0;
    s.record_id = std::to_string(i);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("sole empty record gets padded neutral features") {
  SlidingWindow w;
  const auto b = make_bundle(make_record("1", 1000, "", 5, 6, 7));
  w.insert(b);
  const auto f = assemble_features(*b, w.stats());
  const std::vector<double> expected = {0, 0, 0, 0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  CHECK(std::vector<double>(f.values().begin(), f.values().end()) == expected);
  CHECK(assemble_features(*b, w.stats(), FeatureOptions{true}).size() == 16);
}

TEST_CASE("token scores follow the crafted window counts") {
  SlidingWindow w;
  w.insert(make_bundle(make_record("1", 1000, "aa aa aa")));
  w.insert(make_bundle(make_record("2", 1001, "bb")));
  const auto target = make_bundle(make_record("3", 1002, "cc bb aa #tag http://x.y", 10, 0, 0));
  w.insert(target);

  // Oracle recount of the crafted window.
  std::map<std::string, int> counts;
  for (const auto& b : w.bundles()) {
    for (const auto& e : b->events) {
      if (e.is<TokenPayload>()) ++counts[e.as<TokenPayload>().token];
    }
  }
  CHECK(counts == std::map<std::string, int>{{"aa", 4}, {"bb", 2}, {"cc", 1}});

  const auto f = assemble_features(*target, w.stats());
  CHECK(f[feature::kHashtag] == 1.0);
  CHECK(f[feature::kLink] == 1.0);
  CHECK(f[2] == 1.0);
  CHECK(f[3] == 0.5);
  CHECK(f[4] == 0.25);
  CHECK(f[5] == 0.0);
  CHECK(f[feature::kVariation] == 1.0);  // nothing in the previous window
  CHECK(f[feature::kVariation + 3] == 0.5);
  CHECK(f[feature::kFollowers] == 1.0);
  CHECK(f[feature::kFriends] == 0.5);

  const auto top = top_tokens(target->events, w.stats());
  REQUIRE(top.size() == 3);
  CHECK(top[0].token == "aa");
  CHECK(top[2].token == "cc");
}

TEST_CASE("top token ties break lexicographically") {
  SlidingWindow w;
  const auto b = make_bundle(make_record("1", 1, "zz yy xx ww vv uu"));
  w.insert(b);
  const auto top = top_tokens(b->events, w.stats());
  REQUIRE(top.size() == 5);
  CHECK(top[0].token == "uu");
  CHECK(top[4].token == "yy");
}

TEST_CASE("label_by_retweet") {
  SlidingWindow w;
  const auto a = make_bundle(make_record("A", 0, "quokka festival news"));
  w.insert(a);
  w.insert(make_bundle(make_record("other", 30'000, "unrelated words")));
  CHECK(label_by_retweet(*a, w.snapshot(1).stats()) == 0);

  auto rt = make_record("R", 60'000, "RT @someone: quokka festival news");
  rt.retweet_of = "A";
  const auto rt_bundle = make_bundle(rt);
  w.insert(rt_bundle);
  const auto snap = w.snapshot(2);
  CHECK(label_by_retweet(*a, snap.stats()) == 1);
  CHECK(label_by_retweet(*snap.records()[1], snap.stats()) == 0);
  CHECK(label_by_retweet(*rt_bundle, snap.stats()) == 0);  // its own retweet event does not count

  // Retweet after A has left the window.
  SlidingWindow late;
  late.insert(a);
  late.insert(make_bundle(make_record("B", 119'000, "other stuff")));
  CHECK(label_by_retweet(*a, late.snapshot(1).stats()) == 0);
  auto late_rt = rt;
  late_rt.ts = 130'000;
  late.insert(make_bundle(late_rt));
  const auto after = late.snapshot(2);
  CHECK(std::none_of(after.records().begin(), after.records().end(),
                     [](const WindowRecordPtr& b) { return b->record.id == "A"; }));
}

TEST_CASE("body match labels retweets without original id") {
  SlidingWindow w;
  const auto a = make_bundle(make_record("A", 0, "Quokka festival, news!"));
  w.insert(a);
  const auto rt = make_bundle(make_record("R", 1000, "RT @x quokka festival news"));
  w.insert(rt);
  CHECK(label_by_retweet(*a, w.stats()) == 1);
  CHECK(label_by_retweet(*rt, w.stats()) == 0);
}

TEST_CASE("oversample balances classes") {
  const auto samples = samples_with(2, 98);
  const auto balanced = oversample(samples, 3);
  CHECK(balanced.size() == 196);
  CHECK(std::count_if(balanced.begin(), balanced.end(), [](const auto& s) { return s.label == 1; }) == 98);
  for (const auto& s : samples) CHECK(std::find(balanced.begin(), balanced.end(), s) != balanced.end());
  CHECK(balanced == oversample(samples, 3));

  const auto even = samples_with(50, 50);
  auto shuffled = oversample(even, 9);
  CHECK(shuffled.size() == 100);
  CHECK_FALSE(shuffled == even);
  std::sort(shuffled.begin(), shuffled.end(), [](const auto& x, const auto& y) { return x.features[0] < y.features[0]; });
  CHECK(shuffled == even);

  CHECK_THROWS_AS(oversample(samples_with(0, 10), 1), DegenerateWindow);
  CHECK_THROWS_AS(oversample(samples_with(10, 0), 1), DegenerateWindow);
}

TEST_CASE("sample CSV round trip") {
  auto samples = samples_with(3, 4);
  samples[2].features[5] = 0.1 + 0.2;
  samples[2].window_index = 17;
  std::stringstream s;
  write_samples_csv(s, samples);
  const auto header = s.str().substr(0, s.str().find('\n'));
  CHECK(header == "f0,f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,f12,f13,f14,label,record_id,window_index");
  CHECK(read_samples_csv(s) == samples);
}
