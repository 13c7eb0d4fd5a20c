// Copyright 2026 The guru Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "guru/corpus/candidates.hpp"
#include "guru/corpus/ingest.hpp"
#include "guru/corpus/overlap.hpp"
#include "guru/corpus/preprocess.hpp"
#include "guru/corpus/split.hpp"
#include "guru/corpus/store.hpp"
#include "guru/corpus/synthetic.hpp"
#include "guru/util/error.hpp"
#include "guru/util/rng.hpp"

using namespace guru;
using namespace guru::corpus;

namespace {

std::vector<Interaction> grid_records(int users, int items, int rating = 5) {
  std::vector<Interaction> out;
  for (int u = 0; u < users; ++u)
    for (int i = 0; i < items; ++i)
      out.push_back({"u" + std::to_string(u), "i" + std::to_string(i), i, rating});
  return out;
}

DomainCorpus corpus_with_frequency(const std::vector<std::int64_t>& freq) {
  DomainCorpus c;
  c.num_items = static_cast<int>(freq.size()) - 1;
  for (int i = 1; i <= c.num_items; ++i) c.item_ids.push_back("i" + std::to_string(i));
  c.item_frequency = freq;
  return c;
}

// Upper alpha-quantile of chi-square via Wilson-Hilferty.
double chi_square_quantile(double df, double z) {
  const double a = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("guru_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("tsv ingest maps fields and counts malformed lines") {
  std::istringstream in(
      "u1\ti9\t1600000000\t5\n"
      "u2\ti3\t1600000001\n"
      "u3\ti4\tlater\t4\n"
      "\n"
      "u4\ti5\t12\t9\n");
  const auto r = ingest(in, RecordFormat::tsv);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0] == Interaction{"u1", "i9", 1600000000, 5});
  CHECK_FALSE(r.records[1].rating.has_value());
  CHECK(r.skipped == 2);
}

TEST_CASE("jsonl ingest handles missing rating and amazon aliases") {
  std::istringstream in(
      "{\"user\":\"u1\",\"item\":\"i1\",\"ts\":10}\n"
      "{\"reviewerID\":\"u2\",\"asin\":\"B0\",\"unixReviewTime\":11,\"overall\":4.0}\n"
      "{\"user\":\"u3\",\"item\":\"i1\",\"ts\":\"x\"}\n"
      "not json\n");
  const auto r = ingest(in, RecordFormat::jsonl);
  REQUIRE(r.records.size() == 2);
  CHECK_FALSE(r.records[0].rating.has_value());
  CHECK(r.records[1] == Interaction{"u2", "B0", 11, 4});
  CHECK(r.skipped == 2);
}

TEST_CASE("unknown format and unreadable file are rejected") {
  CHECK_THROWS_AS(parse_record_format("csv"), ConfigError);
  CHECK_THROWS_AS(ingest_file("/nonexistent/file.tsv", RecordFormat::tsv), InputError);
}

TEST_CASE("rating filter, dedupe and k-core chain drops a thin user") {
  std::vector<Interaction> recs = {
      {"u", "i1", 1, 5}, {"u", "i2", 2, 1}, {"u", "i1", 3, 4}};
  try {
    preprocess(recs, Domain::A);
    FAIL("expected a degenerate corpus");
  } catch (const CorpusDegenerateError& e) {
    CHECK(e.stage() == "k_core");
  }
  CHECK_THROWS_AS(preprocess({}, Domain::A), CorpusDegenerateError);
  try {
    preprocess({{"u", "i1", 1, 1}}, Domain::A);
  } catch (const CorpusDegenerateError& e) {
    CHECK(e.stage() == "rating_filter");
  }
}

TEST_CASE("six users on six items survive and recode to 1..6") {
  auto recs = grid_records(6, 6);
  std::reverse(recs.begin(), recs.end());
  const auto c = preprocess(recs, Domain::A);
  CHECK(c.num_users() == 6);
  CHECK(c.num_items == 6);
  for (const auto& s : c.sequences) CHECK(s == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK(c.item_ids.front() == "i0");
  CHECK_NOTHROW(c.validate(5));
}

TEST_CASE("timestamp ties keep input order and unrated records count as positive") {
  std::vector<Interaction> recs;
  for (int u = 0; u < 5; ++u)
    for (int i = 0; i < 5; ++i)
      recs.push_back({"u" + std::to_string(u), "i" + std::to_string((i + u) % 5), 7, std::nullopt});
  const auto c = preprocess(recs, Domain::B);
  CHECK(c.sequences[0] == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(c.sequences[1] == std::vector<int>{2, 3, 4, 5, 1});
}

TEST_CASE("preprocess output is a k-core fixed point and idempotent") {
  Rng rng(11);
  std::vector<Interaction> recs;
  for (int n = 0; n < 4000; ++n) {
    const int u = static_cast<int>(rng.below(120));
    const int i = static_cast<int>(std::min<std::uint64_t>(rng.below(80), rng.below(80)));
    recs.push_back({"u" + std::to_string(u), "i" + std::to_string(i),
                    static_cast<std::int64_t>(rng.below(1000)),
                    static_cast<int>(1 + rng.below(5))});
  }
  const auto c = preprocess(recs, Domain::A);
  REQUIRE(c.num_users() > 0);
  CHECK_NOTHROW(c.validate(5));
  std::vector<int> item_count(static_cast<std::size_t>(c.num_items) + 1, 0);
  for (const auto& s : c.sequences)
    for (int v : s) ++item_count[static_cast<std::size_t>(v)];
  for (int v = 1; v <= c.num_items; ++v) CHECK(item_count[static_cast<std::size_t>(v)] >= 5);
  CHECK(std::is_sorted(c.user_ids.begin(), c.user_ids.end()));

  const auto again = preprocess(to_interactions(c), Domain::A);
  CHECK(again == c);
}

TEST_CASE("leave-one-out split examples") {
  DomainCorpus c;
  c.num_items = 9;
  c.item_ids.assign(9, "x");
  c.user_ids = {"a", "b"};
  c.sequences = {{3, 7, 9, 2, 5}, {4, 8}};
  const auto split = split_leave_one_out(c);
  CHECK(split.users[0].train == std::vector<int>{3, 7, 9});
  CHECK(*split.users[0].valid == 2);
  CHECK(*split.users[0].test == 5);
  CHECK(split.users[1].train == std::vector<int>{4, 8});
  CHECK_FALSE(split.users[1].valid.has_value());
  CHECK(split.users[1].flagged);
  CHECK(split.num_evaluable() == 1);
  CHECK(history_before(split.users[0], SplitPart::test) == std::vector<int>{3, 7, 9, 2});
  CHECK(target_of(split.users[0], SplitPart::valid) == 2);

  const auto synth = generate_synthetic({}, 3);
  const auto s2 = split_leave_one_out(synth.data.a);
  CHECK(s2.num_evaluable() == synth.data.a.num_users());
  for (std::size_t u = 0; u < s2.users.size(); ++u) {
    auto joined = s2.users[u].train;
    joined.push_back(*s2.users[u].valid);
    joined.push_back(*s2.users[u].test);
    CHECK(joined == synth.data.a.sequences[u]);
  }
}

TEST_CASE("pad_or_truncate examples and round trip") {
  const int V = 10;
  const auto p = pad_or_truncate({3, 7, 9}, 5, V);
  CHECK(p.tokens == std::vector<int>{0, 0, 3, 7, 9, V + 1});
  CHECK(p.mask == std::vector<std::uint8_t>{0, 0, 1, 1, 1, 1});
  CHECK(pad_or_truncate({1, 2, 3, 4, 5}, 3, V).tokens == std::vector<int>{3, 4, 5, V + 1});
  CHECK(pad_or_truncate({1}, 100, V).length() == 101);
  CHECK_THROWS_AS(pad_or_truncate({11}, 5, V), InvariantError);
  CHECK_THROWS_AS(pad_or_truncate({1}, 0, V), InvariantError);

  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> seq(1 + rng.below(12));
    for (auto& v : seq) v = static_cast<int>(1 + rng.below(V));
    const int n = static_cast<int>(1 + rng.below(10));
    const auto padded = pad_or_truncate(seq, n, V);
    const auto keep = std::min<std::size_t>(seq.size(), static_cast<std::size_t>(n));
    CHECK(strip_padding(padded, V) == std::vector<int>(seq.end() - static_cast<long>(keep), seq.end()));
    CHECK(std::count(padded.tokens.begin(), padded.tokens.end(), V + 1) == 1);
    CHECK(padded.tokens.back() == V + 1);
    const auto first = std::find_if(padded.tokens.begin(), padded.tokens.end(),
                                     [](int t) { return t != kPadToken; });
    CHECK(std::all_of(first, padded.tokens.end(), [](int t) { return t != kPadToken; }));
    for (int i = 0; i < padded.length(); ++i)
      CHECK((padded.mask[static_cast<std::size_t>(i)] != 0) ==
            (padded.tokens[static_cast<std::size_t>(i)] != kPadToken));
  }
}

TEST_CASE("subsample_overlap conserves overlapped users") {
  SyntheticParams p;
  p.users_per_domain = 1200;
  p.overlap_count = 1000;
  p.items_per_domain = 200;
  p.mean_len_a = p.mean_len_b = 8;
  const auto ds = generate_synthetic(p, 17).data;
  const double current = ds.overlap_rate();
  SubsampleReport report;
  const auto out = subsample_overlap(ds, current * 0.5, 99, &report);
  CHECK(report.keep_probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.kept + report.moved_to_a + report.moved_to_b == 1000);
  CHECK(static_cast<int>(out.overlap.size()) == report.kept);
  CHECK(out.num_persons() == ds.num_persons());
  CHECK(out.a.num_users() == ds.a.num_users() - report.moved_to_b);
  CHECK(out.b.num_users() == ds.b.num_users() - report.moved_to_a);
  CHECK_NOTHROW(out.validate(5));

  // Each former overlapped person lands in exactly one of the three roles.
  std::set<std::string> in_a(out.a.user_ids.begin(), out.a.user_ids.end());
  std::set<std::string> in_b(out.b.user_ids.begin(), out.b.user_ids.end());
  std::set<std::string> overlapped;
  for (const auto& [ua, ub] : out.overlap) {
    CHECK(out.a.user_ids[static_cast<std::size_t>(ua)] == out.b.user_ids[static_cast<std::size_t>(ub)]);
    overlapped.insert(out.a.user_ids[static_cast<std::size_t>(ua)]);
  }
  int both = 0, only_a = 0, only_b = 0;
  for (const auto& [ua, ub] : ds.overlap) {
    const auto& id = ds.a.user_ids[static_cast<std::size_t>(ua)];
    const bool a = in_a.count(id) > 0, b = in_b.count(id) > 0;
    CHECK((a || b));
    if (a && b) {
      CHECK(overlapped.count(id) == 1);
      ++both;
    } else if (a) {
      ++only_a;
    } else {
      ++only_b;
    }
  }
  CHECK(both == report.kept);
  CHECK(only_a == report.moved_to_a);
  CHECK(only_b == report.moved_to_b);

  CHECK(subsample_overlap(ds, current * 0.5, 99) == out);
  CHECK(subsample_overlap(ds, current, 3) == ds);
  CHECK_THROWS_AS(subsample_overlap(ds, std::min(1.0, current + 0.05), 3), ConfigError);
  CHECK_THROWS_AS(subsample_overlap(ds, 0.0, 3), ConfigError);
  p.overlap_count = 0;
  CHECK_THROWS_AS(subsample_overlap(generate_synthetic(p, 1).data, 0.1, 3), InvariantError);
}

TEST_CASE("candidate set sizes and uniqueness") {
  std::vector<std::int64_t> freq(20002, 1);
  freq[0] = 0;
  const auto big = corpus_with_frequency(freq);
  const auto c201 = sample_candidates(big, 0, 42, 200, 1);
  CHECK(c201.size() == 201);
  const auto c20001 = sample_candidates(big, 3, 42, 20000, 1);
  CHECK(c20001.size() == 20001);
  for (const auto* c : {&c201, &c20001}) {
    CHECK(c->back() == 42);
    CHECK(std::count(c->begin(), c->end(), 42) == 1);
    CHECK(std::set<int>(c->begin(), c->end()).size() == c->size());
    CHECK(std::count(c->begin(), c->end(), kPadToken) == 0);
  }
  CHECK(sample_candidates(big, 0, 42, 200, 1) == c201);
  CHECK(sample_candidates(big, 1, 42, 200, 1) != c201);
  CHECK_THROWS_AS(sample_candidates(big, 0, 42, 20001, 1), InvariantError);
  CHECK_THROWS_AS(sample_candidates(big, 0, 0, 5, 1), InvariantError);
}

TEST_CASE("negatives follow training frequency") {
  // Item 1 is the ground truth; items 2 and 3 have frequencies 9 and 1.
  const auto c = corpus_with_frequency({0, 4, 9, 1});
  int high = 0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const auto cand = sample_candidates(c, 0, 1, 1, static_cast<std::uint64_t>(s));
    REQUIRE(cand.size() == 2);
    high += cand[0] == 2;
  }
  CHECK(std::abs(high / static_cast<double>(draws) - 0.9) <= 0.02);

  // Zero-frequency items fill in only after the weighted ones are used up.
  const auto sparse = corpus_with_frequency({0, 3, 0, 5, 0, 0});
  const auto cand = sample_candidates(sparse, 2, 1, 4, 8);
  CHECK(cand[0] == 3);
  CHECK(std::set<int>(cand.begin() + 1, cand.end() - 1) == std::set<int>{2, 4, 5});
}

TEST_CASE("synthetic corpus satisfies invariants and is deterministic") {
  SyntheticParams p;
  const auto s = generate_synthetic(p, 7);
  CHECK_NOTHROW(s.data.validate(5));
  CHECK(s.data.a.num_users() == 500);
  CHECK(s.data.b.num_users() == 500);
  CHECK(s.data.overlap.size() == 200);
  CHECK(s.data.a.num_items == 300);
  CHECK(s.person_latent.rows() == 800);
  CHECK(s.item_vectors_a.rows() == 300);
  CHECK(std::abs(s.data.a.mean_length() - 30.0) < 1.0);
  for (const auto& [ua, ub] : s.data.overlap)
    CHECK(s.data.a.user_ids[static_cast<std::size_t>(ua)] ==
          s.data.b.user_ids[static_cast<std::size_t>(ub)]);
  CHECK(generate_synthetic(p, 7).data == s.data);
  CHECK_FALSE(generate_synthetic(p, 8).data == s.data);

  p.overlap_count = 0;
  CHECK(generate_synthetic(p, 7).data.overlap.empty());

  SyntheticParams bad;
  bad.mean_len_a = 3;
  CHECK_THROWS_AS(generate_synthetic(bad, 1), ConfigError);
  bad = {};
  bad.overlap_count = 501;
  CHECK_THROWS_AS(generate_synthetic(bad, 1), ConfigError);
}

TEST_CASE("synthetic behavior follows the planted interests") {
  const auto s = generate_synthetic({}, 21);
  // Share of each user's items falling in the cluster of highest planted
  // interest should be near primary_share plus the base share.
  const auto& a = s.data.a;
  double share = 0.0;
  for (int u = 0; u < a.num_users(); ++u) {
    const auto pid = std::find(s.person_ids.begin(), s.person_ids.end(),
                               a.user_ids[static_cast<std::size_t>(u)]) - s.person_ids.begin();
    Eigen::Index top;
    s.person_latent.row(pid).maxCoeff(&top);
    int hits = 0;
    for (int v : a.sequences[static_cast<std::size_t>(u)]) hits += s.item_vectors_a(v - 1, top) > 0.5;
    share += hits / static_cast<double>(a.sequences[static_cast<std::size_t>(u)].size());
  }
  share /= a.num_users();
  CHECK(share > 0.55);
}

TEST_CASE("zero skew gives uniform item frequencies") {
  // Independent seeds give independent statistics, so their sum is
  // chi-square with the summed degrees of freedom.
  double stat = 0.0, df = 0.0;
  int rejected = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = generate_synthetic({}, seed);
    for (const auto* c : {&s.data.a, &s.data.b}) {
      std::vector<double> count(static_cast<std::size_t>(c->num_items) + 1, 0.0);
      double total = 0.0;
      for (const auto& seq : c->sequences)
        for (int v : seq) {
          count[static_cast<std::size_t>(v)] += 1.0;
          total += 1.0;
        }
      const double expected = total / c->num_items;
      double x2 = 0.0;
      for (int v = 1; v <= c->num_items; ++v)
        x2 += std::pow(count[static_cast<std::size_t>(v)] - expected, 2) / expected;
      rejected += x2 > chi_square_quantile(c->num_items - 1, 2.3263);
      stat += x2;
      df += c->num_items - 1;
    }
  }
  CHECK(stat < chi_square_quantile(df, 2.3263));
  CHECK(rejected <= 2);
}

TEST_CASE("dataset store round trips and detects tampering") {
  const auto s = generate_synthetic({}, 4);
  const auto dir = scratch_dir("store");
  const auto manifest = save_dataset(dir, s.data, {{"command", "synth"}, {"seed", 4}});
  const auto loaded = load_dataset(dir);
  CHECK(loaded.data == s.data);
  CHECK(loaded.manifest == manifest);
  CHECK(manifest["counts"]["overlap"] == 200);

  const auto dir2 = scratch_dir("store2");
  CHECK(save_dataset(dir2, s.data, {{"command", "synth"}, {"seed", 4}})["manifest_hash"] ==
        manifest["manifest_hash"]);

  {
    std::ofstream out(dir / "overlap.tsv", std::ios::app);
    out << "0\t0\tx\n";
  }
  CHECK_THROWS_AS(load_dataset(dir), InputError);
  CHECK_THROWS_AS(load_dataset(scratch_dir("missing")), ArtifactMissingError);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

}  // TEST_SUITE
