#include <doctest.h>

#include <stdexcept>
#include <voltkey/bitext.hpp>
#include <voltkey/rng.hpp>

using namespace voltkey;

namespace {

SignalTrace trace_of(std::vector<uint16_t> samples) {
  SignalTrace t;
  t.samples = std::move(samples);
  return t;
}

}  // namespace

TEST_CASE("period slicing on hand values") {
  SignalTrace t = trace_of({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  auto rows = slice_periods(t, 3, 3, 1);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<double>{1, 2, 3});
  CHECK(rows[1] == std::vector<double>{4, 5, 6});
  CHECK(rows[2] == std::vector<double>{7, 8, 9});
  CHECK_THROWS_AS(slice_periods(t, 3, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(slice_periods(t, 0, 1), std::invalid_argument);
}

TEST_CASE("consecutive-period difference on hand values") {
  std::vector<std::vector<double>> rows = {
      {10, 20}, {11, 22}, {13, 21}, {9, 30}};
  auto nps = noise_periods(rows);
  REQUIRE(nps.size() == 2);
  CHECK(nps[0].period_index == 1);
  CHECK(nps[0].values == std::vector<double>{11 - 13, 22 - 21});
  CHECK(nps[1].period_index == 2);
  CHECK(nps[1].values == std::vector<double>{13 - 9, 21 - 30});
  CHECK_THROWS_AS(noise_periods({{1, 2}, {3, 4}}), std::invalid_argument);
  CHECK_THROWS_AS(noise_periods({{1, 2}, {3}, {4, 5}}), std::invalid_argument);
}

TEST_CASE("difference cancels content shared by consecutive periods") {
  // identical periodic content leaves exactly zero
  std::vector<std::vector<double>> rows(5, std::vector<double>{4.0, -1.5, 2.25});
  for (auto& np : noise_periods(rows))
    CHECK(np.values == std::vector<double>{0, 0, 0});
}

TEST_CASE("bin index selection takes the largest magnitude, ties low") {
  NoisePeriod p;
  p.values = {3, -5, 2, 7, -7, 1, 0, 0, 0};
  auto idx = select_indices(p, 3);
  REQUIRE(idx.size() == 3);
  CHECK(idx[0] == 1);  // |-5| beats 3 and 2
  CHECK(idx[1] == 3);  // |7| ties |-7|, earlier wins
  CHECK(idx[2] == 6);  // all zero, first wins
  CHECK_THROWS_AS(select_indices(p, 0), std::invalid_argument);
  CHECK_THROWS_AS(select_indices(p, 10), std::invalid_argument);
}

TEST_CASE("bin remainder samples are never selected") {
  NoisePeriod p;
  p.values = {1, 2, 1, 2, 99};  // 2 bins of 2, sample 4 is remainder
  auto idx = select_indices(p, 2);
  CHECK(idx[0] == 1);
  CHECK(idx[1] == 3);
}

TEST_CASE("bit extraction thresholds against the period mean") {
  NoisePeriod p;
  p.values = {3, -5, 2, 7, -7, 1, 0, 0, 0};  // mean = 1/9
  std::vector<uint16_t> idx = {1, 3, 6};
  auto bits = extract_bits(p, idx);
  CHECK(bits == std::vector<uint8_t>{0, 1, 0});
  std::vector<uint16_t> bad = {40};
  CHECK_THROWS_AS(extract_bits(p, bad), std::invalid_argument);
}

TEST_CASE("full extraction produces schedule and provenance") {
  // 6 rows -> 4 noise periods; use n_p=3, n_b=2, key_len=5
  std::vector<std::vector<double>> rows = {
      {0, 0, 0, 0}, {5, 1, 2, 8}, {1, 4, 2, 1}, {9, 0, 3, 2}, {2, 2, 2, 2}, {0, 1, 0, 3}};
  auto [seq, sched] = generate_sequence(rows, 3, 2, 5, ExtractRole::indexer);
  CHECK(seq.size() == 5);
  CHECK(sched.n_p == 3);
  CHECK(sched.n_b == 2);
  REQUIRE(sched.entries.size() == 6);
  // noise period 1 = rows[1]-rows[2] = {4,-3,0,7}: bins {4,-3},{0,7} -> 0, 3
  CHECK(sched.at(0, 0) == 0);
  CHECK(sched.at(0, 1) == 3);
  // noise period 2 = rows[2]-rows[3] = {-8,4,-1,-1} -> 0, 2 (|-1| ties, low)
  CHECK(sched.at(1, 0) == 0);
  CHECK(sched.at(1, 1) == 2);
  // bits for period 1: mean 2; v[0]=4 -> 1, v[3]=7 -> 1
  CHECK(seq.bits[0] == 1);
  CHECK(seq.bits[1] == 1);
  // provenance names (period_index, sample) pairs in order
  CHECK(seq.provenance[0] == std::pair<uint16_t, uint16_t>{1, 0});
  CHECK(seq.provenance[1] == std::pair<uint16_t, uint16_t>{1, 3});
  CHECK(seq.provenance[4].first == 3);  // truncated mid period 3
}

TEST_CASE("follower reproduces the indexer bits on the same data") {
  Rng rng(909);
  std::vector<std::vector<double>> rows(12, std::vector<double>(40));
  for (auto& r : rows)
    for (auto& v : r) v = rng.gaussian();
  auto [a_seq, a_sched] = generate_sequence(rows, 10, 4, 38, ExtractRole::indexer);
  auto [b_seq, b_sched] = generate_sequence(rows, 10, 4, 38, ExtractRole::follower, &a_sched);
  CHECK(a_seq.bits == b_seq.bits);
  CHECK(a_sched.entries == b_sched.entries);
  CHECK(a_seq.provenance == b_seq.provenance);
}

TEST_CASE("full extraction validates shapes") {
  std::vector<std::vector<double>> rows(6, std::vector<double>(10, 0.0));
  CHECK_THROWS_AS(generate_sequence(rows, 5, 2, 9, ExtractRole::indexer),
                  std::invalid_argument);  // n_p+2 > rows
  CHECK_THROWS_AS(generate_sequence(rows, 3, 2, 7, ExtractRole::indexer),
                  std::invalid_argument);  // key_len > n_p*n_b
  CHECK_THROWS_AS(generate_sequence(rows, 3, 2, 6, ExtractRole::follower, nullptr),
                  std::invalid_argument);
  IndexSchedule wrong;
  wrong.n_p = 2;
  wrong.n_b = 2;
  wrong.entries.assign(4, 0);
  CHECK_THROWS_AS(generate_sequence(rows, 3, 2, 6, ExtractRole::follower, &wrong),
                  std::invalid_argument);
}

TEST_CASE("provenance never references the sync anchor period") {
  Rng rng(910);
  std::vector<std::vector<double>> rows(9, std::vector<double>(30));
  for (auto& r : rows)
    for (auto& v : r) v = rng.gaussian();
  auto [seq, sched] = generate_sequence(rows, 7, 4, 28, ExtractRole::indexer);
  for (auto& [period, sample] : seq.provenance) CHECK(period >= 1);
}
