#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "rascore/ordinal.hpp"

using namespace rascore;

TEST_CASE("ordinal encoding examples") {
  CHECK(ordinal_encode(0, 3) == std::vector<double>{1, 0, 0});
  CHECK(ordinal_encode(1, 3) == std::vector<double>{1, 1, 0});
  CHECK(ordinal_encode(2, 3) == std::vector<double>{1, 1, 1});
  CHECK_THROWS_AS(ordinal_encode(3, 3), InvalidInput);
  CHECK_THROWS_AS(ordinal_encode(-1, 3), InvalidInput);
}

TEST_CASE("encode/decode round-trips for every k < C <= 16") {
  for (int c = 2; c <= 16; ++c)
    for (int k = 0; k < c; ++k) CHECK(ordinal_decode(ordinal_encode(k, c)) == k);
}

TEST_CASE("decode uses the consecutive prefix above 0.5") {
  CHECK(ordinal_decode({0.6, 0.7, 0.2}) == 1);
  CHECK(ordinal_decode({0.6, 0.2, 0.9}) == 0);   // gap breaks the prefix
  CHECK(ordinal_decode({0.4, 0.9, 0.9}) == 0);   // no leading 1: floor at 0
  CHECK(ordinal_decode({0.51, 0.51, 0.51}) == 2);
  CHECK(ordinal_decode({0.5, 0.9}) == 0);        // strict comparison
}

TEST_CASE("decode is monotone under elementwise increase") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> d(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const int c = 2 + static_cast<int>(rng() % 10);
    std::vector<double> v(c), w(c);
    for (int j = 0; j < c; ++j) {
      v[j] = d(rng);
      w[j] = std::min(1.0, v[j] + d(rng) * 0.5);
    }
    CHECK(ordinal_decode(w) >= ordinal_decode(v));
  }
}

TEST_CASE("undersampling reduces class 0 to the second-largest count") {
  std::mt19937_64 rng(17);
  std::vector<int> labels;
  for (int i = 0; i < 300; ++i) labels.push_back(0);
  for (int i = 0; i < 80; ++i) labels.push_back(1);
  for (int i = 0; i < 50; ++i) labels.push_back(2);
  for (int i = 0; i < 30; ++i) labels.push_back(3);
  std::shuffle(labels.begin(), labels.end(), rng);

  const auto kept = undersample_indices(labels, 42);
  std::map<int, int> counts;
  for (auto i : kept) ++counts[labels[i]];
  CHECK(counts[0] == 80);  // matches the largest non-zero class
  CHECK(counts[1] == 80);
  CHECK(counts[2] == 50);
  CHECK(counts[3] == 30);

  // Untouched classes keep every index, and order is preserved.
  CHECK(std::is_sorted(kept.begin(), kept.end()));
  std::size_t non_zero_in = 0, non_zero_kept = 0;
  for (auto l : labels) non_zero_in += l != 0;
  for (auto i : kept) non_zero_kept += labels[i] != 0;
  CHECK(non_zero_in == non_zero_kept);

  // Deterministic under the seed, different under another.
  CHECK(undersample_indices(labels, 42) == kept);
  CHECK(undersample_indices(labels, 43) != kept);
}

TEST_CASE("undersampling leaves balanced label sets unchanged") {
  std::vector<int> labels = {0, 1, 0, 1, 2, 2};
  const auto kept = undersample_indices(labels, 1);
  CHECK(kept.size() == labels.size());
}
