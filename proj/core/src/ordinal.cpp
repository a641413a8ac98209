#include "rascore/ordinal.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace rascore {

std::vector<double> ordinal_encode(int k, int classes) {
  if (classes < 2) throw InvalidInput("ordinal_encode: class count < 2");
  if (k < 0 || k >= classes) throw InvalidInput("ordinal_encode: class index out of range");
  std::vector<double> v(classes, 0.0);
  for (int i = 0; i <= k; ++i) v[i] = 1.0;
  return v;
}

int ordinal_decode(const std::vector<double>& v) {
  int prefix = 0;
  while (prefix < static_cast<int>(v.size()) && v[prefix] > 0.5) ++prefix;
  return std::max(0, prefix - 1);
}

std::vector<std::size_t> undersample_indices(const std::vector<int>& labels, std::uint64_t seed) {
  std::map<int, std::int64_t> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() < 2) throw InvalidInput("undersample: fewer than two classes present");

  std::int64_t zero_count = counts.count(0) ? counts[0] : 0;
  std::int64_t second = 0;
  for (const auto& [cls, c] : counts)
    if (cls != 0) second = std::max(second, c);

  std::vector<std::size_t> keep;
  if (zero_count <= second) {
    keep.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) keep[i] = i;
    return keep;
  }

  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 0) zeros.push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(zeros.begin(), zeros.end(), rng);
  zeros.resize(static_cast<std::size_t>(second));
  std::vector<std::uint8_t> kept_zero(labels.size(), 0);
  for (auto i : zeros) kept_zero[i] = 1;

  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != 0 || kept_zero[i]) keep.push_back(i);
  return keep;
}

}  // namespace rascore
