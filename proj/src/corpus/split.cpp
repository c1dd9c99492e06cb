#include "dicr/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dicr/error.hpp"
#include "dicr/util/rng.hpp"

namespace dicr::corpus {

CorpusSplit split_corpus(const std::vector<Dialog>& dialogs, std::array<double, 3> ratio, std::uint64_t seed) {
  if (dialogs.size() < 3) throw ConfigError("need at least 3 dialogs to split");
  for (double r : ratio) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("split ratios must be positive");
  }
  const double total = ratio[0] + ratio[1] + ratio[2];
  const auto n = dialogs.size();
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio[0] / total));
  auto n_valid = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio[1] / total));
  // Keep every part non-empty.
  n_train = std::clamp<std::size_t>(n_train, 1, n - 2);
  n_valid = std::clamp<std::size_t>(n_valid, 1, n - 1 - n_train);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  CorpusSplit out;
  for (std::size_t i = 0; i < n; ++i) {
    const Dialog& d = dialogs[order[i]];
    if (i < n_train) {
      out.train.push_back(d);
    } else if (i < n_train + n_valid) {
      out.valid.push_back(d);
    } else {
      out.test.push_back(d);
    }
  }
  return out;
}

}  // namespace dicr::corpus
