#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dicr/corpus/dialog.hpp"

namespace dicr::corpus {

struct CorpusSplit {
  std::vector<Dialog> train;
  std::vector<Dialog> valid;
  std::vector<Dialog> test;
};

// Dialog-level shuffled partition.  Every ratio must be positive.
CorpusSplit split_corpus(const std::vector<Dialog>& dialogs, std::array<double, 3> ratio, std::uint64_t seed);

}  // namespace dicr::corpus
