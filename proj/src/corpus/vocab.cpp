#include "dicr/corpus/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "dicr/error.hpp"

namespace dicr::corpus {

const std::vector<std::string>& Vocab::specials() {
  static const std::vector<std::string> kSpecials = {"<pad>", "<unk>", "<bos>", "<eos>", "<usr>", "<sys>"};
  return kSpecials;
}

Vocab::Vocab() {
  for (const auto& s : specials()) add(s);
}

void Vocab::add(const std::string& token) {
  if (ids_.contains(token)) return;
  ids_.emplace(token, size());
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& sequences, int min_freq) {
  std::map<std::string, long> counts;
  for (const auto& seq : sequences) {
    for (const auto& t : seq) ++counts[t];
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [token, count] : ranked) {
    if (count >= min_freq) v.add(token);
  }
  return v;
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open vocabulary " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  const auto& sp = specials();
  if (lines.size() < sp.size() || !std::equal(sp.begin(), sp.end(), lines.begin())) {
    throw ParseError("vocabulary " + path + " does not start with the special tokens");
  }
  Vocab v;
  for (std::size_t i = sp.size(); i < lines.size(); ++i) {
    if (v.contains(lines[i])) throw ParseError("duplicate token '" + lines[i] + "'", i + 1);
    v.add(lines[i]);
  }
  return v;
}

void Vocab::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  for (const auto& t : tokens_) os << t << '\n';
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

}  // namespace dicr::corpus
