#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dicr::corpus {

// Word-level vocabulary.  Ids 0..5 are the specials below.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kUsr = 4;
  static constexpr int kSys = 5;
  static const std::vector<std::string>& specials();

  Vocab();
  // Tokens seen at least min_freq times, by descending count then spelling.
  static Vocab build(const std::vector<std::vector<std::string>>& sequences, int min_freq = 2);
  static Vocab load(const std::string& path);
  void save(const std::string& path) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return ids_.contains(token); }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::vector<int> encode(std::span<const std::string> tokens) const;
  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace dicr::corpus
