#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dicr/corpus/dialog.hpp"
#include "dicr/eval/evaluate.hpp"
#include "dicr/kg/linker.hpp"

namespace dicr::cli {

struct ChatReply {
  std::vector<std::string> response;
  // Tokenized top recommendation path; empty for the fallback reply.
  std::vector<std::string> explanation;
  std::vector<kg::Mention> linked;
  bool fallback = false;
};

// Utterance used when nothing in the recent context links to the KG.
std::vector<std::string> fallback_utterance();

// Interactive session over frozen modules.  The context window matches the
// training examples: the last turns flattened with speaker tags.
class ChatSession {
 public:
  explicit ChatSession(const eval::InferenceSetup& setup);

  ChatReply respond(const std::string& utterance);
  void reset() { turns_.clear(); }

 private:
  corpus::TrainingExample current_example() const;

  eval::InferenceSetup setup_;
  kg::EntityLinker linker_;
  std::vector<corpus::Turn> turns_;
};

// Reads utterances line by line until EOF or "/quit"; "/reset" clears the
// history.  Each reply is printed followed by a "path:" line.
void run_repl(ChatSession& session, std::istream& in, std::ostream& out, bool prompt);

}  // namespace dicr::cli
