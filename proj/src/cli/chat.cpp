#include "dicr/cli/chat.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "dicr/corpus/example.hpp"
#include "dicr/corpus/templates.hpp"
#include "dicr/util/text.hpp"

namespace dicr::cli {

std::vector<std::string> fallback_utterance() {
  return {"could", "you", "tell", "me", "about", "a", "movie", "you", "like", "?"};
}

ChatSession::ChatSession(const eval::InferenceSetup& setup) : setup_(setup), linker_(*setup.kg, setup.aliases) {}

corpus::TrainingExample ChatSession::current_example() const {
  corpus::TrainingExample ex;
  const auto first = turns_.size() > corpus::kContextTurns ? turns_.size() - corpus::kContextTurns : 0;
  for (std::size_t i = first; i < turns_.size(); ++i) {
    const auto& t = turns_[i];
    ex.context.push_back(t.speaker == corpus::Speaker::kUser ? corpus::kUserTag : corpus::kSystemTag);
    ex.context.insert(ex.context.end(), t.tokens.begin(), t.tokens.end());
    for (const auto& m : t.mentions) {
      if (std::find(ex.context_entities.begin(), ex.context_entities.end(), m.entity) == ex.context_entities.end()) {
        ex.context_entities.push_back(m.entity);
      }
      ex.last_mentioned = m.entity;
    }
  }
  return ex;
}

ChatReply ChatSession::respond(const std::string& utterance) {
  ChatReply reply;
  corpus::Turn user;
  user.speaker = corpus::Speaker::kUser;
  user.tokens = text::tokenize(utterance);
  user.mentions = linker_.link(user.tokens);
  reply.linked = user.mentions;
  turns_.push_back(user);

  const auto ex = current_example();
  if (ex.context_entities.empty()) {
    reply.response = fallback_utterance();
    reply.fallback = true;
  } else {
    auto inference = eval::infer(setup_, ex);
    reply.response = std::move(inference.response);
    if (!inference.candidates.empty()) {
      const corpus::RelationTemplates defaults;
      const auto& top = inference.candidates.front();
      reply.explanation = top.length() == 0
                              ? text::split_words(setup_.kg->entity_label(top.start()))
                              : corpus::tokenize_path(top, *setup_.kg,
                                                      setup_.templates != nullptr ? *setup_.templates : defaults);
    }
    if (reply.response.empty()) reply.response = fallback_utterance();
  }

  corpus::Turn system;
  system.speaker = corpus::Speaker::kSystem;
  system.tokens = reply.response;
  system.mentions = linker_.link(system.tokens);
  turns_.push_back(std::move(system));
  return reply;
}

void run_repl(ChatSession& session, std::istream& in, std::ostream& out, bool prompt) {
  std::string line;
  while (true) {
    if (prompt) out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    const auto body = text::trim(line);
    if (body == "/quit") break;
    if (body == "/reset") {
      session.reset();
      continue;
    }
    if (body.empty()) continue;
    const auto reply = session.respond(std::string(body));
    out << text::join(reply.response) << '\n';
    out << "path: " << (reply.explanation.empty() ? "(none)" : text::join(reply.explanation)) << '\n';
  }
}

}  // namespace dicr::cli
