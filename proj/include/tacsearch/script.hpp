#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tacsearch/kernel.hpp"

namespace tacsearch {

struct ParseError {
  int line = 0;
  int column = 0;
  std::string message;
};

struct ScriptAst;
using ScriptPtr = std::shared_ptr<const ScriptAst>;

// Script syntax tree. Block is the top-level dot-sequence; TacBy covers the
// "<tac> <term> by <tac>" forms (rewrite-by / assert-by).
struct ScriptAst {
  enum class Kind { Atomic, Seq, Now, Try, TacBy, MultiArg, Block };
  Kind kind;
  // Atomic / TacBy / MultiArg
  std::string tactic;
  std::optional<std::string> raw_arg;     // Atomic: unclassified argument text
  std::vector<std::string> raw_args;      // MultiArg
  ScriptPtr left, right;                  // Seq; Now/Try/TacBy use left
  std::vector<ScriptPtr> stmts;           // Block
};

ScriptPtr s_atomic(std::string tactic, std::optional<std::string> arg = std::nullopt);
ScriptPtr s_seq(ScriptPtr l, ScriptPtr r);
ScriptPtr s_now(ScriptPtr t);
ScriptPtr s_try(ScriptPtr t);
ScriptPtr s_tacby(std::string tactic, std::string term, ScriptPtr tac);
ScriptPtr s_multi(std::string tactic, std::vector<std::string> args);
ScriptPtr s_block(std::vector<ScriptPtr> stmts);

std::string script_to_string(const ScriptPtr& s);

struct Theorem {
  std::string name;
  PropPtr statement;
  ScriptPtr script;
};

struct CorpusFile {
  std::string name;
  std::vector<std::pair<std::string, PropPtr>> definitions;
  std::vector<Theorem> theorems;
};

// Script-only entry point ("intro. split; assumption.").
std::variant<ScriptPtr, ParseError> parse_script(const std::string& text);
// Proposition concrete syntax.
std::variant<PropPtr, ParseError> parse_prop(const std::string& text);
// Whole ".vs" corpus file.
std::variant<CorpusFile, ParseError> parse_file(const std::string& name, const std::string& text);

std::string file_to_string(const CorpusFile& f);

// Eliminates Now / TacBy / MultiArg and rewrites try-prefixed tactics into
// learned atomic names registered in `reg`. Idempotent.
ScriptPtr desugar(const ScriptPtr& ast, TacticRegistry& reg);

struct LinearScript {
  std::vector<ProofCommand> commands;
  bool ok = false;
};

// Replays a desugared script tactical-style (";" runs the right side on every
// child) and checks that it closes the theorem.
bool tactical_replay(const Env& env, const TacticRegistry& reg, const PropPtr& theorem,
                     const ScriptPtr& desugared);

// Expands ";" into a flat command sequence by replay. ok=false when the
// replay fails or obligations remain.
LinearScript linearize(const Env& env, const TacticRegistry& reg, const ScriptPtr& desugared,
                       const PropPtr& theorem);

// True when the raw script is already first-order (a dot-sequence of atomic
// commands, no tacticals).
bool is_first_order(const ScriptPtr& ast);

}  // namespace tacsearch
