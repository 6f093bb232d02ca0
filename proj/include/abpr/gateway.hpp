#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "abpr/refine.hpp"
#include "abpr/task.hpp"

namespace abpr::llm {

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 1.0;
  long long max_output_tokens = 16384;
  std::string provider_id;
  std::string model_id;
  std::string provider_options;   // opaque pass-through
  unsigned long long nonce = 0;   // iteration index within a run
  std::string sequence_key;       // "<task-id>:<seed>"; mock-script addressing
};

std::string request_digest(const ChatRequest& req);

class Transport {
public:
  virtual ~Transport() = default;
  /// Returns the assistant text; throws Error(Transport) on failure.
  virtual std::string complete(const ChatRequest& req) = 0;
};

struct PromptBundle {
  std::string system_template;
  std::string first_template;  // placeholder: {examples}
  std::string fix_template;    // placeholders per render_fix_prompt
  static const PromptBundle& standard();
};

/// Substitutes {name} placeholders; throws Error(PlaceholderUnbound) when the
/// template names a placeholder missing from `values`.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

/// Training pairs in permuted order as labeled digit grids, then the
/// challenge inputs. The challenge section is omitted when there are none.
std::string render_examples(const harness::TaskRecord& task,
                            const std::vector<size_t>& permutation);
std::string render_examples_seeded(const harness::TaskRecord& task, unsigned long long seed);
std::string render_challenges(const harness::TaskRecord& task);

std::string render_first_prompt(const harness::TaskRecord& task, unsigned long long seed);

/// Fix-prompt instantiation, capped at budget_chars with the trace section
/// truncated first.
std::string render_fix_prompt(const refine::RefineContext& ctx, long long budget_chars);

struct Extracted {
  std::string source;
  bool fenced = true;  // false when no fenced block existed
};

/// Contents of the last fenced code block; the whole trimmed response when
/// no fence exists. Throws Error(EmptyResponse) on blank input.
Extracted extract_code_block(const std::string& response);

/// Canned-response transport: responses come from a script mapping request
/// digests or per-run sequence indices to texts. A pure function of
/// (request digest, sequence key, nonce).
class MockTransport : public Transport {
public:
  static MockTransport from_file(const std::string& path);
  static MockTransport from_json(const std::string& json_text);
  std::string complete(const ChatRequest& req) override;

private:
  std::map<std::string, std::string> by_digest_;
  std::map<std::string, std::vector<std::string>> by_sequence_;
  std::string default_response_;
  bool has_default_ = false;
};

/// HTTP chat-completion transport with retry/backoff and a global in-flight
/// cap. Credentials come from <PROVIDER>_API_KEY; base URL override from
/// <PROVIDER>_BASE_URL.
class HttpTransport : public Transport {
public:
  explicit HttpTransport(int max_in_flight = 8, int max_attempts = 3,
                         long long backoff_ms = 1000);
  std::string complete(const ChatRequest& req) override;

private:
  std::string complete_once(const ChatRequest& req);
  int max_in_flight_;
  int max_attempts_;
  long long backoff_ms_;
};

/// Production refiner: renders the prompts, calls the transport, extracts the
/// code block.
class LlmRefiner : public refine::Refiner {
public:
  LlmRefiner(Transport& transport, const harness::RunConfig& config, std::string task_id)
      : transport_(transport), config_(config), task_id_(std::move(task_id)) {}
  std::string initial(const harness::TaskRecord& task, unsigned long long seed) override;
  std::string refine(const refine::RefineContext& ctx) override;

private:
  ChatRequest base_request(unsigned long long seed, unsigned long long nonce) const;
  Transport& transport_;
  const harness::RunConfig& config_;
  std::string task_id_;
};

}  // namespace abpr::llm
