#include "abpr/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "abpr/util.hpp"
#include "json.hpp"

namespace abpr::llm {

using nlohmann::json;

std::string request_digest(const ChatRequest& req) {
  std::ostringstream os;
  os << req.provider_id << '\x1f' << req.model_id << '\x1f' << req.temperature << '\x1f'
     << req.system << '\x1f' << req.user;
  return digest_hex(os.str());
}

// ---------------------------------------------------------------------------
// Template rendering
// ---------------------------------------------------------------------------

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  size_t i = 0;
  while (i < tmpl.size()) {
    char c = tmpl[i];
    if (c == '{') {
      size_t end = tmpl.find('}', i + 1);
      if (end != std::string::npos) {
        std::string name = tmpl.substr(i + 1, end - i - 1);
        bool placeholder = !name.empty();
        for (char nc : name)
          if (!(std::islower(static_cast<unsigned char>(nc)) || nc == '_')) placeholder = false;
        if (placeholder) {
          auto it = values.find(name);
          if (it == values.end())
            throw Error(ErrorKind::PlaceholderUnbound, "unbound placeholder {" + name + "}");
          out += it->second;
          i = end + 1;
          continue;
        }
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

namespace {

std::string join_blocks(const std::vector<std::string>& blocks) {
  std::string out;
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n";
    out += blocks[i];
  }
  return out;
}

std::string chomp(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s + "\n";
}

}  // namespace

std::string render_examples(const harness::TaskRecord& task,
                            const std::vector<size_t>& permutation) {
  std::vector<std::string> blocks;
  for (size_t display = 0; display < permutation.size(); ++display) {
    const auto& pair = task.train[permutation[display]];
    std::string label = "Example " + std::to_string(display + 1);
    blocks.push_back(chomp(label + " - Input:\n" + bk::render_grid(pair.input) + label +
                           " - Output:\n" + bk::render_grid(pair.output)));
  }
  for (size_t j = 0; j < task.test.size(); ++j)
    blocks.push_back(chomp("Challenge " + std::to_string(j + 1) + " - Input:\n" +
                           bk::render_grid(task.test[j].input)));
  return join_blocks(blocks);
}

std::string render_examples_seeded(const harness::TaskRecord& task, unsigned long long seed) {
  return render_examples(task, seeded_permutation(task.train.size(), seed));
}

std::string render_challenges(const harness::TaskRecord& task) {
  std::vector<std::string> blocks;
  for (size_t j = 0; j < task.test.size(); ++j)
    blocks.push_back(chomp("Challenge " + std::to_string(j + 1) + " - Input:\n" +
                           bk::render_grid(task.test[j].input)));
  return join_blocks(blocks);
}

std::string render_first_prompt(const harness::TaskRecord& task, unsigned long long seed) {
  return render_template(PromptBundle::standard().first_template,
                         {{"examples", render_examples_seeded(task, seed)}});
}

std::string render_fix_prompt(const refine::RefineContext& ctx, long long budget_chars) {
  size_t attempts = 0;
  for (size_t pos = 0; (pos = ctx.attempts_history.find("--- Attempt", pos)) != std::string::npos;
       ++pos)
    ++attempts;

  std::string trace_detail = ctx.trace_detail;
  if (!ctx.buggy_nodes.empty())
    trace_detail += "\nCANDIDATE BUGGY NODES (from explicit localization):\n" + ctx.buggy_nodes;

  auto render = [&](const std::string& trace) {
    return render_template(
        PromptBundle::standard().fix_template,
        {{"current_iteration", std::to_string(ctx.iteration)},
         {"max_iterations", std::to_string(ctx.max_iterations)},
         {"iteration_count", std::to_string(ctx.iteration)},
         {"history_description",
          "the last " + std::to_string(attempts) + " attempts and their outcomes"},
         {"history_type", "previous attempts ordered oldest-first"},
         {"attempts_history", ctx.attempts_history},
         {"iteration", std::to_string(ctx.iteration)},
         {"trace_detail", trace},
         {"challenge_diagrams", ctx.task ? render_challenges(*ctx.task) : std::string()}});
  };

  std::string out = render(trace_detail);
  if (budget_chars > 0 && static_cast<long long>(out.size()) > budget_chars) {
    static const std::string marker = "\n... (trace truncated to fit the prompt budget)";
    long long overage = static_cast<long long>(out.size()) - budget_chars;
    long long keep = static_cast<long long>(trace_detail.size()) - overage -
                     static_cast<long long>(marker.size());
    if (keep < 0) keep = 0;
    trace_detail = trace_detail.substr(0, static_cast<size_t>(keep)) + marker;
    out = render(trace_detail);
    if (static_cast<long long>(out.size()) > budget_chars)
      out.resize(static_cast<size_t>(budget_chars));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Code-block extraction
// ---------------------------------------------------------------------------

Extracted extract_code_block(const std::string& response) {
  auto is_blank = [](const std::string& s) {
    for (char c : s)
      if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
  };
  if (is_blank(response)) throw Error(ErrorKind::EmptyResponse, "blank model response");

  // Collect fence positions (``` at line start, optional language tag).
  std::vector<size_t> fences;
  size_t pos = 0;
  while ((pos = response.find("```", pos)) != std::string::npos) {
    if (pos == 0 || response[pos - 1] == '\n') fences.push_back(pos);
    pos += 3;
  }
  if (fences.empty()) {
    std::string trimmed = response;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
      trimmed.erase(trimmed.begin());
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.pop_back();
    return {trimmed, false};
  }
  // The last complete block wins; an unclosed final fence runs to the end.
  size_t open, close = std::string::npos;
  if (fences.size() % 2 == 0) {
    open = fences[fences.size() - 2];
    close = fences[fences.size() - 1];
  } else {
    open = fences.back();
  }
  size_t body_start = response.find('\n', open);
  if (body_start == std::string::npos) return {"", true};
  ++body_start;
  std::string body = close == std::string::npos
                         ? response.substr(body_start)
                         : response.substr(body_start, close - body_start);
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return {body, true};
}

// ---------------------------------------------------------------------------
// Mock transport
// ---------------------------------------------------------------------------

MockTransport MockTransport::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot open mock script: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

MockTransport MockTransport::from_json(const std::string& json_text) {
  MockTransport t;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("mock script is not valid JSON: ") + e.what());
  }
  if (j.contains("by_digest"))
    for (auto& [k, v] : j["by_digest"].items()) t.by_digest_[k] = v.get<std::string>();
  if (j.contains("by_sequence"))
    for (auto& [k, v] : j["by_sequence"].items())
      t.by_sequence_[k] = v.get<std::vector<std::string>>();
  if (j.contains("default")) {
    t.default_response_ = j["default"].get<std::string>();
    t.has_default_ = true;
  }
  return t;
}

std::string MockTransport::complete(const ChatRequest& req) {
  auto d = by_digest_.find(request_digest(req));
  if (d != by_digest_.end()) return d->second;
  auto s = by_sequence_.find(req.sequence_key);
  if (s == by_sequence_.end()) {
    // Fall back to the bare seed when the script is not task-scoped.
    auto colon = req.sequence_key.rfind(':');
    if (colon != std::string::npos)
      s = by_sequence_.find(req.sequence_key.substr(colon + 1));
  }
  if (s != by_sequence_.end() && !s->second.empty()) {
    size_t idx = static_cast<size_t>(req.nonce);
    if (idx >= s->second.size()) idx = s->second.size() - 1;
    return s->second[idx];
  }
  if (has_default_) return default_response_;
  throw Error(ErrorKind::Transport,
              "mock script has no entry for sequence key '" + req.sequence_key + "'");
}

// ---------------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------------

namespace {

class Gate {
public:
  explicit Gate(int cap) : cap_(cap) {}
  void acquire() {
    std::unique_lock<std::mutex> lk(mu_);
    cv_.wait(lk, [&] { return in_flight_ < cap_; });
    ++in_flight_;
  }
  void release() {
    std::lock_guard<std::mutex> lk(mu_);
    --in_flight_;
    cv_.notify_one();
  }

private:
  std::mutex mu_;
  std::condition_variable cv_;
  int cap_;
  int in_flight_ = 0;
};

Gate& global_gate(int cap) {
  static Gate gate(cap);
  return gate;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string env_or(const std::string& name, const std::string& fallback) {
  const char* v = std::getenv(name.c_str());
  return v ? std::string(v) : fallback;
}

}  // namespace

HttpTransport::HttpTransport(int max_in_flight, int max_attempts, long long backoff_ms)
    : max_in_flight_(max_in_flight), max_attempts_(max_attempts), backoff_ms_(backoff_ms) {}

std::string HttpTransport::complete(const ChatRequest& req) {
  Gate& gate = global_gate(max_in_flight_);
  gate.acquire();
  struct Release {
    Gate& g;
    ~Release() { g.release(); }
  } release{gate};

  long long backoff = backoff_ms_;
  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts_; ++attempt) {
    try {
      return complete_once(req);
    } catch (const Error& e) {
      last_error = e.what();
      if (attempt < max_attempts_ && backoff > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
    }
  }
  throw Error(ErrorKind::Transport, "all " + std::to_string(max_attempts_) +
                                        " attempts failed; last error: " + last_error);
}

}  // namespace abpr::llm

// httplib pulls in large platform headers; keep it at the end of the TU.
#include "httplib.h"

namespace abpr::llm {

std::string HttpTransport::complete_once(const ChatRequest& req) {
  std::string provider_env = upper(req.provider_id);
  std::string api_key = env_or(provider_env + "_API_KEY", "");
  if (api_key.empty())
    throw Error(ErrorKind::Transport, "missing " + provider_env + "_API_KEY in environment");

  bool anthropic_style = req.provider_id == "anthropic";
  std::string base = env_or(provider_env + "_BASE_URL",
                            anthropic_style ? "https://api.anthropic.com"
                                            : "https://api.openai.com");

  json body;
  std::string path;
  httplib::Headers headers;
  if (anthropic_style) {
    path = "/v1/messages";
    body = {{"model", req.model_id},
            {"max_tokens", req.max_output_tokens},
            {"temperature", req.temperature},
            {"system", req.system},
            {"messages", json::array({{{"role", "user"}, {"content", req.user}}})}};
    headers = {{"x-api-key", api_key}, {"anthropic-version", "2023-06-01"}};
  } else {
    path = "/v1/chat/completions";
    body = {{"model", req.model_id},
            {"temperature", req.temperature},
            {"messages", json::array({{{"role", "system"}, {"content", req.system}},
                                      {{"role", "user"}, {"content", req.user}}})}};
    headers = {{"Authorization", "Bearer " + api_key}};
  }
  if (!req.provider_options.empty()) {
    try {
      json opts = json::parse(req.provider_options);
      for (auto& [k, v] : opts.items()) body[k] = v;
    } catch (const json::exception&) {
      // Pass-through options are best effort.
    }
  }

  httplib::Client client(base);
  client.set_read_timeout(300, 0);
  client.set_connection_timeout(30, 0);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res)
    throw Error(ErrorKind::Transport,
                "no response from " + base + path + " (" + httplib::to_string(res.error()) + ")");
  if (res->status < 200 || res->status >= 300)
    throw Error(ErrorKind::Transport,
                "HTTP " + std::to_string(res->status) + " from provider: " + res->body);
  try {
    json j = json::parse(res->body);
    if (anthropic_style) return j.at("content").at(0).at("text").get<std::string>();
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Transport, std::string("malformed provider response: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// LLM-backed refiner
// ---------------------------------------------------------------------------

ChatRequest LlmRefiner::base_request(unsigned long long seed, unsigned long long nonce) const {
  ChatRequest req;
  req.system = PromptBundle::standard().system_template;
  req.temperature = config_.temperature;
  req.provider_id = config_.provider;
  req.model_id = config_.model;
  req.provider_options = config_.provider_options;
  req.nonce = nonce;
  req.sequence_key = task_id_ + ":" + std::to_string(seed);
  return req;
}

std::string LlmRefiner::initial(const harness::TaskRecord& task, unsigned long long seed) {
  ChatRequest req = base_request(seed, 0);
  req.user = render_first_prompt(task, seed);
  return extract_code_block(transport_.complete(req)).source;
}

std::string LlmRefiner::refine(const refine::RefineContext& ctx) {
  ChatRequest req = base_request(ctx.seed, static_cast<unsigned long long>(ctx.iteration));
  req.user = render_fix_prompt(ctx, config_.prompt_budget);
  return extract_code_block(transport_.complete(req)).source;
}

}  // namespace abpr::llm
