#pragma once

#include <optional>
#include <string>
#include <vector>

#include "abpr/arc_bk.hpp"
#include "abpr/engine.hpp"
#include "abpr/trace.hpp"

namespace abpr::harness {

struct TaskRecord {
  struct Pair {
    bk::Grid input;
    bk::Grid output;
  };
  struct TestPair {
    bk::Grid input;
    std::optional<bk::Grid> expected;  // absent in hidden-eval mode
  };

  std::string task_id;
  std::vector<Pair> train;
  std::vector<TestPair> test;

  bool has_all_expected() const {
    for (const auto& t : test)
      if (!t.expected) return false;
    return !test.empty();
  }
};

struct RunConfig {
  long long t_max = 10;       // refinement steps per run
  long long k = 2;            // history buffer capacity
  long long n_instances = 8;  // parallel runs
  logic::ResourceLimits limits;
  std::string provider = "openai";
  std::string model;
  double temperature = 1.0;
  std::string provider_options;  // opaque pass-through, e.g. reasoning effort
  unsigned long long base_seed = 1;
  long long prompt_budget = 60'000;  // fix-prompt character cap
  int max_refiner_retries = 3;
  long long refiner_backoff_ms = 500;

  enum class Mode { Live, Mock, InteractiveOracle };
  Mode mode = Mode::Mock;
  std::string mock_script_path;

  enum class BaseSelection { Latest, Best };
  BaseSelection base_selection = BaseSelection::Latest;
  bool explicit_localization = false;
  size_t localization_budget = 64;

  trace::TraceRenderOptions render;
  std::string out_dir;
};

}  // namespace abpr::harness
