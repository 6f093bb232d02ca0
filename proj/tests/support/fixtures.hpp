#pragma once

#include <map>
#include <string>

#include "abpr/task.hpp"

namespace testsupport {

std::string read_file(const std::string& path);
std::string corpus_path(const std::string& name);
std::string fixture_path(const std::string& name);

/// A synthetic evaluation suite with a designed Pass@2 outcome: ten recolor
/// tasks, six of which the canned responses eventually solve (at iterations
/// 0, 1, 2, 3, 5, and 9), four of which they never solve. One instance per
/// unsolvable task is scripted to fail initialization outright.
struct MockSuite {
  std::string tasks_dir;
  std::string script_path;
  long long total_scored = 10;
  long long designed_solved = 6;
  std::map<std::string, long long> designed_iteration;  // solved task -> iteration
};

/// Writes tasks and the mock script under root_dir (created if needed).
MockSuite build_mock_suite(const std::string& root_dir, unsigned long long base_seed);

/// One designed task of the same family, solvable at `solved_at` (or never,
/// when solved_at < 0). Used for single-task harness tests.
abpr::harness::TaskRecord mock_task(int index);
std::string mock_correct_program(int index);
std::string mock_identity_program();

}  // namespace testsupport
