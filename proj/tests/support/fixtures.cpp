#include "fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "abpr/harness.hpp"
#include "abpr/util.hpp"
#include "json.hpp"

#ifndef ABPR_SOURCE_DIR
#define ABPR_SOURCE_DIR "."
#endif

namespace testsupport {

namespace fs = std::filesystem;
using abpr::harness::TaskRecord;

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string corpus_path(const std::string& name) {
  return std::string(ABPR_SOURCE_DIR) + "/tests/corpus/" + name;
}

std::string fixture_path(const std::string& name) {
  return std::string(ABPR_SOURCE_DIR) + "/tests/fixtures/" + name;
}

namespace {

int target_color(int index) {
  int t = 1 + (index % 8);  // 1..8
  return t == 3 ? 4 : t;
}

abpr::bk::Grid mock_grid(int index, int variant) {
  abpr::Rng rng(static_cast<unsigned long long>(1000 + index * 17 + variant));
  std::vector<std::vector<int>> rows(3, std::vector<int>(3, 0));
  for (auto& row : rows)
    for (auto& cell : row) cell = static_cast<int>(rng.below(10));
  rows[rng.below(3)][rng.below(3)] = 3;  // guarantee a recolorable cell
  return abpr::bk::Grid::from_rows(rows);
}

abpr::bk::Grid recolored(const abpr::bk::Grid& g, int target) {
  abpr::bk::Grid out = g;
  for (auto& c : out.cells)
    if (c == 3) c = target;
  return out;
}

std::string fenced(const std::string& prose, const std::string& code) {
  return prose + "\n\n```prolog\n" + code + "```\n";
}

}  // namespace

TaskRecord mock_task(int index) {
  TaskRecord task;
  char id[16];
  std::snprintf(id, sizeof id, "mock%02d", index);
  task.task_id = id;
  int t = target_color(index);
  for (int v = 0; v < 2; ++v) {
    abpr::bk::Grid in = mock_grid(index, v);
    task.train.push_back({in, recolored(in, t)});
  }
  int tests = index == 5 ? 2 : 1;
  for (int v = 0; v < tests; ++v) {
    abpr::bk::Grid in = mock_grid(index, 10 + v);
    task.test.push_back({in, recolored(in, t)});
  }
  return task;
}

std::string mock_correct_program(int index) {
  int t = target_color(index);
  std::ostringstream os;
  os << ":- use_module(bk).\n\n"
     << "solve(Input, Output) :-\n"
     << "    bk:map_grid_cells(Input, recolor, Output).\n\n"
     << "recolor(_, _, V, N) :-\n"
     << "    ( V =:= 3 -> N = " << t << " ; N = V ).\n";
  return os.str();
}

std::string mock_identity_program() { return "solve(X, X).\n"; }

MockSuite build_mock_suite(const std::string& root_dir, unsigned long long base_seed) {
  MockSuite suite;
  fs::create_directories(fs::path(root_dir) / "tasks");
  suite.tasks_dir = (fs::path(root_dir) / "tasks").string();
  suite.script_path = (fs::path(root_dir) / "script.json").string();

  const long long solved_at[6] = {0, 1, 2, 3, 5, 9};
  nlohmann::json script;
  script["by_sequence"] = nlohmann::json::object();

  std::string identity_resp =
      fenced("The outputs look identical to the inputs.", mock_identity_program());
  std::string garbage_resp = "I am unable to produce Prolog for this task, sorry!";

  for (int i = 1; i <= 10; ++i) {
    TaskRecord task = mock_task(i);
    std::ofstream f(fs::path(suite.tasks_dir) / (task.task_id + ".json"));
    f << abpr::harness::serialize_task(task) << "\n";

    bool solvable = i <= 6;
    std::string correct_resp = fenced(
        "Cells of color 3 are recolored to " + std::to_string(target_color(i)) + ".",
        mock_correct_program(i));
    std::string wrong_resp =
        fenced("Cells of color 3 become 9.",
               ":- use_module(bk).\nsolve(Input, Output) :- bk:map_grid_cells(Input, m, "
               "Output).\nm(_, _, V, N) :- ( V =:= 3 -> N = 9 ; N = V ).\n");

    for (int s = 0; s < 8; ++s) {
      std::string key =
          task.task_id + ":" + std::to_string(base_seed + static_cast<unsigned long long>(s));
      nlohmann::json seq = nlohmann::json::array();
      if (solvable && s < 3) {
        long long d = solved_at[i - 1];
        for (long long j = 0; j < d; ++j) seq.push_back(identity_resp);
        seq.push_back(correct_resp);
      } else if (solvable) {
        seq.push_back(identity_resp);
      } else if (s < 4) {
        seq.push_back(wrong_resp);
      } else if (s < 7) {
        seq.push_back(identity_resp);
      } else {
        seq.push_back(garbage_resp);  // initialization failure path
      }
      script["by_sequence"][key] = seq;
    }
    if (solvable) suite.designed_iteration[task.task_id] = solved_at[i - 1];
  }

  std::ofstream f(suite.script_path);
  f << script.dump(2) << "\n";
  return suite;
}

}  // namespace testsupport
