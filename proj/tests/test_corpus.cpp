#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "curator/corpus.hpp"
#include "curator/hash.hpp"

using namespace curator;

namespace {

const std::string kFixtures = FIXTURES_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("parse_ni_task preserves structure") {
  const auto task = parse_ni_task(kFixtures + "/ni_tasks/task0001_sentiment.json");
  CHECK(task.task_id == "task0001_sentiment");
  CHECK(task.instances.size() == 10);
  CHECK(task.positive_examples.size() == 3);
  CHECK(task.categories == std::vector<std::string>{"Sentiment Analysis"});
  CHECK(task.input_language == std::vector<std::string>{"English"});
  for (const auto& inst : task.instances) {
    CHECK(!inst.outputs.empty());
  }
}

TEST_CASE("parse errors name the offending field") {
  CHECK_THROWS_WITH_AS(
      (void)parse_ni_task_json(R"({"Categories": []})", "t"),
      doctest::Contains("missing field: Definition"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      (void)parse_ni_task_json(
          R"({"Definition": ["d"], "Categories": [], "Domains": [],
              "Input_language": [], "Output_language": [],
              "Positive Examples": [], "Instances": []})",
          "t"),
      doctest::Contains("empty Instances"), std::runtime_error);
  CHECK_THROWS_AS((void)parse_ni_task_json("not json", "t"), std::runtime_error);
}

TEST_CASE("parse -> serialize -> parse is a fixed point") {
  for (const char* name :
       {"task0001_sentiment", "task0002_summarize", "task0007_yesno"}) {
    const auto original =
        parse_ni_task(kFixtures + "/ni_tasks/" + name + ".json");
    const std::string once = serialize_ni_task(original);
    const auto reparsed = parse_ni_task_json(once, original.task_id);
    CHECK(serialize_ni_task(reparsed) == once);
    CHECK(reparsed.definition == original.definition);
    CHECK(reparsed.instances.size() == original.instances.size());
    CHECK(reparsed.positive_examples.size() == original.positive_examples.size());
  }
}

TEST_CASE("filter policy applies rules in order") {
  std::vector<TaskDefinition> tasks;
  for (const auto& entry :
       std::filesystem::directory_iterator(kFixtures + "/ni_tasks")) {
    tasks.push_back(parse_ni_task(entry.path().string()));
  }
  const auto policy = load_filter_policy(kFixtures + "/filter_policy.json");
  const auto outcome = apply_filter_policy(tasks, policy);

  CHECK(outcome.selected.size() + outcome.rejected.size() == tasks.size());

  std::map<std::string, std::string> reasons(outcome.rejected.begin(),
                                             outcome.rejected.end());
  CHECK(reasons.at("task0003_french_qa") == "non-English");
  CHECK(reasons.at("task0006_codemix") == "non-English");
  CHECK(reasons.at("task0004_question_generation") == "excluded category");
  CHECK(reasons.at("task0005_mmlu_qa") == "excluded task id");
  CHECK(reasons.count("task0001_sentiment") == 0);

  // Idempotence: filtering the selected set again rejects nothing.
  const auto again = apply_filter_policy(outcome.selected, policy);
  CHECK(again.rejected.empty());
  CHECK(again.selected.size() == outcome.selected.size());
}

TEST_CASE("allowlist overrides every other rule") {
  std::vector<TaskDefinition> tasks = {
      parse_ni_task(kFixtures + "/ni_tasks/task0004_question_generation.json"),
      parse_ni_task(kFixtures + "/ni_tasks/task0001_sentiment.json")};
  FilterPolicy policy = load_filter_policy(kFixtures + "/filter_policy.json");
  policy.explicit_allowlist = {{"task0004_question_generation"}};
  const auto outcome = apply_filter_policy(tasks, policy);
  REQUIRE(outcome.selected.size() == 1);
  CHECK(outcome.selected[0].task_id == "task0004_question_generation");
  CHECK(outcome.rejected[0].second == "not on allowlist");
}

TEST_CASE("load_instruction_file maps schemas and drops empty outputs") {
  const auto lima = load_instruction_file(kFixtures + "/lima_sample.jsonl",
                                          Source::kLima, {});
  CHECK(lima.records.size() == 20);
  CHECK(lima.dropped_empty_output == 0);
  CHECK(lima.records[0].source == Source::kLima);
  CHECK(lima.records[0].content_hash ==
        content_hash(lima.records[0].instruction, lima.records[0].input,
                     lima.records[0].output));

  InstructionSchema schema{"question", "context", "answer"};
  const auto qa = load_instruction_file(kFixtures + "/schema_variant.jsonl",
                                        Source::kOther, schema);
  CHECK(qa.records.size() == 9);
  CHECK(qa.dropped_empty_output == 1);

  InstructionSchema bad{"no_such_field", "", "answer"};
  CHECK_THROWS_WITH_AS((void)load_instruction_file(
                           kFixtures + "/schema_variant.jsonl", Source::kOther, bad),
                       doctest::Contains("unmappable schema field"),
                       std::runtime_error);
}

TEST_CASE("loading the same file twice gives identical hash multisets") {
  const auto a = load_instruction_file(kFixtures + "/lima_sample.jsonl",
                                       Source::kLima, {});
  const auto b = load_instruction_file(kFixtures + "/lima_sample.jsonl",
                                       Source::kLima, {});
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].content_hash == b.records[i].content_hash);
  }
}

TEST_CASE("categorize_tasks partitions and reports missing ids") {
  const auto map = load_category_map(kFixtures + "/category_map.json");
  std::vector<TaskDefinition> selected = {
      parse_ni_task(kFixtures + "/ni_tasks/task0001_sentiment.json"),
      parse_ni_task(kFixtures + "/ni_tasks/task0002_summarize.json"),
      parse_ni_task(kFixtures + "/ni_tasks/task0007_yesno.json")};
  const auto split = categorize_tasks(selected, map);
  CHECK(split.em_tasks.size() == 2);
  CHECK(split.gen_tasks.size() == 1);

  selected.push_back(parse_ni_task(kFixtures + "/ni_tasks/task0003_french_qa.json"));
  CHECK_THROWS_WITH_AS((void)categorize_tasks(selected, map),
                       doctest::Contains("task0003_french_qa"),
                       std::runtime_error);

  const auto empty = categorize_tasks({}, map);
  CHECK(empty.em_tasks.empty());
  CHECK(empty.gen_tasks.empty());
}

TEST_CASE("filter policy and category map round-trip through files") {
  const auto policy = load_filter_policy(kFixtures + "/filter_policy.json");
  const auto tmp = std::filesystem::temp_directory_path() / "policy_rt.json";
  save_filter_policy(policy, tmp.string());
  const auto reloaded = load_filter_policy(tmp.string());
  CHECK(reloaded.allowed_languages == policy.allowed_languages);
  CHECK(reloaded.excluded_categories == policy.excluded_categories);
  CHECK(reloaded.excluded_task_ids == policy.excluded_task_ids);
  CHECK(reloaded.explicit_allowlist == policy.explicit_allowlist);

  const auto map = load_category_map(kFixtures + "/category_map.json");
  const auto tmp2 = std::filesystem::temp_directory_path() / "cmap_rt.json";
  save_category_map(map, tmp2.string());
  CHECK(load_category_map(tmp2.string()).kinds == map.kinds);
  CHECK(slurp(tmp2.string()) == slurp(kFixtures + "/category_map.json"));
}

TEST_CASE("the selected-task list fixture has 463 ids") {
  const auto ids = load_task_id_list(kFixtures + "/selected_ni_tasks.txt");
  CHECK(ids.size() == 463);
}
