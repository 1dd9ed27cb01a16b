#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "curator/corpus.hpp"
#include "curator/fewshot.hpp"

using namespace curator;

namespace {

const std::string kFixtures = FIXTURES_DIR;

TaskDefinition make_task(std::size_t n_positive, std::size_t n_instances) {
  TaskDefinition task;
  task.task_id = "task_demo";
  task.definition = "Answer with the color named in the input.";
  task.input_language = {"English"};
  task.output_language = {"English"};
  for (std::size_t i = 0; i < n_positive; ++i) {
    task.positive_examples.push_back({"positive input " + std::to_string(i),
                                      "positive output " + std::to_string(i),
                                      ""});
  }
  for (std::size_t i = 0; i < n_instances; ++i) {
    task.instances.push_back({"inst-" + std::to_string(i),
                              "instance input " + std::to_string(i),
                              {"gold-" + std::to_string(i)}});
  }
  return task;
}

// Serves /v1/completions on a free port for the lifetime of the object.
class MockServer {
 public:
  explicit MockServer(httplib::Server::Handler handler) {
    server_.Post("/v1/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string completion_body(const std::string& text) {
  nlohmann::json doc;
  doc["choices"] = {{{"text", text}}};
  return doc.dump();
}

}  // namespace

TEST_CASE("k=0 prompt is definition plus target input") {
  const auto task = make_task(3, 4);
  const auto prompt = build_fewshot_prompt(task, task.instances[0], 0, 42);
  CHECK(prompt == task.definition + "\n\nInput: " + task.instances[0].input +
                      "\nOutput:");
}

TEST_CASE("few-shot prompts are deterministic in the seed") {
  const auto task = make_task(3, 4);
  const auto a = build_fewshot_prompt(task, task.instances[1], 2, 7);
  const auto b = build_fewshot_prompt(task, task.instances[1], 2, 7);
  CHECK(a == b);
  const auto c = build_fewshot_prompt(task, task.instances[1], 2, 8);
  CHECK(a != c);
}

TEST_CASE("target output never leaks into its own prompt") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto task = make_task(gen() % 4, 2 + gen() % 6);
    const std::size_t target = gen() % task.instances.size();
    const int max_k = static_cast<int>(task.positive_examples.size() +
                                       task.instances.size() - 1);
    const int k = static_cast<int>(gen() % (max_k + 1));
    const auto prompt =
        build_fewshot_prompt(task, task.instances[target], k, gen());
    const auto cue = prompt.rfind("Output:");
    const std::string before_cue = prompt.substr(0, cue);
    CHECK(before_cue.find(task.instances[target].outputs[0]) ==
          std::string::npos);
  }
}

TEST_CASE("k beyond the demonstration pool is an error") {
  const auto task = make_task(1, 3);  // pool: 1 positive + 2 other instances
  CHECK_NOTHROW((void)build_fewshot_prompt(task, task.instances[0], 3, 1));
  CHECK_THROWS_AS((void)build_fewshot_prompt(task, task.instances[0], 4, 1),
                  std::runtime_error);
}

TEST_CASE("truncate_at_stop cuts at the first stop sequence") {
  CHECK(truncate_at_stop("hello\n\nworld", {"\n\n"}) == "hello");
  CHECK(truncate_at_stop("  padded  ", {"\n\n"}) == "padded");
  CHECK(truncate_at_stop("a###b%%%c", {"%%%", "###"}) == "a");
}

TEST_CASE("complete speaks the wire protocol") {
  std::string seen_body;
  std::mutex mu;
  MockServer server([&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard<std::mutex> lock(mu);
      seen_body = req.body;
    }
    res.set_content(completion_body("OK"), "application/json");
  });

  EndpointConfig cfg;
  cfg.base_url = server.url();
  cfg.model = "test-model";
  cfg.max_tokens = 17;
  cfg.stop_sequences = {"\n\n"};
  CHECK(complete("say ok", cfg) == "OK");

  const auto body = nlohmann::json::parse(seen_body);
  CHECK(body.at("model") == "test-model");
  CHECK(body.at("prompt") == "say ok");
  CHECK(body.at("max_tokens") == 17);
  CHECK(body.at("temperature") == 0.0);
  CHECK(body.at("stop") == nlohmann::json::array({"\n\n"}));
}

TEST_CASE("complete retries 5xx and reports attempts on failure") {
  std::atomic<int> calls{0};
  MockServer server([&](const httplib::Request&, httplib::Response& res) {
    const int n = ++calls;
    if (n <= 2) {
      res.status = 500;
    } else {
      res.set_content(completion_body("recovered"), "application/json");
    }
  });

  EndpointConfig cfg;
  cfg.base_url = server.url();
  cfg.retries = 3;
  CHECK(complete("x", cfg) == "recovered");
  CHECK(calls.load() == 3);

  calls = -1000;  // keep failing
  cfg.retries = 2;
  try {
    (void)complete("x", cfg);
    FAIL("expected EndpointError");
  } catch (const EndpointError& e) {
    CHECK(e.attempts == 2);
  }
}

TEST_CASE("complete truncates at stop sequences from the response") {
  MockServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body(" answer\n\ntrailing junk"),
                    "application/json");
  });
  EndpointConfig cfg;
  cfg.base_url = server.url();
  CHECK(complete("x", cfg) == "answer");
}

TEST_CASE("malformed response bodies are protocol errors") {
  MockServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"unexpected\": true}", "application/json");
  });
  EndpointConfig cfg;
  cfg.base_url = server.url();
  CHECK_THROWS_AS((void)complete("x", cfg), EndpointError);
}

TEST_CASE("evaluate_task: EM accuracy over a scripted endpoint") {
  auto task = make_task(3, 10);
  // Gold for 3 specific instances, junk otherwise.
  CompletionFn fn = [&](const std::string& prompt) -> std::string {
    for (int i : {0, 4, 7}) {
      if (prompt.find("Input: instance input " + std::to_string(i) + "\nOutput:") !=
          std::string::npos) {
        return "gold-" + std::to_string(i);
      }
    }
    return "junk";
  };
  const auto report =
      evaluate_task(task, TaskKind::kExactMatch, fn, 1, 10, 5, 1);
  CHECK(report.n_evaluated == 10);
  CHECK(report.per_example.size() == 10);
  CHECK(report.accuracy == doctest::Approx(0.3));
}

TEST_CASE("evaluate_task: echoing references scores 1.0 on generation tasks") {
  auto task = make_task(2, 6);
  CompletionFn fn = [&](const std::string& prompt) -> std::string {
    for (const auto& inst : task.instances) {
      if (prompt.find("Input: " + inst.input + "\nOutput:") != std::string::npos) {
        return inst.outputs[0];
      }
    }
    return "";
  };
  const auto report = evaluate_task(task, TaskKind::kGeneration, fn, 1, 6, 9, 2);
  for (const auto& [id, score] : report.per_example) {
    CHECK(score == doctest::Approx(1.0));
  }
}

TEST_CASE("evaluate_task is byte-stable across max_in_flight settings") {
  auto task = make_task(3, 12);
  CompletionFn fn = [](const std::string& prompt) {
    return std::to_string(std::hash<std::string>{}(prompt) % 100);
  };
  const auto base = evaluate_task(task, TaskKind::kGeneration, fn, 2, 12, 3, 1);
  for (int in_flight : {2, 4, 8}) {
    const auto other =
        evaluate_task(task, TaskKind::kGeneration, fn, 2, 12, 3, in_flight);
    CHECK(other.per_example == base.per_example);
    CHECK(other.accuracy == base.accuracy);
    CHECK(other.prompt_fingerprint == base.prompt_fingerprint);
  }
}

TEST_CASE("evaluate_task never exceeds max_in_flight") {
  auto task = make_task(2, 30);
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  CompletionFn fn = [&](const std::string&) {
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --in_flight;
    return std::string("x");
  };
  (void)evaluate_task(task, TaskKind::kGeneration, fn, 0, 30, 1, 4);
  CHECK(peak.load() <= 4);
  CHECK(peak.load() >= 1);
}

TEST_CASE("evaluate_task raises when every completion fails") {
  auto task = make_task(2, 4);
  CompletionFn fn = [](const std::string&) -> std::string {
    throw std::runtime_error("endpoint down");
  };
  CHECK_THROWS_AS(
      (void)evaluate_task(task, TaskKind::kExactMatch, fn, 0, 4, 1, 2),
      EndpointError);
}

TEST_CASE("reports round-trip through the line format") {
  auto task = make_task(2, 5);
  CompletionFn fn = [](const std::string&) { return std::string("gold-1"); };
  const auto report = evaluate_task(task, TaskKind::kExactMatch, fn, 1, 5, 2, 1);
  const auto line = report_to_jsonl_line(report);
  const auto back = report_from_jsonl_line(line);
  CHECK(back.task_id == report.task_id);
  CHECK(back.kind == report.kind);
  CHECK(back.per_example == report.per_example);
  CHECK(back.accuracy == report.accuracy);
  CHECK(back.prompt_fingerprint == report.prompt_fingerprint);
  CHECK(report_to_jsonl_line(back) == line);
}

TEST_CASE("summarize_reports is one row per report") {
  std::vector<TaskScoreReport> reports(3);
  for (int i = 0; i < 3; ++i) {
    reports[i].task_id = "t" + std::to_string(i);
    reports[i].kind = TaskKind::kGeneration;
    reports[i].per_example = {{"a", 0.5}, {"b", 0.5}};
    reports[i].n_evaluated = 2;
    reports[i].accuracy = 0.5;
  }
  const auto rows = summarize_reports(reports);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].score_p25 == doctest::Approx(0.5));
  CHECK(rows[0].score_p50 == doctest::Approx(0.5));
  CHECK(rows[0].score_p75 == doctest::Approx(0.5));
  CHECK(summarize_reports({}).empty());
}
