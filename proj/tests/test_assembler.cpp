#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "curator/assembler.hpp"
#include "curator/hash.hpp"

using namespace curator;

namespace {

const std::string kFixtures = FIXTURES_DIR;

std::vector<InstructionRecord> make_records(const std::string& prefix,
                                            std::size_t n, Source source) {
  std::vector<InstructionRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    InstructionRecord rec;
    rec.instruction = prefix + " instruction " + std::to_string(i);
    rec.input = "";
    rec.output = prefix + " output " + std::to_string(i);
    rec.source = source;
    rec.origin_id = prefix + ":" + std::to_string(i);
    rec.content_hash = content_hash(rec.instruction, rec.input, rec.output);
    out.push_back(std::move(rec));
  }
  return out;
}

std::map<std::string, std::vector<InstructionRecord>> ample_sources(
    const MixtureSpec& spec) {
  std::map<std::string, std::vector<InstructionRecord>> sources;
  for (const auto& [key, quota] : spec.quotas) {
    // LIMA availability is exactly 1,000; everything else has headroom.
    const std::size_t n = key == "LIMA" ? 1000 : quota + 250;
    sources[key] = make_records(key, n, Source::kOther);
  }
  return sources;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("mixture presets match the published quotas") {
  const auto p200 = mixture_preset("200K");
  CHECK(p200.quotas.at("LIMA") == 1000);
  CHECK(p200.quotas.at("OpenPlatypus") == 25000);
  CHECK(p200.quotas.at("NI_exact_match") == 50000);
  CHECK(p200.quotas.at("NI_generation") == 50000);
  CHECK(p200.quotas.at("OpenbookQA") == 5000);
  CHECK(p200.quotas.at("QUAC") == 10000);
  CHECK(p200.quotas.at("CNNDailyMail") == 15000);
  CHECK(p200.quotas.at("MathInstruct") == 50000);
  CHECK(p200.epochs == 3);
  CHECK(mixture_preset("400K").epochs == 2);
  CHECK(mixture_preset("700K").epochs == 1);
  CHECK_THROWS_WITH_AS((void)mixture_preset("9000K"),
                       doctest::Contains("200K, 400K, 700K"),
                       std::runtime_error);
}

TEST_CASE("assemble_mixture hits the preset totals") {
  auto spec = mixture_preset("200K", 31);
  const auto mixture = assemble_mixture(spec, ample_sources(spec));
  CHECK(mixture.records.size() == 206000);
  CHECK(mixture.manifest.per_source.at("LIMA").requested == 1000);
  CHECK(mixture.manifest.per_source.at("LIMA").delivered == 1000);
  for (const auto& [key, count] : mixture.manifest.per_source) {
    CHECK(count.delivered == count.requested);
  }
}

TEST_CASE("assemble_mixture records shortfalls") {
  auto spec = mixture_preset("200K", 31);
  auto sources = ample_sources(spec);
  sources["QUAC"] = make_records("QUAC", 400, Source::kQuac);
  const auto mixture = assemble_mixture(spec, sources);
  CHECK(mixture.manifest.per_source.at("QUAC").delivered == 400);
  CHECK(mixture.records.size() == 206000 - 10000 + 400);
}

TEST_CASE("a quota without a stream is a configuration error") {
  auto spec = mixture_preset("200K", 31);
  auto sources = ample_sources(spec);
  sources.erase("MathInstruct");
  CHECK_THROWS_WITH_AS((void)assemble_mixture(spec, sources),
                       doctest::Contains("MathInstruct"), std::runtime_error);
}

TEST_CASE("dedupe keeps first occurrences in order") {
  auto records = make_records("a", 5, Source::kOther);
  auto dupes = records;
  records.insert(records.end(), dupes.begin(), dupes.end());
  const auto result = dedupe_records(records);
  CHECK(result.records.size() == 5);
  CHECK(result.removed == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(result.records[i].origin_id == "a:" + std::to_string(i));
  }
  // idempotent
  const auto again = dedupe_records(result.records);
  CHECK(again.removed == 0);
}

TEST_CASE("split_validation is an exact disjoint partition") {
  const auto records = make_records("r", 500, Source::kOther);
  const auto split = split_validation(records, 50, 3);
  CHECK(split.validation.size() == 50);
  CHECK(split.train.size() == 450);

  std::set<std::uint64_t> train_hashes, val_hashes;
  for (const auto& r : split.train) train_hashes.insert(r.content_hash);
  for (const auto& r : split.validation) val_hashes.insert(r.content_hash);
  CHECK(train_hashes.size() == 450);
  CHECK(val_hashes.size() == 50);
  for (const auto& h : val_hashes) CHECK(train_hashes.count(h) == 0);

  const auto again = split_validation(records, 50, 3);
  CHECK(again.validation.size() == split.validation.size());
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(again.validation[i].content_hash == split.validation[i].content_hash);
  }

  const auto none = split_validation(records, 0, 3);
  CHECK(none.train.size() == 500);
  CHECK_THROWS_AS((void)split_validation(records, 501, 3), std::runtime_error);
}

TEST_CASE("training configs match the golden files") {
  const auto tmp = std::filesystem::temp_directory_path() / "config_test.yml";
  for (const char* name : {"200K", "400K", "700K"}) {
    emit_training_config(mixture_preset(name), tmp.string());
    CHECK(slurp(tmp.string()) ==
          slurp(kFixtures + "/golden_training_config_" + name + ".yml"));
  }
}

TEST_CASE("manifest round-trips through JSON") {
  CurationManifest m;
  m.mixture_name = "200K";
  m.per_source["LIMA"] = {1000, 1000};
  m.dedupe_removed = 7;
  m.validation_hashes = {1, 2, 3};
  m.master_seed = 42;
  m.parameters["fewshot_k"] = "3";
  m.tool_version = "0.1.0";
  m.file_digests["train.jsonl"] = "deadbeef";
  const auto back = CurationManifest::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(back.per_source.at("LIMA").delivered == 1000);
  CHECK(back.validation_hashes == m.validation_hashes);
}

TEST_CASE("dataset files round-trip and keep a stable key order") {
  const auto tmp = std::filesystem::temp_directory_path() / "records_rt.jsonl";
  const auto records = make_records("io", 25, Source::kLima);
  write_records_jsonl(records, tmp.string());

  const std::string body = slurp(tmp.string());
  CHECK(body.find("{\"instruction\":") == 0);
  CHECK(body.find("\r") == std::string::npos);  // LF endings only

  const auto back = read_records_jsonl(tmp.string());
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].content_hash == records[i].content_hash);
    CHECK(back[i].origin_id == records[i].origin_id);
    CHECK(back[i].source == records[i].source);
  }
}
