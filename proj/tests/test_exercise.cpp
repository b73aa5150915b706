#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "socsim/config.hpp"
#include "socsim/export.hpp"
#include "support.hpp"

using namespace socsim;
using namespace socsim::testing;

namespace {

ExerciseConfig config_for(std::uint64_t seed) {
  ExerciseConfig c;
  c.seed = seed;
  c.teacherToken = "secret";
  return c;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() /
             ("socsim-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
              ::testing::UnitTest::GetInstance()->current_test_info()->name());
  std::filesystem::create_directories(dir);
  return dir;
}

ExerciseConfig load(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
  args.insert(args.begin(), "socsim-server");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return load_config(static_cast<int>(argv.size()), argv.data(), [env](const char* name) -> std::optional<std::string> {
    auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
}

std::vector<std::string> violations_of(std::vector<std::string> args) {
  try {
    load(std::move(args));
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

}  // namespace

// Counters maintained incrementally always equal a full rescan, after every
// committed mutation of a long random run.
TEST(Counters, IncrementalMatchesFullScan) {
  Exercise ex = make_exercise(3);
  RandomDriver driver(ex, 3);
  int committed = 0;
  for (int i = 0; i < 3000; ++i) {
    if (!driver.step(ex)) continue;
    ++committed;
    ASSERT_EQ(ex.counters(), brute_counters(ex.events())) << "after step " << i;
  }
  EXPECT_GT(committed, 500);
}

TEST(Replay, RebuildsEveryPieceOfState) {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    Exercise ex = make_exercise(seed);
    RandomDriver driver(ex, seed);
    for (int i = 0; i < 1500; ++i) driver.step(ex);
    const Exercise again = Exercise::replay(settings(seed), ex.audit(), t0());
    EXPECT_EQ(again.events(), ex.events()) << seed;
    EXPECT_EQ(again.counters(), ex.counters()) << seed;
    // Heartbeats are not audited, so lastSeen is the one field replay cannot know.
    auto roster = [](const Exercise& e) {
      Json j = e.sessions().all();
      for (auto& s : j) s.erase("lastSeen");
      return j;
    };
    EXPECT_EQ(roster(again), roster(ex)) << seed;
    EXPECT_EQ(again.chat().all(), ex.chat().all()) << seed;
    EXPECT_EQ(again.report(), ex.report()) << seed;
    EXPECT_EQ(generator_state_json(again.generator(), again.ended()),
              generator_state_json(ex.generator(), ex.ended()))
        << seed;
    EXPECT_EQ(again.generator().next, ex.generator().next) << seed;
    EXPECT_EQ(again.audit(), ex.audit()) << seed;
  }
}

TEST(Replay, AuditSeqsAreDenseAndFailuresLeaveNoEntry) {
  Exercise ex = make_exercise(9);
  RandomDriver driver(ex, 9);
  std::size_t committed = ex.audit().size();
  for (int i = 0; i < 1000; ++i) {
    const auto before = ex.audit().size();
    const bool ok = driver.step(ex);
    if (!ok) EXPECT_EQ(ex.audit().size(), before);
    committed = ex.audit().size();
  }
  for (std::size_t i = 0; i < ex.audit().size(); ++i) EXPECT_EQ(ex.audit()[i].seq, i + 1);
  EXPECT_EQ(ex.last_seq(), committed);
}

TEST(Replay, OutOfOrderEntryRejected) {
  Exercise ex = make_exercise();
  join_teacher(ex);
  AuditEntry entry = ex.audit().front();
  entry.seq = 5;
  EXPECT_THROW(ex.apply(entry), Error);
}

// The generator continues where the replayed log left off.
TEST(Replay, ResumedGeneratorContinuesTheStream) {
  Exercise live = make_exercise(21);
  const auto t = join_teacher(live);
  live.set_pacing(t, {120.0, std::nullopt, true}, t0());
  for (int s = 1; s <= 30; ++s) live.tick(at_s(s));
  Exercise replayed = Exercise::replay(settings(21), live.audit(), t0());
  live.tick(at_s(40));
  replayed.tick(at_s(40));
  EXPECT_EQ(replayed.events(), live.events());
}

TEST(Export, FreshExercise) {
  Exercise ex = make_exercise();
  const Json doc = export_transcript(ex, config_for(42));
  EXPECT_TRUE(doc.at("events").empty());
  EXPECT_TRUE(doc.at("auditLog").empty());
  EXPECT_FALSE(doc.contains("endgameReport") && !doc.at("endgameReport").is_null());
  EXPECT_EQ(doc.at("config").at("seed"), 42);
}

TEST(Export, NeverCarriesTheToken) {
  Exercise ex = make_exercise();
  RandomDriver driver(ex, 4);
  for (int i = 0; i < 300; ++i) driver.step(ex);
  auto config = config_for(42);
  config.teacherToken = "very-secret-token-value";
  const std::string bytes = export_transcript(ex, config).dump();
  EXPECT_EQ(bytes.find("very-secret-token-value"), std::string::npos);
  EXPECT_EQ(bytes.find("teacherToken"), std::string::npos);
}

TEST(Export, ReplayReproducesTheEventsByteForByte) {
  Exercise ex = make_exercise(42);
  RandomDriver driver(ex, 42);
  for (int i = 0; i < 2000; ++i) driver.step(ex);
  const Json doc = export_transcript(ex, config_for(42));
  const Exercise replayed = replay_export(Json::parse(doc.dump()));
  const Json again = export_transcript(replayed, config_for(42));
  EXPECT_EQ(canonical_dump(again.at("events")), canonical_dump(doc.at("events")));
  EXPECT_EQ(canonical_dump(again.at("auditLog")), canonical_dump(doc.at("auditLog")));
  EXPECT_EQ(canonical_dump(again.at("chatHistories")), canonical_dump(doc.at("chatHistories")));
}

TEST(Export, WritesAndReportsFailures) {
  Exercise ex = make_exercise();
  const Json doc = export_transcript(ex, config_for(1));
  const auto dir = temp_dir();
  EXPECT_FALSE(write_export(doc, dir / "out.json").has_value());
  std::ifstream in(dir / "out.json");
  EXPECT_EQ(Json::parse(in), doc);
  const auto err = write_export(doc, dir / "missing" / "sub" / "out.json");
  ASSERT_TRUE(err.has_value());
  EXPECT_NE(err->find("cannot open"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Config, Defaults) {
  const auto c = load({"--teacher-token", "t"});
  EXPECT_EQ(c.port, 8080);
  EXPECT_EQ(c.bindAddress, "0.0.0.0");
  EXPECT_DOUBLE_EQ(c.ratePerMinute, 30.0);
  EXPECT_DOUBLE_EQ(c.fpRatio, 0.6);
  EXPECT_EQ(c.regions, default_regions());
  EXPECT_EQ(c.maxTeachers, 2u);
  EXPECT_TRUE(c.seedGenerated);
  EXPECT_FALSE(c.tokenGenerated);
}

TEST(Config, GeneratesMissingToken) {
  const auto c = load({});
  EXPECT_TRUE(c.tokenGenerated);
  EXPECT_GE(c.teacherToken.size(), 16u);
  EXPECT_NE(load({}).teacherToken, c.teacherToken);
}

TEST(Config, FlagBeatsFileBeatsDefault) {
  const auto dir = temp_dir();
  std::ofstream(dir / "c.json") << R"({"fpRatio": 0.5, "ratePerMinute": 90, "seed": 7, "teacherToken": "file"})";
  const auto path = (dir / "c.json").string();
  const auto c = load({"--config", path, "--seed", "42", "--fp-ratio", "0.9"});
  EXPECT_DOUBLE_EQ(c.fpRatio, 0.9);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_DOUBLE_EQ(c.ratePerMinute, 90.0);
  EXPECT_EQ(c.teacherToken, "file");
  EXPECT_FALSE(c.seedGenerated);

  const auto from_file = load({"--config", path});
  EXPECT_DOUBLE_EQ(from_file.fpRatio, 0.5);
  EXPECT_EQ(from_file.seed, 7u);
  std::filesystem::remove_all(dir);
}

TEST(Config, EnvironmentTokenBetweenFlagAndFile) {
  const auto dir = temp_dir();
  std::ofstream(dir / "c.json") << R"({"teacherToken": "file"})";
  const auto path = (dir / "c.json").string();
  EXPECT_EQ(load({"--config", path}, {{"SOCSIM_TEACHER_TOKEN", "env"}}).teacherToken, "env");
  EXPECT_EQ(load({"--config", path, "--teacher-token", "flag"}, {{"SOCSIM_TEACHER_TOKEN", "env"}}).teacherToken,
            "flag");
  std::filesystem::remove_all(dir);
}

TEST(Config, OutOfRangeFpRatioNamesTheField) {
  const auto v = violations_of({"--fp-ratio", "1.5"});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("fpRatio"), std::string::npos);
}

TEST(Config, EveryViolationIsListed) {
  const auto v = violations_of({"--fp-ratio", "-1", "--rate", "0", "--port", "70000", "--regions", "a,a"});
  EXPECT_EQ(v.size(), 4u);
}

TEST(Config, FileProblems) {
  EXPECT_FALSE(violations_of({"--config", "/nonexistent/socsim.json"}).empty());
  const auto dir = temp_dir();
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_FALSE(violations_of({"--config", (dir / "bad.json").string()}).empty());
  std::ofstream(dir / "typed.json") << R"({"fpRatio": "high", "regions": 3})";
  EXPECT_EQ(violations_of({"--config", (dir / "typed.json").string()}).size(), 2u);
  std::filesystem::remove_all(dir);
}

TEST(Config, BadCatalogFailsStartup) {
  const auto dir = temp_dir();
  std::ofstream(dir / "t.json") << R"([{"id": "only", "pattern": "x {ipp}", "statusClass": "attack",
                                       "applicableDevices": [], "severityWeights": {"high": 1}}])";
  const auto v = violations_of({"--templates", (dir / "t.json").string()});
  EXPECT_GE(v.size(), 2u);  // bad placeholder and no benign_noise template
  std::filesystem::remove_all(dir);
}

TEST(Config, RegionListFlag) {
  const auto c = load({"--regions", "a,b,c"});
  EXPECT_EQ(c.regions, (std::vector<std::string>{"a", "b", "c"}));
  const auto s = to_settings(c);
  EXPECT_EQ(s.generator.regions, c.regions);
  EXPECT_FALSE(s.generator.running);
}

TEST(Config, HelpIsNotAnError) {
  EXPECT_THROW(load({"--help"}), HelpRequested);
}

TEST(Config, JsonRoundTripWithoutToken) {
  auto c = config_for(5);
  c.exportPath = "/tmp/x.json";
  const Json j = config_to_json(c);
  EXPECT_FALSE(j.contains("teacherToken"));
  ExerciseConfig back;
  std::vector<std::string> violations;
  apply_config_json(back, j, violations);
  EXPECT_TRUE(violations.empty());
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(back.exportPath, "/tmp/x.json");
}
