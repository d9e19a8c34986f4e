#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "ftd/config.hpp"
#include "ftd/csv.hpp"

using namespace ftd;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, PresetsRoundTrip) {
  for (const auto& c : {example1_config(), example2_config()}) {
    const json j = to_json(c);
    EXPECT_EQ(to_json(parse_config(j)), j);
  }
}

TEST(Config, SampleFilesRoundTrip) {
  for (const char* name : {"example1.json", "example1_adaptive.json", "example2.json"}) {
    const auto text = read_file(std::string(FTD_SOURCE_DIR) + "/tools/configs/" + name);
    ASSERT_FALSE(text.empty()) << name;
    const auto c = parse_config(text);
    const json j = to_json(c);
    EXPECT_EQ(to_json(parse_config(j.dump())), j) << name;
  }
}

TEST(Config, BuildsReferenceExperiments) {
  const auto s = build_scalar(example1_config());
  EXPECT_DOUBLE_EQ(s.gains.c4, 3.5);
  EXPECT_EQ(s.delay.kind(), DelayKind::Proportional);
  const auto n = build_network(example2_config());
  EXPECT_EQ(n.model.nodes, 3u);
  EXPECT_NO_THROW(n.validate());
  EXPECT_THROW(build_network(example1_config()), ConfigError);
}

TEST(Config, UnknownFieldNamesPath) {
  EXPECT_EQ(config_error_field(R"({"schema_version":1,"kind":"scalar","bogus":1})"), "bogus");
  EXPECT_EQ(config_error_field(R"({"schema_version":1,"kind":"scalar","gains":{"c5":1}})"),
            "gains.c5");
}

TEST(Config, TypeErrorsNameField) {
  EXPECT_EQ(config_error_field(R"({"schema_version":1,"kind":"scalar","gains":{"c3":"x"}})"),
            "gains.c3");
  EXPECT_EQ(config_error_field(R"({"schema_version":1,"kind":"scalar","gains":{"c4":-1}})"),
            "gains.c4");
  EXPECT_EQ(config_error_field(R"({"schema_version":1,"kind":"scalar","monitor":{"norm":"two_"}})"),
            "monitor.norm");
  EXPECT_EQ(config_error_field(R"({"schema_version":1,"kind":"blob"})"), "kind");
  EXPECT_EQ(config_error_field("{not json"), "<root>");
}

TEST(Config, SchemaVersionChecked) {
  EXPECT_EQ(config_error_field(R"({"kind":"scalar"})"), "schema_version");
  EXPECT_EQ(config_error_field(R"({"schema_version":2,"kind":"scalar"})"), "schema_version");
}

TEST(Config, ErrorMessageCarriesField) {
  try {
    parse_config(std::string(R"({"schema_version":1,"kind":"scalar","gains":{"c3":"x"}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("gains.c3:", 0), 0u) << e.what();
  }
}

TEST(Csv, RoundTripIsBitwise) {
  auto e = example1_adaptive();
  e.integrator.horizon = 3.0;
  const auto traj = simulate_scalar(e);
  std::stringstream ss;
  write_trajectory(ss, traj, ScalarAdaptiveLaw::gain_names());
  std::vector<std::string> names;
  const auto back = read_trajectory(ss, &names);
  EXPECT_EQ(names, (std::vector<std::string>{"c3", "c4"}));
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    ASSERT_EQ(back.state(k)[0], traj.state(k)[0]);
    ASSERT_EQ(back.gains(k)[1], traj.gains(k)[1]);
  }
}

TEST(Csv, StrideKeepsLastRow) {
  const auto traj = simulate_scalar(example1());
  std::stringstream ss;
  write_trajectory(ss, traj, {}, 7);
  const auto table = read_csv(ss);
  EXPECT_EQ(table.header, (std::vector<std::string>{"t", "x0"}));
  EXPECT_EQ(table.rows.back()[0], traj.current_time());
  EXPECT_EQ(table.rows.size(), (traj.size() - 1) / 7 + 2);
}

TEST(Csv, RejectsMalformedInput) {
  std::stringstream bad("t,x0\n0,1\n0.1,abc\n");
  EXPECT_THROW(read_csv(bad), Error);
  std::stringstream ragged("t,x0\n0,1,2\n");
  EXPECT_THROW(read_csv(ragged), Error);
}

TEST(Determinism, RepeatedRunsAreByteIdentical) {
  auto run = [] {
    const auto e = build_scalar(example1_config());
    std::stringstream ss;
    write_trajectory(ss, simulate_scalar(e));
    return ss.str();
  };
  EXPECT_EQ(run(), run());
  auto net = [] {
    auto e = build_network(example2_config());
    e.integrator.horizon = 1.0;
    std::stringstream ss;
    write_trajectory(ss, simulate_sync(e).error);
    return ss.str();
  };
  EXPECT_EQ(net(), net());
}
