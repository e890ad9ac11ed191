#include <gtest/gtest.h>

#include <fstream>

#include "lsqmamot/config.hpp"
#include "lsqmamot/error.hpp"
#include "oracles.hpp"

using namespace lsqmamot;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(ParseConfig, EmptyDocumentIsDefaults) {
    const ExperimentConfig c = parse_config(json::object());
    EXPECT_EQ(c.tracker.hits, 3);
    EXPECT_EQ(c.tracker.age, 2);
    EXPECT_EQ(c.tracker.method, Method::Arlot);
    EXPECT_EQ(c.eval.recall_points, 40);
    EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{0});
    EXPECT_EQ(c.methods.size(), 4u);
}

TEST(ParseConfig, UnknownKeysNamed) {
    EXPECT_NE(error_of({{"bogus", 1}}).find("bogus"), std::string::npos);
    EXPECT_NE(error_of({{"tracker", {{"hitz", 3}}}}).find("tracker.hitz"), std::string::npos);
    EXPECT_NE(error_of({{"scenario", {{"agents", {{{"id", 0}, {"rnage", 3}}}}}}}).find("rnage"),
              std::string::npos);
}

TEST(ParseConfig, TypeAndRangeErrorsNamed) {
    EXPECT_NE(error_of({{"tracker", {{"hits", "three"}}}}).find("tracker.hits"), std::string::npos);
    EXPECT_NE(error_of({{"tracker", {{"hits", 0}}}}).find("hits"), std::string::npos);
    EXPECT_NE(error_of({{"tracker", {{"age", 0}}}}).find("age"), std::string::npos);
    EXPECT_NE(error_of({{"tracker", {{"method", "mamot"}}}}).find("mamot"), std::string::npos);
    EXPECT_NE(error_of({{"attack", {{"drop_rate", 2.0}}}}).find("drop_rate"), std::string::npos);
}

TEST(ParseConfig, ReadsNestedValues) {
    const ExperimentConfig c = parse_config({{"attack", {{"epsilon", 0.25}, {"targets", {0}}}},
                                             {"tracker", {{"method", "merged"}, {"kalman", {{"r", 2.0}}}}},
                                             {"seeds", {3, 4}},
                                             {"methods", {"single", "arlot"}}});
    EXPECT_EQ(c.attack.epsilon, 0.25);
    EXPECT_EQ(c.attack.targets, std::set<int>{0});
    EXPECT_EQ(c.tracker.method, Method::Merged);
    EXPECT_EQ(c.tracker.kalman.R(0, 0), 2.0);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
    EXPECT_EQ(c.methods, (std::vector<Method>{Method::Single, Method::Arlot}));
}

TEST(ParseConfig, RoundTripsThroughJson) {
    ExperimentConfig c = parse_config({{"attack", {{"epsilon", 0.25}}}, {"seeds", {1, 2}}});
    const json j = to_json(c);
    EXPECT_EQ(to_json(parse_config(j)), j);
}

TEST(Overrides, DottedPathsAndIndices) {
    json doc = json::object();
    apply_overrides(doc, {"attack.epsilon=0.25", "tracker.method=single", "seeds=[1,2,3]"});
    EXPECT_EQ(doc["attack"]["epsilon"], 0.25);
    EXPECT_EQ(doc["tracker"]["method"], "single");
    EXPECT_EQ(doc["seeds"].size(), 3u);
    const ExperimentConfig c = parse_config(doc);
    EXPECT_EQ(c.attack.epsilon, 0.25);
    EXPECT_EQ(c.tracker.method, Method::Single);
    EXPECT_THROW(apply_overrides(doc, {"novalue"}), ConfigError);
}

TEST(Overrides, ArrayElementByIndex) {
    json doc = to_json(ExperimentConfig{});
    apply_overrides(doc, {"scenario.agents.1.range=12", "seeds.0=7"});
    const ExperimentConfig c = parse_config(doc);
    EXPECT_EQ(c.scenario.agents.at(1).range, 12.0);
    EXPECT_EQ(c.scenario.agents.at(0).range, ScenarioConfig{}.agents.at(0).range);
    EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{7});
}

TEST(LoadConfig, FileAndOverrides) {
    const auto dir = oracle::scratch_dir("config_load");
    {
        std::ofstream out(dir / "c.json");
        out << R"({"tracker": {"hits": 4}, "attack": {"epsilon": 0.1}})";
    }
    const ExperimentConfig c = load_config(dir / "c.json", {"attack.epsilon=0.2"});
    EXPECT_EQ(c.tracker.hits, 4);
    EXPECT_EQ(c.attack.epsilon, 0.2);
    {
        std::ofstream out(dir / "bad.json");
        out << "{ not json";
    }
    EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
    EXPECT_EQ(load_config({}).tracker.hits, 3);
}
