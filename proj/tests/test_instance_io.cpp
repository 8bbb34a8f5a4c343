#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "kronriver/instance_io.hpp"
#include "kronriver/instances.hpp"

using namespace kronriver;
using nlohmann::json;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

RiverInstance roundTrip(const RiverInstance& inst, const std::string& path) {
    writeInstance(inst, path);
    return readInstance(path);
}

} // namespace

TEST_CASE("instances round trip through json files") {
    std::mt19937_64 rng(404);
    std::vector<RiverInstance> corpus = {goldenInstance(), twentyCardInstance(),
                                         bluffingInstance(), allTieInstance(),
                                         randomSmallInstance(rng)};
    int idx = 0;
    for (const RiverInstance& inst : corpus) {
        TempFile tmp("build/io_round_" + std::to_string(idx++) + ".json");
        RiverInstance back = roundTrip(inst, tmp.path);
        REQUIRE(back == inst);
    }
}

TEST_CASE("belief weights survive at full precision") {
    RiverInstance inst = bluffingInstance();
    inst.beliefs[0][0] = 1.0 / 3.0;
    inst.beliefs[0][1] = 0.1 + 0.2;
    TempFile tmp("build/io_precision.json");
    RiverInstance back = roundTrip(inst, tmp.path);
    REQUIRE(back.beliefs[0][0] == 1.0 / 3.0);
    REQUIRE(back.beliefs[0][1] == 0.1 + 0.2);
    REQUIRE(back.config.potContribution == inst.config.potContribution);
}

TEST_CASE("raise cap round trips as null and as a number") {
    RiverInstance inst = goldenInstance();
    TempFile tmp("build/io_cap.json");
    REQUIRE(!roundTrip(inst, tmp.path).config.raiseCap.has_value());
    inst.config.raiseCap = 3;
    RiverInstance back = roundTrip(inst, tmp.path);
    REQUIRE(back.config.raiseCap.has_value());
    REQUIRE(*back.config.raiseCap == 3);
}

TEST_CASE("reader reports malformed content") {
    json good = instanceToJson(bluffingInstance());

    SECTION("unknown card code") {
        json j = good;
        j["board"][0] = "Zx";
        REQUIRE_THROWS_AS(instanceFromJson(j), ParseError);
    }
    SECTION("short hand code") {
        json j = good;
        j["beliefs"][0]["Ah"] = 1.0;
        REQUIRE_THROWS_AS(instanceFromJson(j), ParseError);
    }
    SECTION("hand overlapping the board") {
        json j = good;
        j["beliefs"][0]["2c2d"] = 1.0;
        REQUIRE_THROWS_AS(instanceFromJson(j), ParseError);
    }
    SECTION("duplicate hand after canonicalization") {
        json j = good;
        j["beliefs"][1]["AcAd"] = 0.5;  // same hand as the existing AdAc key
        REQUIRE_THROWS_WITH(instanceFromJson(j), Catch::Matchers::ContainsSubstring("repeats"));
    }
    SECTION("duplicate deck card") {
        json j = good;
        j["deck"] = {"2c", "2c", "3c", "4c", "5c", "6c", "7c"};
        REQUIRE_THROWS_AS(instanceFromJson(j), ParseError);
    }
    SECTION("degenerate beliefs") {
        json j = good;
        j["beliefs"][0] = {{"AhAs", 1.0}};
        j["beliefs"][1] = {{"AsAh", 1.0}};
        REQUIRE_THROWS_WITH(instanceFromJson(j),
                            Catch::Matchers::ContainsSubstring("degenerate"));
    }
    SECTION("missing fields") {
        for (const char* key : {"schema_version", "deck", "board", "stacks",
                                "pot_contribution", "beliefs", "betting"}) {
            json j = good;
            j.erase(key);
            REQUIRE_THROWS_WITH(instanceFromJson(j),
                                Catch::Matchers::ContainsSubstring(key));
        }
    }
    SECTION("wrong schema version") {
        json j = good;
        j["schema_version"] = 99;
        REQUIRE_THROWS_AS(instanceFromJson(j), ParseError);
    }
    SECTION("unknown menu context") {
        json j = good;
        j["betting"]["menus"][0]["preflop"] = {0.5};
        REQUIRE_THROWS_WITH(instanceFromJson(j),
                            Catch::Matchers::ContainsSubstring("preflop"));
    }
    SECTION("board size") {
        json j = good;
        j["board"].push_back("6h");
        REQUIRE_THROWS_AS(instanceFromJson(j), ParseError);
    }
    SECTION("negative belief weight") {
        json j = good;
        j["beliefs"][0]["3s3h"] = -0.5;
        REQUIRE_THROWS_AS(instanceFromJson(j), ParseError);
    }
}

TEST_CASE("missing menu contexts read as empty menus") {
    json j = instanceToJson(bluffingInstance());
    j["betting"]["menus"][0].erase("facing_bet");
    RiverInstance inst = instanceFromJson(j);
    REQUIRE(inst.config.menu(0, BetContext::FacingBet).empty());
    REQUIRE(inst.config.menu(0, BetContext::FirstAction) == std::vector<double>{1.0});
}

TEST_CASE("file level errors") {
    REQUIRE_THROWS_AS(readInstance("build/does_not_exist.json"), IoError);

    TempFile tmp("build/io_garbage.json");
    std::ofstream(tmp.path) << "{ not json";
    REQUIRE_THROWS_AS(readInstance(tmp.path), ParseError);

    TempFile empty("build/io_empty.json");
    std::ofstream(empty.path) << "";
    REQUIRE_THROWS_AS(readInstance(empty.path), ParseError);
}

TEST_CASE("bundled instance files match their constructors") {
    REQUIRE(readInstance("instances/golden.json") == goldenInstance());
    REQUIRE(readInstance("instances/twenty_card.json") == twentyCardInstance());
    REQUIRE(readInstance("instances/bluffing.json") == bluffingInstance());
    REQUIRE(readInstance("instances/all_tie.json") == allTieInstance());
}
