#include "helpers.hpp"

#include "config.hpp"

#include <filesystem>

using namespace kcut::app;
using namespace testing;

namespace {

RunConfig random_config(Rng& r) {
    RunConfig c;
    auto any = [&](std::vector<std::string> v) { return v[pick(r, 0, static_cast<int>(v.size()) - 1)]; };
    c.input = any({"a.csv", "dir with space/b.csv", "x:y.png", "'quoted'.csv", "#hash.csv"});
    c.truth = any({"", "t.csv"});
    c.out = any({"out", "res/run 1"});
    c.objective = any({"aa", "ac", "nc"});
    c.kernel = any({"knn:10", "knn:400,50", "gaussian:0.3", "adaptive:log", "adaptive:const,0.2"});
    c.bound = any({"kernel", "spectral", "spectral:7", "pseudo"});
    c.K = pick(r, 2, 9);
    c.gamma = unif(r, 0, 5);
    c.moves = any({"expansion", "swap"});
    c.init = any({"kmeans", "spectral", "random"});
    if (pick(r, 0, 1)) c.delta = unif(r, 0, 3);
    c.seed = r();
    c.schedule = any({"loop", "move", "converge"});
    c.max_outer = pick(r, 1, 500);
    c.tol = unif(r, 1e-12, 1e-3);
    c.potts_knn = pick(r, 0, 20);
    c.potts = any({"contrast", "length"});
    c.connectivity = pick(r, 0, 1) ? 4 : 8;
    c.label_cost = unif(r, 0, 2);
    c.pn_patch = pick(r, 0, 8);
    c.pn_fraction = unif(r, 0.01, 0.5);
    c.seeds_png = any({"", "s.png"});
    if (pick(r, 0, 1)) c.box = std::array<int, 4>{pick(r, 0, 9), pick(r, 0, 9), pick(r, 1, 50), pick(r, 1, 50)};
    c.color = any({"lab", "rgb"});
    c.beta_xy = unif(r, 0, 10);
    c.max_pixels = pick(r, 0, 300000);
    c.rank = pick(r, 0, 40);
    return c;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("YAML round-trip is lossless on random configurations") {
    Rng r(601);
    for (int t = 0; t < 200; ++t) {
        RunConfig c = random_config(r);
        CHECK_NOTHROW(c.validate());
        RunConfig back = parse_config(to_yaml(c));
        CHECK(back == c);
    }
}

TEST_CASE("file round-trip") {
    std::filesystem::create_directories(KCUT_TEST_TMP);
    const std::string path = std::string(KCUT_TEST_TMP) + "/config_rt.yaml";
    Rng r(602);
    RunConfig c = random_config(r);
    save_config(path, c);
    CHECK(load_config(path) == c);
    CHECK_THROWS_AS(load_config(std::string(KCUT_TEST_TMP) + "/absent.yaml"), UsageError);
}

TEST_CASE("partial files keep defaults") {
    RunConfig c = parse_config("model:\n  objective: aa\n  labels: 4\n");
    CHECK(c.objective == "aa");
    CHECK(c.K == 4);
    CHECK(c.kernel == RunConfig{}.kernel);
    CHECK(parse_config("") == RunConfig{});
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(parse_config("model:\n  objectiv: aa\n"), UsageError);
    CHECK_THROWS_AS(parse_config("colour: red\n"), UsageError);
    CHECK_THROWS_AS(parse_config("model:\n  labels: two\n"), UsageError);
    CHECK_THROWS_AS(parse_config("model: [1, 2\n"), UsageError);
    try {
        parse_config("optimizer:\n  bogus: 1\n");
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
}

TEST_CASE("validation") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    auto bad = [](auto mutate) {
        RunConfig x;
        mutate(x);
        CHECK_THROWS_AS(x.validate(), UsageError);
    };
    bad([](RunConfig& x) { x.objective = "ratio"; });
    bad([](RunConfig& x) { x.kernel = "knn:0"; });
    bad([](RunConfig& x) { x.bound = "tight"; });
    bad([](RunConfig& x) { x.K = 0; });
    bad([](RunConfig& x) { x.gamma = -1; });
    bad([](RunConfig& x) { x.schedule = "never"; });
    bad([](RunConfig& x) { x.connectivity = 6; });
    bad([](RunConfig& x) { x.color = "hsv"; });
    bad([](RunConfig& x) { x.max_outer = 0; });
}

TEST_CASE("segmentation defaults") {
    RunConfig s = RunConfig::segmentation_defaults();
    CHECK(s.objective == "aa");
    CHECK(s.kernel == "knn:400,50");
    CHECK(s.gamma > 0);
}

TEST_CASE("box parsing") {
    CHECK(parse_box("1,2,30,40") == std::array<int, 4>{1, 2, 30, 40});
    CHECK(parse_box(" 0, 0, 5, 5 ") == std::array<int, 4>{0, 0, 5, 5});
    for (std::string s : {"1,2,3", "1,2,3,4,5", "a,b,c,d", "0,0,-1,4", "0,0,0,4", "-1,0,3,3"})
        CHECK_THROWS_AS(parse_box(s), UsageError);
}

}
