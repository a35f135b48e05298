#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "gibbsbox/io.hpp"

using namespace gibbsbox;
using Catch::Approx;

namespace {

std::vector<std::string> violations_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.violations;
    }
    return {};
}

bool mentions(const std::vector<std::string>& vs, const std::string& needle) {
    for (const auto& v : vs)
        if (v.find(needle) != std::string::npos) return true;
    return false;
}

std::vector<std::pair<double, double>> sorted_points(const PointConfiguration2& cfg) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < cfg.size(); ++i)
        pts.emplace_back(cfg.point(i)[0], cfg.point(i)[1]);
    std::sort(pts.begin(), pts.end());
    return pts;
}

}  // namespace

TEST_CASE("config parsing") {
    SECTION("minimal simulate config fills the defaults") {
        auto rc = parse_config(R"({
            "subcommand": "simulate",
            "model": {"family": "strauss", "R": 0.5, "z": 2.0, "beta": 0.7},
            "window": {"lo": [0, 0], "hi": [10, 10]}
        })");
        CHECK(rc.subcommand == "simulate");
        CHECK(rc.seed == 20260825);
        CHECK(rc.out_dir == "out");
        CHECK(rc.formats == std::vector<std::string>{"csv", "json"});
        CHECK(rc.replicates == 1);
        CHECK(rc.sampler.z == 2.0);
        CHECK(rc.sampler.beta == 0.7);
        CHECK(rc.sampler.seed == rc.seed);
        CHECK(rc.window.volume() == Approx(100.0));
        auto model = rc.model.build();
        CHECK(model.interaction_range() == 0.5);
    }

    SECTION("negative activity names the violating path") {
        auto vs = violations_of(R"({
            "subcommand": "simulate",
            "model": {"family": "strauss", "R": 0.5, "z": -1.0},
            "window": {"lo": [0, 0], "hi": [1, 1]}
        })");
        REQUIRE_FALSE(vs.empty());
        CHECK(mentions(vs, "model.z"));
    }

    SECTION("mixing family keys is an unknown-key rejection") {
        auto vs = violations_of(R"({
            "subcommand": "simulate",
            "model": {"family": "strauss", "R": 0.5, "area": {"R": 1.0}},
            "window": {"lo": [0, 0], "hi": [1, 1]}
        })");
        REQUIRE_FALSE(vs.empty());
        CHECK(mentions(vs, "unknown key 'area'"));
    }

    SECTION("all violations are reported at once") {
        auto vs = violations_of(R"({
            "subcommand": "simulate",
            "model": {"family": "strauss", "R": -2.0, "z": -1.0, "beta": -3.0},
            "window": {"lo": [0, 0], "hi": [-1, 1]},
            "oracle": {"n_max": 99}
        })");
        CHECK(vs.size() >= 5);
        CHECK(mentions(vs, "model.R"));
        CHECK(mentions(vs, "model.z"));
        CHECK(mentions(vs, "model.beta"));
        CHECK(mentions(vs, "window"));
        CHECK(mentions(vs, "oracle"));
    }

    SECTION("missing required keys and unknown families") {
        CHECK(mentions(violations_of(R"({"subcommand": "simulate"})"), "config.model"));
        CHECK(mentions(violations_of(R"({"subcommand": "simulate"})"), "config.window"));
        CHECK(mentions(violations_of(R"({
            "subcommand": "simulate",
            "model": {"family": "hexagonal"},
            "window": {"lo": [0, 0], "hi": [1, 1]}
        })"),
                       "unknown model family"));
        CHECK(mentions(violations_of(R"({
            "subcommand": "fly",
            "model": {"family": "strauss", "R": 1.0},
            "window": {"lo": [0, 0], "hi": [1, 1]}
        })"),
                       "unknown subcommand"));
        CHECK(mentions(violations_of("not json at all"), "json:"));
    }

    SECTION("multi-strauss and area descriptors build") {
        auto rc = parse_config(R"({
            "subcommand": "oracle",
            "model": {"family": "multi_strauss", "coefficients": [1.0, 0.5],
                      "radii": [0.0, 0.3, 0.6], "z": 1.0, "beta": 1.0},
            "window": {"lo": [0, 0], "hi": [2, 2]}
        })");
        CHECK(rc.model.build().interaction_range() == Approx(0.6));

        auto rc2 = parse_config(R"({
            "subcommand": "simulate",
            "model": {"family": "area", "R": 1.0, "mc_samples": 512, "z": 0.5, "beta": 1.0},
            "window": {"lo": [0, 0], "hi": [4, 4]}
        })");
        auto m = rc2.model.build();
        CHECK(m.mc_samples() == 512);
        CHECK(m.interaction_range() == Approx(2.0));
    }

    SECTION("what() joins everything for humans") {
        try {
            parse_config(R"({"subcommand": "simulate"})");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            std::string w = e.what();
            CHECK(w.find("config.model") != std::string::npos);
            CHECK(w.find("config.window") != std::string::npos);
        }
    }
}

TEST_CASE("pattern csv roundtrip") {
    Window2 w = make_window(0, 0, 7, 5);

    SECTION("empty pattern roundtrips through a header-only file") {
        PointConfiguration2 empty(w, 1.0);
        std::ostringstream os;
        write_pattern_csv(empty, os);
        CHECK(os.str() == "x,y\n");
        std::istringstream is(os.str());
        auto back = read_pattern_csv(is, w);
        CHECK(back.size() == 0);
    }

    SECTION("a thousand random points come back exactly") {
        auto cfg = sample_poisson(w, 30.0, 424242);
        REQUIRE(cfg.size() > 800);
        auto back = pattern_roundtrip(cfg, "io_rt_test");
        REQUIRE(back.size() == cfg.size());
        CHECK(sorted_points(back) == sorted_points(cfg));
        CHECK(back.window().lo()[0] == w.lo()[0]);
        CHECK(back.window().hi()[1] == w.hi()[1]);
        std::remove("io_rt_test.csv");
        std::remove("io_rt_test.window.json");
    }

    SECTION("malformed rows are reported with their line number") {
        std::istringstream is("x,y\n1.0,\n");
        CHECK_THROWS_WITH(read_pattern_csv(is, w),
                          Catch::Matchers::ContainsSubstring("line 2"));
        std::istringstream is2("x,y\n1.0,2.0\nfoo,3.0\n");
        CHECK_THROWS_WITH(read_pattern_csv(is2, w),
                          Catch::Matchers::ContainsSubstring("line 3"));
        std::istringstream is3("a,b\n");
        CHECK_THROWS_WITH(read_pattern_csv(is3, w),
                          Catch::Matchers::ContainsSubstring("header"));
        std::istringstream is4("x,y\n1.0,2.0,3.0\n");
        CHECK_THROWS_WITH(read_pattern_csv(is4, w),
                          Catch::Matchers::ContainsSubstring("line 2"));
    }

    SECTION("points outside the declared window are rejected") {
        std::istringstream is("x,y\n9.5,1.0\n");
        CHECK_THROWS_WITH(read_pattern_csv(is, w),
                          Catch::Matchers::ContainsSubstring("outside the window"));
    }

    SECTION("window sidecar roundtrip") {
        Window2 odd = make_window(-1.5, 2.25, 3.75, 9.0);
        write_window_json(odd, "io_win_test.json");
        Window2 back = read_window_json("io_win_test.json");
        CHECK(back.lo()[0] == odd.lo()[0]);
        CHECK(back.lo()[1] == odd.lo()[1]);
        CHECK(back.hi()[0] == odd.hi()[0]);
        CHECK(back.hi()[1] == odd.hi()[1]);
        std::remove("io_win_test.json");
    }
}

TEST_CASE("svg rendering") {
    Window2 w = make_window(0, 0, 8, 6);

    SECTION("empty configuration renders just the frame") {
        PointConfiguration2 empty(w, 1.0);
        auto svg = render_svg(empty, w);
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("<rect") != std::string::npos);
        CHECK(svg.find("<circle") == std::string::npos);
        CHECK(svg.find("viewBox=\"0 0 8 6\"") != std::string::npos);
    }

    SECTION("one point with a radius gives exactly one circle at that radius") {
        PointConfiguration2 one(w, 2.0);
        one.insert(Point2{3.0, 2.0});
        auto svg = render_svg(one, w, 1.0);
        std::size_t n = 0, pos = 0;
        while ((pos = svg.find("<circle", pos)) != std::string::npos) {
            ++n;
            pos += 7;
        }
        CHECK(n == 1);
        CHECK(svg.find("r=\"1\"") != std::string::npos);
        CHECK(svg.find("cx=\"3\"") != std::string::npos);
    }

    SECTION("identical input renders byte-identical output") {
        auto cfg = sample_poisson(w, 2.0, 99);
        auto a = render_svg(cfg, w, 0.5);
        auto b = render_svg(cfg, w, 0.5);
        CHECK(a == b);
        std::size_t n = 0, pos = 0;
        while ((pos = a.find("<circle", pos)) != std::string::npos) {
            ++n;
            pos += 7;
        }
        CHECK(n == cfg.size());
    }
}

TEST_CASE("result and report serialization") {
    SECTION("estimation result json carries the flags and optional errors") {
        EstimationResult r;
        r.method = "mple";
        r.z_hat = 1.5;
        r.beta_hat = 0.25;
        r.contrast = 12.0;
        r.border_corrected = true;
        auto j = to_json(r);
        CHECK(j["method"] == "mple");
        CHECK(j["z_hat"] == 1.5);
        CHECK(j["border_corrected"] == true);
        CHECK(j["z_se"].is_null());
    }

    SECTION("experiment report json keeps verdicts auditable") {
        ExperimentReport rep;
        rep.name = "demo";
        rep.parameters["z"] = 1.0;
        rep.seeds = {7, 8};
        rep.record("xs", {1.0, 2.0});
        rep.check_le("small enough", 0.5, 1.0);
        auto j = to_json(rep);
        CHECK(j["name"] == "demo");
        CHECK(j["all_pass"] == true);
        CHECK(j["verdicts"][0]["value"] == 0.5);
        CHECK(j["verdicts"][0]["threshold"] == 1.0);
        CHECK(j["verdicts"][0]["relation"] == "<=");
        CHECK(j["aggregates"]["xs"]["mean"] == Approx(1.5));
        CHECK(j["seeds"] == nlohmann::json({7, 8}));

        auto csv = report_series_csv(rep);
        CHECK(csv.rfind("series,index,value\n", 0) == 0);
        CHECK(csv.find("xs,0,1\n") != std::string::npos);
        CHECK(csv.find("xs,1,2\n") != std::string::npos);
    }

    SECTION("run manifest echoes the validated config") {
        auto rc = parse_config(R"({
            "subcommand": "simulate",
            "model": {"family": "strauss", "R": 0.5, "z": 1.0, "beta": 0.5},
            "window": {"lo": [0, 0], "hi": [5, 5]},
            "seed": 99
        })");
        auto man = run_manifest(rc, {"sample_000.csv"});
        CHECK(man["tool"] == "gibbsbox");
        CHECK(man["config"]["seed"] == 99);
        CHECK(man["config"]["model"]["family"] == "strauss");
        CHECK(man["outputs"][0] == "sample_000.csv");
    }
}
