#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "json.hpp"
#include "stentsim/error.hpp"
#include "stentsim/io.hpp"
#include "stentsim/svg.hpp"

using namespace stentsim;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("stentsim_test_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

std::vector<FatigueRecord> random_records(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 0.02);
    std::vector<FatigueRecord> out;
    for (int i = 0; i < n; ++i) {
        FatigueRecord r;
        r.point = i;
        r.id = {i / 8, (i / 4) % 2, i % 4};
        r.region = kRegions[i % 3];
        r.eps_mean = g(rng);
        r.eps_amp = std::abs(g(rng)) / 3;
        const auto c = classify(r.eps_mean, r.eps_amp, FatigueLimits{});
        r.failed = c.failed;
        r.mode = c.mode;
        r.theta = std::abs(g(rng)) * 100;
        r.z = g(rng) * 1000;
        out.push_back(r);
    }
    return out;
}

} // namespace

TEST_CASE("doubles survive text exactly") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::uint64_t> bits;
    int tested = 0;
    while (tested < 20000) {
        const std::uint64_t b = bits(rng);
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        REQUIRE(same_bits(parse_double(format_double(v)), v));
        ++tested;
    }
    for (double v : {0.0, -0.0, 1e-310, std::numeric_limits<double>::max(), 0.1, 1.0 / 3.0})
        CHECK(same_bits(parse_double(format_double(v)), v));
    CHECK_THROWS_AS(parse_double("1.5x"), IoError);
    CHECK_THROWS_AS(parse_double(""), IoError);
}

TEST_CASE("design JSON round trip and strictness") {
    StentDesign d;
    d.name = "X-C";
    d.n_cells = 15;
    d.n_rows = 4;
    d.ring_diameters = {26, 25, 24, 23, 23, 24, 26, 28, 30};
    d.row_heights = {11};
    d.strut_width = 0.4;
    d.thickness_profile = {{0.0, 0.5, 0.36}, {0.5, 1.0, 0.28}};
    const std::string text = design_to_json_text(d);
    const StentDesign back = design_from_json_text(text);
    CHECK(design_to_json_text(back) == text);
    CHECK(back.ring_diameters == d.ring_diameters);
    CHECK(back.thickness_profile.size() == 2);

    CHECK_THROWS_AS(design_from_json_text(R"({"name":"a","n_cels":12,"ring_diameters":[20],"row_heights":[10]})"),
                    ValidationError);
    CHECK_THROWS_AS(design_from_json_text(R"({"name":"a","n_cells":"12","ring_diameters":[20],"row_heights":[10]})"),
                    ValidationError);
    CHECK_THROWS_AS(design_from_json_text("{not json"), ValidationError);
    CHECK_THROWS_AS(design_from_json_text(R"({"name":"a","n_cells":2,"ring_diameters":[20],"row_heights":[10]})"),
                    ValidationError);
}

TEST_CASE("material and scenario JSON round trip") {
    MaterialParams p;
    p.sig_LS = 260.0;
    CHECK(material_from_json_text(material_to_json_text(p)).sig_LS == 260.0);
    CHECK_THROWS_AS(material_from_json_text(R"({"E_A": -1})"), ValidationError);

    Scenario s;
    s.lumen.base_radius.points = {{0, 12}, {10, 11.5}, {60, 15}};
    s.lumen.motion.radial_amplitude = 0.3125;
    s.beat.band = {2, 4};
    s.limits.curve = {{0.0, 0.006}, {0.08, 0.002}};
    const std::string text = scenario_to_json_text(s);
    const Scenario back = scenario_from_json_text(text);
    CHECK(scenario_to_json_text(back) == text);
    CHECK(back.beat.band.ring_first == 2);

    const Scenario fr = scenario_from_json_text(
        R"({"crimp":{"target_french":18},"lumen":{"base_radius":[[0,12],[40,12]]}})");
    CHECK(fr.crimp.target_diameter == doctest::Approx(6.0));
    CHECK_THROWS_AS(scenario_from_json_text(R"({"lumen":{"base_radius":[[0,12],[40,12]]},"beat":{"cycles":3}})"),
                    ValidationError);
}

TEST_CASE("scenario files resolve relative paths") {
    const fs::path dir = scratch("scenario");
    ScenarioFile f;
    f.scenario.lumen.base_radius.points = {{0, 12}, {40, 12}};
    f.design = "../designs/a.json";
    f.material = "m.json";
    save_scenario(dir / "s.json", f);
    const ScenarioFile back = load_scenario(dir / "s.json");
    CHECK(back.design == dir / "../designs/a.json");
    CHECK(back.material == dir / "m.json");
}

TEST_CASE("CSV tables round trip losslessly") {
    std::mt19937_64 rng(3);
    const auto recs = random_records(200, rng);
    const fs::path dir = scratch("csv");
    write_text(dir / "fatigue.csv", to_csv(fatigue_table(recs)));
    const auto back = fatigue_from_table(read_csv(dir / "fatigue.csv"));
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].point == recs[i].point);
        CHECK(back[i].id.fiber == recs[i].id.fiber);
        CHECK(back[i].region == recs[i].region);
        CHECK(same_bits(back[i].eps_mean, recs[i].eps_mean));
        CHECK(same_bits(back[i].eps_amp, recs[i].eps_amp));
        CHECK(back[i].failed == recs[i].failed);
        CHECK(back[i].mode == recs[i].mode);
        CHECK(same_bits(back[i].theta, recs[i].theta));
        CHECK(same_bits(back[i].z, recs[i].z));
    }

    TrackingSeries ts;
    std::normal_distribution<double> g;
    for (int k = 0; k < 50; ++k) ts.push(0.01 * k + g(rng) * 1e-9, {13 + g(rng), g(rng), 0.1 * std::abs(g(rng)), std::abs(g(rng))});
    const auto tb = tracking_from_table(parse_csv(to_csv(tracking_table(ts, {}, {}))));
    REQUIRE(tb.size() == ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        CHECK(same_bits(tb.times[k], ts.times[k]));
        CHECK(same_bits(tb.avg_radius[k], ts.avg_radius[k]));
        CHECK(same_bits(tb.compression[k], ts.compression[k]));
        CHECK(same_bits(tb.eccentricity_index[k], ts.eccentricity_index[k]));
        CHECK(same_bits(tb.radii_deviation[k], ts.radii_deviation[k]));
    }

    std::vector<EnergySample> es{{0.1, 1.0 / 3, 2.0 / 7, 1e-17, 5.5}};
    const auto eb = energy_from_table(parse_csv(to_csv(energy_table(es))));
    CHECK(same_bits(eb[0].strain, es[0].strain));
    CHECK(same_bits(eb[0].work, es[0].work));

    const auto t = energy_table(es);
    CHECK(t.header[0] == "time_s");
    CHECK(t.header[2] == "strain_mJ");
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IoError);
    CHECK_THROWS_AS(t.column("nope"), IoError);
}

TEST_CASE("strain store round trip") {
    StrainHistoryStore s;
    s.points = 3;
    s.samples_per_cycle = 2;
    for (int k = 0; k < 4; ++k) {
        s.times.push_back(0.5 * (k + 1));
        s.cycle.push_back(k / 2);
        for (int p = 0; p < 3; ++p) s.data.push_back(std::sin(k * 3 + p));
    }
    const fs::path dir = scratch("store");
    write_strain_store(dir / "s.bin", s);
    const auto b = read_strain_store(dir / "s.bin");
    CHECK(b.points == 3);
    CHECK(b.times == s.times);
    CHECK(b.cycle == s.cycle);
    CHECK(b.data == s.data);
    write_text(dir / "bad.bin", "nope");
    CHECK_THROWS_AS(read_strain_store(dir / "bad.bin"), IoError);
}

TEST_CASE("manifest checksums") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const fs::path dir = scratch("manifest");
    write_text(dir / "a.txt", "abc");
    write_text(dir / "sub/b.txt", "");
    write_manifest(dir, {dir / "a.txt", "sub/b.txt"}, R"({"run":"test"})");
    const auto j = nlohmann::json::parse(read_text(dir / "manifest.json"));
    REQUIRE(j["artifacts"].size() == 2);
    CHECK(j["artifacts"][0]["path"] == "a.txt");
    CHECK(j["artifacts"][0]["bytes"] == 3);
    CHECK(j["artifacts"][1]["path"] == "sub/b.txt");
    CHECK(j["artifacts"][1]["sha256"] == sha256_hex(""));
    CHECK(j["info"]["run"] == "test");
}

TEST_CASE("SVG output") {
    std::mt19937_64 rng(5);
    const auto recs = random_records(300, rng);
    const FatigueLimits L;
    const auto cl = constant_life_data(recs, L);
    const std::string a = render_scatter(cl), b = render_scatter(constant_life_data(recs, L));
    CHECK(a == b);
    CHECK(count(a, "<polyline") == 1);
    CHECK(count(a, "class=\"boundary\"") == 1);
    CHECK(count(a, "<circle") == recs.size());

    FatigueLimits curved;
    curved.curve = {{0.0, 0.006}, {0.02, 0.004}, {0.08, 0.001}};
    CHECK(count(render_scatter(constant_life_data(recs, curved)), "<polyline") == 1);

    const std::string empty = render_scatter(constant_life_data({}, L));
    CHECK(count(empty, "<circle") == 0);
    CHECK(count(empty, "class=\"axes\"") == 1);
    CHECK(empty.find("</svg>") != std::string::npos);

    const auto polar = polar_projection(recs);
    CHECK(render_heat(polar) == render_heat(polar_projection(recs)));
    CHECK(count(render_heat(polar), "<rect") >= polar.points.size());

    CurvePlot c;
    c.title = "radial force";
    c.x_label = "diameter (mm)";
    c.y_label = "force (N)";
    c.series = {{"A", {26, 20, 10}, {0, 5, 20}}, {"B & C", {26, 20, 10}, {0, 6, 25}}};
    const std::string cs = render_curve(c);
    CHECK(cs == render_curve(c));
    CHECK(count(cs, "<polyline") == 2);
    CHECK(cs.find("B &amp; C") != std::string::npos);
    c.series[0].y.pop_back();
    CHECK_THROWS_AS(render_curve(c), ValidationError);

    const fs::path dir = scratch("svg");
    emit_svg(cl, dir / "x.svg");
    CHECK(read_text(dir / "x.svg") == a);
    CHECK(nlohmann::json::parse(dataset_json(cl))["points"].size() == recs.size());
}
