#include "doctest.h"

#include "stentsim/error.hpp"
#include "stentsim/sweep.hpp"

using namespace stentsim;

namespace {

StentDesign small(const std::string& name, double width = 0.3) {
    StentDesign d;
    d.name = name;
    d.n_cells = 6;
    d.n_rows = 1;
    d.ring_diameters = {12.0, 11.0, 13.0};
    d.row_heights = {8.0};
    d.strut_width = width;
    d.elements_per_strut = 2;
    return d;
}

Scenario quick() {
    Scenario s;
    s.solver.energy_floor = 0.05;
    s.crimp.target_diameter = 6.0;
    s.lumen.base_radius.points = {{0, 5.8}, {15, 5.6}, {40, 5.8}};
    s.lumen.wall_penalty = 5.0;
    s.lumen.motion.period = 0.2;
    s.lumen.motion.peak_time = 0.064;
    s.lumen.motion.radial_amplitude = 0.1;
    s.beat.n_cycles = 2;
    s.beat.samples_per_cycle = 20;
    return s;
}

void same_physics(const SweepResult& a, const SweepResult& b) {
    CHECK(a.design_name == b.design_name);
    CHECK(a.ok == b.ok);
    CHECK(a.anchorage_force == b.anchorage_force);
    CHECK(a.peak_compression == b.peak_compression);
    CHECK(a.mean_ei == b.mean_ei);
    CHECK(a.failed == b.failed);
    CHECK(a.points == b.points);
    CHECK(a.failed_fraction == b.failed_fraction);
    CHECK(a.periodicity == b.periodicity);
    CHECK(a.steps == b.steps);
}

SweepResult row(const std::string& name, double ff, double anchor = 0.0, double comp = 0.0) {
    SweepResult r;
    r.design_name = name;
    r.ok = true;
    r.failed_fraction = ff;
    r.anchorage_force = anchor;
    r.peak_compression = comp;
    return r;
}

} // namespace

TEST_CASE("empty sweep") {
    CHECK(run_sweep({}, MaterialParams{}, quick()).empty());
}

TEST_CASE("sweep is deterministic and independent of the thread count") {
    StentDesign bad = small("BAD");
    bad.ring_diameters = {12.0};
    bad.n_cells = 40; // cannot fit in the sheath
    const std::vector<StentDesign> designs{small("A"), small("A"), bad, small("B", 0.36)};
    const auto one = run_sweep(designs, MaterialParams{}, quick(), 1);
    const auto three = run_sweep(designs, MaterialParams{}, quick(), 3);
    REQUIRE(one.size() == 4);
    REQUIRE(three.size() == 4);
    same_physics(one[0], one[1]);
    for (int i = 0; i < 4; ++i) same_physics(one[i], three[i]);
    CHECK(one[0].ok);
    CHECK_FALSE(one[2].ok);
    CHECK(one[2].error.find("infeasible") != std::string::npos);
    CHECK(one[0].peak_compression > 0.0);
    CHECK(one[0].anchorage_force > 0.0);
    CHECK(one[3].ok);
    for (const auto& r : one) {
        CHECK(r.failed_fraction >= 0.0);
        CHECK(r.failed_fraction <= 1.0);
    }
}

TEST_CASE("summary counts match a re-run of the fatigue module") {
    const Scenario s = quick();
    const auto r = run_pipeline(small("A"), MaterialParams{}, s);
    CHECK(r.extraction_cycle == 1);
    const Frame f = build_stent(small("A"));
    const FrameModel m = make_model(f, MaterialParams{}, s);
    const auto again = region_report(analyze(r.beat.strains.cycle_histories(1), point_layout(m), s.limits));
    const SweepResult row = summarize("A", r);
    for (int g = 0; g < 3; ++g) {
        CHECK(row.failed[g] == again.regions[g].failed);
        CHECK(row.points[g] == again.regions[g].count);
    }
    CHECK(row.points[0] + row.points[1] + row.points[2] == static_cast<std::size_t>(m.point_count()));
}

TEST_CASE("ranking") {
    CHECK(rank_designs({row("X", 0.2)}, RankKey::failed_fraction).front().design_name == "X");
    const auto tie = rank_designs({row("b", 0.1), row("a", 0.1)}, RankKey::failed_fraction);
    CHECK(tie[0].design_name == "a");
    CHECK(tie[1].design_name == "b");
    // optimized design with fewer failing points comes first
    SweepResult broken = row("ZZ", 0.0);
    broken.ok = false;
    const auto r = rank_designs({row("CV-C", 0.08), broken, row("PV2", 0.01), row("EV-C", 0.12)},
                                RankKey::failed_fraction);
    CHECK(r[0].design_name == "PV2");
    CHECK(r[1].design_name == "CV-C");
    CHECK(r[2].design_name == "EV-C");
    CHECK(r[3].design_name == "ZZ");
    const auto a = rank_designs({row("P", 0, 25), row("C", 0, 50), row("E", 0, 40)}, RankKey::anchorage);
    CHECK(a[0].design_name == "C");
    CHECK(a[2].design_name == "P");
    const auto c = rank_designs({row("P", 0, 0, 3.5), row("C", 0, 0, 3.0)}, RankKey::compression);
    CHECK(c[0].design_name == "C");
    CHECK(rank_key_from_string("anchorage") == RankKey::anchorage);
    CHECK_THROWS_AS(rank_key_from_string("speed"), ValidationError);
}
