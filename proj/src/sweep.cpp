#include "stentsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "stentsim/error.hpp"

namespace stentsim {

int extraction_cycle(const BeatSettings& s) {
    const int c = s.extraction_cycle < 0 ? s.n_cycles - 1 : s.extraction_cycle;
    if (c < 0 || c >= s.n_cycles) throw ValidationError("extraction cycle outside the simulated cycles");
    return c;
}

PipelineResult run_pipeline(const StentDesign& design, const MaterialParams& params, const Scenario& scenario) {
    validate(scenario);
    const Frame frame = build_stent(design);
    const FrameModel model = make_model(frame, params, scenario);
    PipelineResult out;
    out.added_mass_fraction = model.added_mass_fraction();
    out.extraction_cycle = extraction_cycle(scenario.beat);
    out.crimp = crimp(model, scenario.crimp);
    LumenContact lumen(model, scenario.lumen,
                       implantation_offset(frame, scenario.lumen, scenario.deploy.implantation_depth));
    out.deploy = deploy(model, out.crimp.state, lumen, scenario.deploy, scenario.crimp);
    out.beat = beat_cycles(model, out.deploy.state, lumen, scenario.beat);
    out.records = analyze(out.beat.strains.cycle_histories(out.extraction_cycle), point_layout(model),
                          scenario.limits);
    out.report = region_report(out.records);
    return out;
}

SweepResult summarize(const std::string& name, const PipelineResult& r) {
    SweepResult s;
    s.design_name = name;
    s.ok = true;
    s.anchorage_force = r.deploy.anchorage_force;
    const auto& tr = r.beat.tracking;
    const auto& cyc = r.beat.strains.cycle;
    double ei = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (cyc[k] != r.extraction_cycle) continue;
        s.peak_compression = n == 0 ? tr.compression[k] : std::max(s.peak_compression, tr.compression[k]);
        ei += tr.eccentricity_index[k];
        ++n;
    }
    s.mean_ei = n > 0 ? ei / n : 0.0;
    for (int g = 0; g < 3; ++g) {
        s.failed[g] = r.report.regions[g].failed;
        s.points[g] = r.report.regions[g].count;
    }
    const std::size_t total = r.report.total();
    s.failed_fraction = total > 0 ? static_cast<double>(r.report.total_failed()) / static_cast<double>(total) : 0.0;
    s.periodicity = r.beat.periodicity.empty() ? 0.0 : r.beat.periodicity.back();
    s.steps = r.crimp.stats.steps + r.deploy.stats.steps + r.beat.stats.steps;
    s.added_mass_fraction = r.added_mass_fraction;
    return s;
}

std::vector<SweepResult> run_sweep(const std::vector<StentDesign>& designs, const MaterialParams& params,
                                   const Scenario& scenario, int jobs) {
    std::vector<SweepResult> out(designs.size());
    if (designs.empty()) return out;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < designs.size(); i = next++) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                out[i] = summarize(designs[i].name, run_pipeline(designs[i], params, scenario));
            } catch (const std::exception& e) {
                out[i] = SweepResult{};
                out[i].design_name = designs[i].name;
                out[i].error = e.what();
            }
            out[i].wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const int n = std::clamp(jobs, 1, static_cast<int>(designs.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

RankKey rank_key_from_string(const std::string& s) {
    if (s == "failed_fraction") return RankKey::failed_fraction;
    if (s == "anchorage") return RankKey::anchorage;
    if (s == "compression") return RankKey::compression;
    throw ValidationError("unknown rank key '" + s + "'");
}

std::vector<SweepResult> rank_designs(std::vector<SweepResult> results, RankKey key) {
    auto score = [key](const SweepResult& r) {
        switch (key) {
        case RankKey::failed_fraction: return r.failed_fraction;
        case RankKey::anchorage: return -r.anchorage_force;
        case RankKey::compression: return r.peak_compression;
        }
        return 0.0;
    };
    std::stable_sort(results.begin(), results.end(), [&](const SweepResult& a, const SweepResult& b) {
        if (a.ok != b.ok) return a.ok;
        if (a.ok && score(a) != score(b)) return score(a) < score(b);
        return a.design_name < b.design_name;
    });
    return results;
}

} // namespace stentsim
