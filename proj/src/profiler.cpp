#include "chirplab/profiler.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "chirplab/common.hpp"

using nlohmann::json;

namespace chirplab::profiler {

ProfileResult extrapolate(const std::string& name, double profile_sec, std::size_t n_profiled,
                          const BudgetSpec& budget) {
    if (profile_sec < 0.0) {
        throw ValidationError("extrapolate: negative profile time " + format_double(profile_sec));
    }
    if (n_profiled < 1) {
        throw ValidationError("extrapolate: n_profiled must be at least 1");
    }
    if (budget.n_test == 0 || !(budget.budget_minutes > 0.0)) {
        throw ValidationError("extrapolate: budget must have positive n_test and minutes");
    }
    ProfileResult result;
    result.name = name;
    result.profile_sec = profile_sec;
    result.n_profiled = n_profiled;
    result.rate_sec_per_recording = profile_sec / static_cast<double>(n_profiled);
    result.estimate_hours =
        result.rate_sec_per_recording * static_cast<double>(budget.n_test) / 3600.0;
    result.fits_budget = result.estimate_hours * 60.0 <= budget.budget_minutes;
    return result;
}

double time_stage(const Stage& stage, const std::vector<std::string>& recordings,
                  std::size_t repetitions) {
    if (repetitions < 1) {
        throw ValidationError("time_stage: repetitions must be at least 1");
    }
    if (recordings.empty()) {
        return 0.0;  // nothing to process, nothing to measure
    }
    std::vector<double> runs;
    runs.reserve(repetitions);
    for (std::size_t r = 0; r < repetitions; ++r) {
        const auto start = std::chrono::steady_clock::now();
        try {
            stage.run(recordings);
        } catch (const std::exception& e) {
            throw ValidationError("time_stage: stage '" + stage.name + "' failed: " + e.what());
        }
        const auto stop = std::chrono::steady_clock::now();
        runs.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(runs.begin(), runs.end());
    const std::size_t n = runs.size();
    // Median: middle run, or mean of the central pair for even counts.
    if (n % 2 == 1) return runs[n / 2];
    return 0.5 * (runs[n / 2 - 1] + runs[n / 2]);
}

BudgetReport budget_report(const std::vector<ProfileResult>& results, const BudgetSpec& budget) {
    BudgetReport report;
    report.stages = results;
    report.budget = budget;
    for (const auto& r : results) {
        report.total_estimate_hours += r.estimate_hours;
    }
    report.total_fits_budget = report.total_estimate_hours * 60.0 <= budget.budget_minutes;
    return report;
}

std::string budget_report_to_text(const BudgetReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-40s %12s %14s %16s %10s\n", "stage", "profile(s)",
                  "rate(s/rec)", "estimate(hours)", "verdict");
    out << line;
    for (const auto& r : report.stages) {
        std::snprintf(line, sizeof(line), "%-40s %12.3f %14.3f %16.3f %10s\n", r.name.c_str(),
                      r.profile_sec, r.rate_sec_per_recording, r.estimate_hours,
                      r.fits_budget ? "fits" : "exceeds");
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-40s %12s %14s %16.3f %10s\n", "total", "", "",
                  report.total_estimate_hours, report.total_fits_budget ? "fits" : "exceeds");
    out << line;
    std::snprintf(line, sizeof(line), "budget: %.1f minutes for %zu recordings\n",
                  report.budget.budget_minutes, report.budget.n_test);
    out << line;
    return out.str();
}

std::string budget_report_to_json(const BudgetReport& report) {
    json j;
    j["budget"] = {{"n_test", report.budget.n_test},
                   {"budget_minutes", report.budget.budget_minutes}};
    j["stages"] = json::array();
    for (const auto& r : report.stages) {
        j["stages"].push_back({{"name", r.name},
                               {"profile_sec", r.profile_sec},
                               {"n_profiled", r.n_profiled},
                               {"rate_sec_per_recording", r.rate_sec_per_recording},
                               {"estimate_hours", r.estimate_hours},
                               {"fits_budget", r.fits_budget}});
    }
    j["total_estimate_hours"] = report.total_estimate_hours;
    j["total_fits_budget"] = report.total_fits_budget;
    return j.dump(2);
}

}  // namespace chirplab::profiler
