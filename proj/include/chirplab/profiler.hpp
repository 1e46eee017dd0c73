#ifndef CHIRPLAB_PROFILER_HPP
#define CHIRPLAB_PROFILER_HPP

#include <functional>
#include <string>
#include <vector>

namespace chirplab::profiler {

struct BudgetSpec {
    std::size_t n_test = 1100;      // hidden-test recordings
    double budget_minutes = 120.0;  // CPU-time allowance
};

struct ProfileResult {
    std::string name;
    double profile_sec = 0.0;
    std::size_t n_profiled = 0;
    double rate_sec_per_recording = 0.0;
    double estimate_hours = 0.0;
    bool fits_budget = false;
};

/// rate = profile_sec / n_profiled; estimate = rate * n_test / 3600 h.
ProfileResult extrapolate(const std::string& name, double profile_sec,
                          std::size_t n_profiled, const BudgetSpec& budget);

/// A pipeline stage to be timed: processes one named recording batch.
struct Stage {
    std::string name;
    std::function<void(const std::vector<std::string>&)> run;
};

/// Median wall time over `repetitions` runs of the stage on the full
/// recording list. Measurement is single-threaded by contract.
double time_stage(const Stage& stage, const std::vector<std::string>& recordings,
                  std::size_t repetitions);

struct BudgetReport {
    std::vector<ProfileResult> stages;
    double total_estimate_hours = 0.0;
    bool total_fits_budget = false;
    BudgetSpec budget;
};

BudgetReport budget_report(const std::vector<ProfileResult>& results, const BudgetSpec& budget);

std::string budget_report_to_text(const BudgetReport& report);
std::string budget_report_to_json(const BudgetReport& report);

}  // namespace chirplab::profiler

#endif
