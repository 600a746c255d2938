#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mapmart/map_model.hpp"
#include "mapmart/path_sim.hpp"
#include "mapmart/teugels.hpp"

namespace mapmart {

// Per-path derived data with memoized power-jump martingales, shared by all
// functionals evaluated on one path.
class PathContext {
public:
    PathContext(const MapPath& path, const MapSpec& spec,
                const CompensatorSpec& comp);
    const PowerJumpPath& power(PowerFamily family, int k);
    const MapPath& path() const { return *path_; }
    const MapSpec& spec() const { return *spec_; }
    const CompensatorSpec& comp() const { return *comp_; }
    // Grid index of the first time >= t.
    std::size_t index_at(double t) const;

private:
    const MapPath* path_;
    const MapSpec* spec_;
    const CompensatorSpec* comp_;
    std::vector<std::pair<int, PowerJumpPath>> cache_[3];
};

using PathFunctional = std::function<double(PathContext&)>;

// Monte Carlo sample mean with its standard error against a target value.
struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double target = 0.0;
    double z = 0.0;
    bool pass(double z_crit = 3.0) const;
};

// Single-pass Welford accumulation in path-index order; paths may be
// simulated in parallel but the reduction order is fixed, so results are
// bit-identical for any thread count.
McEstimate estimate(const PathFunctional& functional, const MapSpec& spec,
                    std::size_t n, double dt, std::uint64_t seed, double target,
                    unsigned threads = 0);

std::vector<McEstimate> estimate_many(const std::vector<PathFunctional>& fns,
                                      const MapSpec& spec, std::size_t n,
                                      double dt, std::uint64_t seed,
                                      const std::vector<double>& targets,
                                      unsigned threads = 0);

struct SuiteConfig {
    std::size_t n_paths = 100000;
    double dt = 0.01;
    std::uint64_t seed = 20250801;
    double z_crit = 3.0;
    unsigned threads = 0;          // 0 = hardware default
    int h_order = 3;               // H family size in the orthogonality suite
    int g_x = 3, g_y = 1;          // G family labels {x^0..x^{g_x-1}, y^1..y^{g_y}}
    int iso_order = 3;             // isometry pairs up to this order
    std::size_t n_exact_paths = 1000;
    std::vector<double> chaos_dts = {1e-2, 5e-3, 2.5e-3};
    std::size_t chaos_paths = 100;
    std::size_t replication_paths = 100000;
    std::size_t n_buckets = 10;
    int replication_order = 2;
};

struct TestResult {
    std::string name;
    double mean = 0.0;
    double stderr_ = 0.0;
    double target = 0.0;
    double z = 0.0;
    bool pass = false;
    bool is_ztest = true; // deterministic / one-sided checks are excluded
                          // from the borderline multiple-testing guard
};

struct SuiteReport {
    std::string suite;
    std::string spec_hash;
    std::size_t n_paths = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<TestResult> tests;
    std::size_t n_ztests = 0;
    std::size_t borderline = 0; // z-tests with 2.5 < |z| <= 3
    bool verdict = false;
    nlohmann::json extra;       // suite-specific detail (chaos RMS table, ...)
};

// suite in {martingale, isometry, orthogonality, chaos, replication}.
SuiteReport run_suite(const std::string& suite, const MapSpec& spec,
                      const SuiteConfig& cfg);

nlohmann::json to_json(const SuiteReport& report);
std::string summary_lines(const SuiteReport& report);

} // namespace mapmart
