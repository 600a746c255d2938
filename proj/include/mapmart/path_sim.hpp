#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mapmart/map_model.hpp"

namespace mapmart {

enum class JumpSource { Modulator, OrdinateLevy, Triggered };

struct JumpRecord {
    double time = 0.0;
    JumpSource source = JumpSource::Modulator;
    double size = 0.0;
    double parent_size = 0.0;   // modulator jump that triggered this one
    std::size_t grid_index = 0; // position of the jump time in the grid
};

// One realization of (Theta, xi^L, xi^f) on the jump-adapted grid: the union
// of a uniform mesh of step dt and every exact jump time. Values are stored
// cadlag (post-event) together with explicit left limits at every grid point.
struct MapPath {
    std::vector<double> times;
    std::vector<double> theta, theta_pre;
    std::vector<double> xi_l, xi_l_pre;
    std::vector<double> xi_f, xi_f_pre;
    std::vector<double> db, dw; // per-interval Brownian increments, size N-1
    std::vector<JumpRecord> jumps;

    // Grouped per jump time; modulator events carry the triggered size too,
    // so simultaneous-jump products are bookkept exactly.
    struct Event {
        double time = 0.0;
        std::size_t grid_index = 0;
        bool modulator = false; // else an ordinate-Levy event
        double theta_jump = 0.0;
        double xi_l_jump = 0.0;
        double trig_jump = 0.0;
    };
    std::vector<Event> events;

    std::uint64_t seed = 0;
    double dt = 0.0;
    double horizon() const { return times.back(); }
    std::size_t size() const { return times.size(); }
};

// Draws jump skeletons exactly (independent of the mesh), Brownian increments
// as exact Gaussians per sub-interval, and integrates the ordinate drift and
// diffusion by left-point Euler.
MapPath simulate(const MapSpec& spec, double dt, std::uint64_t seed);

// Streams paths i = 0..n-1, path i seeded with path_seed(base_seed, i).
void simulate_batch(const MapSpec& spec, double dt, std::uint64_t base_seed,
                    std::size_t n_paths,
                    const std::function<void(std::size_t, const MapPath&)>& fn);

// Parallel map over paths. fn(i, path) must be pure per path; outputs should
// be written to per-index slots so results do not depend on thread count.
void for_each_path(const MapSpec& spec, double dt, std::uint64_t base_seed,
                   std::size_t n_paths, unsigned threads,
                   const std::function<void(std::size_t, const MapPath&)>& fn);

// Documented CSV dump: time,theta,xiL,xiF,is_jump,jump_source,jump_size.
void write_csv(std::ostream& os, const MapPath& path);

} // namespace mapmart
