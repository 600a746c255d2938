#include "mapmart/path_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "mapmart/errors.hpp"
#include "mapmart/rng.hpp"

namespace mapmart {

namespace {

// Fixed stream ids per path; jump streams come first and never depend on the
// mesh, so refining dt leaves every jump record identical.
enum Stream : std::uint64_t {
    kModJumpTimes = 0,
    kModJumpSizes = 1,
    kTriggerDraws = 2,
    kOrdJumpTimes = 3,
    kOrdJumpSizes = 4,
    kBrownianB = 5,
    kBrownianW = 6,
};

std::vector<double> draw_jump_times(double intensity, double horizon,
                                    CounterRng& rng) {
    std::vector<double> out;
    if (intensity <= 0.0) return out;
    double t = rng.next_exponential(intensity);
    while (t < horizon) {
        out.push_back(t);
        t += rng.next_exponential(intensity);
    }
    return out;
}

} // namespace

MapPath simulate(const MapSpec& spec, double dt, std::uint64_t seed) {
    if (!(dt > 0.0)) throw SchemaError("dt-nonpositive");
    if (!(spec.horizon > 0.0)) throw SchemaError("horizon-nonpositive");
    if (dt > spec.horizon) throw SchemaError("dt-exceeds-horizon");

    const double T = spec.horizon;

    auto mod_time_rng = CounterRng::derive(seed, 0, kModJumpTimes);
    auto mod_size_rng = CounterRng::derive(seed, 0, kModJumpSizes);
    auto trig_rng = CounterRng::derive(seed, 0, kTriggerDraws);
    auto ord_time_rng = CounterRng::derive(seed, 0, kOrdJumpTimes);
    auto ord_size_rng = CounterRng::derive(seed, 0, kOrdJumpSizes);
    auto b_rng = CounterRng::derive(seed, 0, kBrownianB);
    auto w_rng = CounterRng::derive(seed, 0, kBrownianW);

    // Exact jump skeletons, drawn before any mesh-dependent randomness.
    std::vector<double> mod_times = draw_jump_times(spec.nu1.intensity, T, mod_time_rng);
    std::vector<double> mod_sizes(mod_times.size());
    for (auto& x : mod_sizes) x = spec.nu1.law.sample(mod_size_rng);
    std::vector<double> trig_sizes(mod_times.size());
    for (std::size_t j = 0; j < mod_times.size(); ++j)
        trig_sizes[j] = spec.u_law.sample(mod_sizes[j], trig_rng);

    std::vector<double> ord_times = draw_jump_times(spec.nu2.intensity, T, ord_time_rng);
    std::vector<double> ord_sizes(ord_times.size());
    for (auto& x : ord_sizes) x = spec.nu2.law.sample(ord_size_rng);
    // Simultaneous arrivals of the independent Poisson streams have
    // probability zero; nudge the pathological float collision away.
    for (auto& t : ord_times)
        while (std::binary_search(mod_times.begin(), mod_times.end(), t))
            t = std::nextafter(t, T);

    // Jump-adapted grid: uniform mesh union all jump times.
    MapPath path;
    path.seed = seed;
    path.dt = dt;
    std::vector<double>& grid = path.times;
    const auto n_mesh = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    grid.reserve(n_mesh + 1 + mod_times.size() + ord_times.size());
    for (std::size_t j = 0; j < n_mesh; ++j) grid.push_back(j * dt);
    grid.push_back(T);
    grid.insert(grid.end(), mod_times.begin(), mod_times.end());
    grid.insert(grid.end(), ord_times.begin(), ord_times.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const std::size_t n = grid.size();
    auto grid_index = [&grid](double t) {
        return static_cast<std::size_t>(
            std::lower_bound(grid.begin(), grid.end(), t) - grid.begin());
    };

    // Per-grid-point jump sizes.
    std::vector<double> theta_jump(n, 0.0), xi_l_jump(n, 0.0), trig_jump(n, 0.0);
    std::vector<char> is_mod(n, 0), is_ord(n, 0);
    for (std::size_t j = 0; j < mod_times.size(); ++j) {
        const std::size_t gi = grid_index(mod_times[j]);
        theta_jump[gi] = mod_sizes[j];
        trig_jump[gi] = trig_sizes[j];
        is_mod[gi] = 1;
        path.jumps.push_back({mod_times[j], JumpSource::Modulator, mod_sizes[j], 0.0, gi});
        path.jumps.push_back(
            {mod_times[j], JumpSource::Triggered, trig_sizes[j], mod_sizes[j], gi});
        path.events.push_back(
            {mod_times[j], gi, true, mod_sizes[j], 0.0, trig_sizes[j]});
    }
    for (std::size_t j = 0; j < ord_times.size(); ++j) {
        const std::size_t gi = grid_index(ord_times[j]);
        xi_l_jump[gi] = ord_sizes[j];
        is_ord[gi] = 1;
        path.jumps.push_back({ord_times[j], JumpSource::OrdinateLevy, ord_sizes[j], 0.0, gi});
        path.events.push_back({ord_times[j], gi, false, 0.0, ord_sizes[j], 0.0});
    }
    auto by_time = [](const auto& a, const auto& b) { return a.time < b.time; };
    std::sort(path.jumps.begin(), path.jumps.end(), by_time);
    std::sort(path.events.begin(), path.events.end(), by_time);

    // Left-point Euler for the ordinate; exact Gaussian increments per
    // sub-interval; the |x| < 1 part of each jump measure is compensated in
    // the drift per the truncation convention.
    const double theta_drift = spec.mu1 - small_jump_mean(spec.nu1);
    const double xi_l_small = small_jump_mean(spec.nu2);

    path.theta.assign(n, 0.0);
    path.theta_pre.assign(n, 0.0);
    path.xi_l.assign(n, spec.xi0);
    path.xi_l_pre.assign(n, spec.xi0);
    path.xi_f.assign(n, 0.0);
    path.xi_f_pre.assign(n, 0.0);
    path.db.assign(n - 1, 0.0);
    path.dw.assign(n - 1, 0.0);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double delta = grid[i + 1] - grid[i];
        const double sdt = std::sqrt(delta);
        const double db = sdt * b_rng.next_gaussian();
        const double dw = sdt * w_rng.next_gaussian();
        path.db[i] = db;
        path.dw[i] = dw;

        const double th_left = path.theta[i];
        double th = th_left + theta_drift * delta + spec.sigma1 * db;
        path.theta_pre[i + 1] = th;
        if (is_mod[i + 1]) th += theta_jump[i + 1];
        path.theta[i + 1] = th;

        double xl = path.xi_l[i] + spec.mu2(th_left) * delta +
                    spec.sigma2(th_left) * dw - xi_l_small * delta;
        path.xi_l_pre[i + 1] = xl;
        if (is_ord[i + 1]) xl += xi_l_jump[i + 1];
        path.xi_l[i + 1] = xl;

        path.xi_f_pre[i + 1] = path.xi_f[i];
        path.xi_f[i + 1] = path.xi_f[i] + (is_mod[i + 1] ? trig_jump[i + 1] : 0.0);
    }
    return path;
}

void simulate_batch(const MapSpec& spec, double dt, std::uint64_t base_seed,
                    std::size_t n_paths,
                    const std::function<void(std::size_t, const MapPath&)>& fn) {
    if (n_paths < 1) throw SchemaError("n-paths-nonpositive");
    for (std::size_t i = 0; i < n_paths; ++i) {
        const MapPath p = simulate(spec, dt, path_seed(base_seed, i));
        fn(i, p);
    }
}

void for_each_path(const MapSpec& spec, double dt, std::uint64_t base_seed,
                   std::size_t n_paths, unsigned threads,
                   const std::function<void(std::size_t, const MapPath&)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, 16);
    if (threads <= 1 || n_paths < 2 * threads) {
        simulate_batch(spec, dt, base_seed, n_paths, fn);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n_paths; i += threads) {
                const MapPath p = simulate(spec, dt, path_seed(base_seed, i));
                fn(i, p);
            }
        });
    }
    for (auto& th : pool) th.join();
}

void write_csv(std::ostream& os, const MapPath& path) {
    os << "time,theta,xiL,xiF,is_jump,jump_source,jump_size\n";
    os.precision(17);
    std::size_t e = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        while (e < path.events.size() && path.events[e].grid_index < i) ++e;
        const bool jump = e < path.events.size() && path.events[e].grid_index == i;
        os << path.times[i] << ',' << path.theta[i] << ',' << path.xi_l[i] << ','
           << path.xi_f[i] << ',' << (jump ? 1 : 0) << ',';
        if (jump) {
            const auto& ev = path.events[e];
            os << (ev.modulator ? "modulator" : "ordinate") << ','
               << (ev.modulator ? ev.theta_jump : ev.xi_l_jump);
        } else {
            os << ",0";
        }
        os << '\n';
    }
}

} // namespace mapmart
