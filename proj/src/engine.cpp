#include "hcrn/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace hcrn {

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream, std::uint64_t sub) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(sub),
                      static_cast<std::uint32_t>(sub >> 32)};
    return std::mt19937_64(seq);
}

World build_world(const ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    auto env = make_stream(seed, Stream::environment);
    World w;
    w.nodes = place_nodes(env, cfg.geometry);
    w.interference =
        draw_interference(env, cfg.interference_spec(), cfg.geometry.node_count, cfg.rf.channel_count);
    w.radar = cfg.radar_params();
    w.target = {cfg.geometry.target_initial_position, cfg.geometry.target_velocity};
    w.cpi_duration = cfg.geometry.cpi_duration();
    return w;
}

namespace {

std::vector<NodeAgent> make_agents(const ScenarioConfig& cfg, const World& world, PolicyKind policy,
                                   std::uint64_t seed) {
    const int M = world.node_count();
    const int N = world.channel_count();
    auto policy_rng = make_stream(seed, Stream::policy);
    std::vector<NodeAgent> agents;
    agents.reserve(M);
    for (int m = 0; m < M; ++m)
        agents.emplace_back(policy, m, M, N, cfg.policy_params, world.radar, policy_rng());
    if (policy == PolicyKind::random) {
        auto seq = draw_random_matchings(policy_rng, M, N, cfg.policy_params.random_list_length);
        for (auto& a : agents) a.set_random_sequence(seq);
    }
    return agents;
}

}  // namespace

Simulation::Simulation(const ScenarioConfig& cfg, World world, PolicyKind policy, std::uint64_t seed)
    : cfg_(cfg),
      world_(std::move(world)),
      policy_(policy),
      env_rng_(make_stream(seed, Stream::environment, 1)),
      meas_rng_(make_stream(seed, Stream::measurement)),
      meas_model_(cfg.measurement_model()),
      agents_(make_agents(cfg, world_, policy, seed)),
      coordinator_(policy, world_.nodes, world_.channel_count(), cfg.policy_params, world_.radar),
      cc_track_(cfg.filter_params(), cfg.track_prior()),
      node_tracks_(static_cast<std::size_t>(world_.node_count()),
                   Tracker(cfg.filter_params(), cfg.track_prior())),
      inbox_(static_cast<std::size_t>(world_.node_count())) {
    if (world_.node_count() < 1 || world_.channel_count() < world_.node_count())
        throw std::invalid_argument("matchings require M <= N");
    if (world_.interference.node_count() != world_.node_count())
        throw std::invalid_argument("interference field does not match the node count");
    for (int m = 0; m < world_.node_count(); ++m)
        if (world_.nodes[m].id != m) throw std::invalid_argument("node ids must be 0..M-1 in order");
    meas_model_.cpi_duration = world_.cpi_duration;
    meas_model_.wavelength = world_.radar.wavelength;
}

TargetTruth Simulation::truth_at(int k) const {
    return propagate_target(world_.target, (k + 0.5) * world_.cpi_duration);
}

std::optional<int> Simulation::convergence_cpi() const {
    if (policy_ == PolicyKind::mc) return mc_converged_;
    return coordinator_.convergence_cpi();
}

CpiRecord Simulation::run_cpi(int k, const std::optional<std::vector<int>>& forced) {
    if (k != next_cpi_) throw std::logic_error("run_cpi: CPIs must run in order");
    const int M = world_.node_count();
    const int N = world_.channel_count();
    const RadarParams& radar = world_.radar;

    if (k > 0) world_.interference.advance(env_rng_);
    const TargetTruth truth = truth_at(k);

    WeightMatrix gamma;
    gamma.kind = WeightKind::true_sinr;
    gamma.values.resize(M, N);
    for (int m = 0; m < M; ++m) {
        const double r = std::max((world_.nodes[m].position - truth.position).norm(), 1e-3);
        const double py = received_power(radar, r);
        for (int n = 0; n < N; ++n)
            gamma.values(m, n) = sinr(py, world_.interference.power(m, n), radar.noise_power);
    }

    // (1) channel selection
    Matching chosen;
    chosen.channels.resize(M);
    if (forced) {
        if (static_cast<int>(forced->size()) != M) throw std::invalid_argument("run_cpi: forced size");
        chosen.channels = *forced;
    } else {
        for (int m = 0; m < M; ++m) {
            NodeView view;
            view.cpi = k;
            view.nodes = world_.nodes;
            view.radar = &radar;
            view.own_track = &node_tracks_[m];
            view.true_weights = &gamma;
            chosen.channels[m] = agents_[m].node_step(view);
        }
    }
    for (int c : chosen.channels)
        if (c < 0 || c >= N) throw std::out_of_range("run_cpi: channel out of range");

    // (2) collisions
    std::vector<int> occupancy(N, 0);
    for (int c : chosen.channels) ++occupancy[c];
    std::vector<char> collided(M, 0);
    int collisions = 0;
    for (int m = 0; m < M; ++m) {
        collided[m] = occupancy[chosen[m]] > 1;
        collisions += collided[m];
    }

    // (3)-(4) rewards, estimates and measurements. Noise is drawn for every node every CPI.
    std::normal_distribution<double> std_normal(0.0, 1.0);
    std::vector<double> observed(M, 0.0);
    std::vector<Measurement> measurements;
    measurements.reserve(M);
    double realized = 0.0;
    for (int m = 0; m < M; ++m) {
        const MeasurementNoise noise = MeasurementNoise::draw(meas_rng_);
        const double z_sinr = std_normal(meas_rng_);
        const double g = gamma.values(m, chosen[m]);
        if (!collided[m]) {
            realized += g;
            observed[m] = sinr_estimate_from_normal(g, cfg_.sinr_estimate, z_sinr);
        }
        measurements.push_back(generate_measurement(noise, world_.nodes[m], truth,
                                                    g * meas_model_.pulses_per_cpi, meas_model_, k,
                                                    collided[m] != 0));
    }

    // (5) node filters, (6) coordinator fusion
    for (int m = 0; m < M; ++m)
        node_tracks_[m].step(std::span<const Measurement>(&measurements[m], 1), world_.nodes, k);
    cc_track_.step(measurements, world_.nodes, k);

    // node learning updates
    std::vector<NodeReport> reports(M);
    for (int m = 0; m < M; ++m) {
        NodeObservation obs;
        obs.cpi = k;
        obs.channel = chosen[m];
        obs.collided = collided[m] != 0;
        obs.sinr_estimate = observed[m];
        obs.estimated_range = node_tracks_[m].predicted_range(world_.nodes[m].position, 0);
        if (!forced) agents_[m].observe(obs);
        reports[m] = {m, chosen[m], collided[m] != 0, observed[m]};
    }

    // (7) coordinator feedback, delivered before the next CPI
    long long feedback = 0;
    if (!forced) {
        inbox_ = coordinator_.coordinator_step(k, reports, cc_track_);
        for (int m = 0; m < M; ++m) {
            for (const auto& msg : inbox_[m]) feedback += msg.value_count();
            agents_[m].receive(inbox_[m]);
        }
    }

    if (policy_ == PolicyKind::mc && !mc_converged_ && collisions == 0 &&
        std::all_of(agents_.begin(), agents_.end(), [](const NodeAgent& a) { return a.converged(); }))
        mc_converged_ = k;

    // (8) metrics
    CpiRecord rec;
    rec.cpi = k;
    rec.chosen = chosen;
    rec.utility_true = realized;
    rec.utility_opt = max_weight_matching(gamma).utility;
    rec.regret_inst = std::max(0.0, rec.utility_opt - realized);
    regret_cum_ += rec.regret_inst;
    rec.regret_cum = regret_cum_;
    rec.feedback_values = feedback;
    feedback_total_ += feedback;
    rec.feedback_avg = static_cast<double>(feedback_total_) / (static_cast<double>(M) * (k + 1));
    rec.collisions = collisions;
    rec.observed_sinr = observed;
    if (cc_track_.initialized()) {
        rec.fused_position = cc_track_.state().position();
        rec.loc_error_m = (*rec.fused_position - truth.position).norm();
    } else {
        rec.loc_error_m = std::numeric_limits<double>::quiet_NaN();
    }
    ++next_cpi_;
    return rec;
}

RunResult run_simulation(const ScenarioConfig& cfg, std::uint64_t seed) {
    return run_simulation(cfg, seed, cfg.policy);
}

RunResult run_simulation(const ScenarioConfig& cfg, std::uint64_t seed, PolicyKind policy) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    RunResult out;
    out.scenario_hash = scenario_hash(cfg);
    out.seed = seed;
    out.policy = policy;
    Simulation sim(cfg, build_world(cfg, seed), policy, seed);
    out.initial_interference = sim.world().interference.effective_powers();
    out.records.reserve(static_cast<std::size_t>(cfg.horizon));
    for (int k = 0; k < cfg.horizon; ++k) out.records.push_back(sim.run_cpi(k));
    out.convergence_cpi = sim.convergence_cpi();
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

QuantileSet quantiles(std::vector<double> samples, const std::vector<double>& levels) {
    QuantileSet q;
    q.levels = levels;
    q.values.assign(levels.size(), std::numeric_limits<double>::quiet_NaN());
    if (samples.empty()) return q;
    std::sort(samples.begin(), samples.end());
    const double last = static_cast<double>(samples.size() - 1);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double p = std::clamp(levels[i], 0.0, 1.0);
        const double h = p * last;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, samples.size() - 1);
        q.values[i] = samples[lo] + (h - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
    }
    return q;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, int runs) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < runs; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
    return seeds;
}

BatchResult aggregate(std::vector<RunResult> runs, PolicyKind policy, int convergence_cpi) {
    std::sort(runs.begin(), runs.end(),
              [](const RunResult& a, const RunResult& b) { return a.seed < b.seed; });
    BatchResult b;
    b.policy = policy;
    b.convergence_cpi = convergence_cpi;
    if (runs.empty()) return b;
    const std::size_t horizon = runs.front().records.size();
    for (const auto& r : runs)
        if (r.records.size() != horizon) throw std::invalid_argument("aggregate: horizons differ");

    const double count = static_cast<double>(runs.size());
    b.mean_regret_cum.assign(horizon, 0.0);
    b.mean_feedback_avg.assign(horizon, 0.0);
    b.mean_loc_error.assign(horizon, 0.0);
    b.median_loc_error.assign(horizon, 0.0);
    for (std::size_t k = 0; k < horizon; ++k) {
        std::vector<double> errs;
        for (const auto& r : runs) {
            const CpiRecord& rec = r.records[k];
            b.mean_regret_cum[k] += rec.regret_cum;
            b.mean_feedback_avg[k] += rec.feedback_avg;
            if (!std::isnan(rec.loc_error_m)) errs.push_back(rec.loc_error_m);
        }
        b.mean_regret_cum[k] /= count;
        b.mean_feedback_avg[k] /= count;
        double s = 0.0;
        for (double e : errs) s += e;
        b.mean_loc_error[k] = errs.empty() ? std::numeric_limits<double>::quiet_NaN() : s / errs.size();
        b.median_loc_error[k] = quantiles(errs, {0.5}).values[0];
    }
    for (const auto& r : runs) {
        for (const auto& rec : r.records) {
            if (std::isnan(rec.loc_error_m)) continue;
            b.error_samples_full.push_back(rec.loc_error_m);
            if (rec.cpi > convergence_cpi) b.error_samples_post.push_back(rec.loc_error_m);
        }
    }
    b.runs = std::move(runs);
    return b;
}

BatchResult run_batch(const ScenarioConfig& cfg, std::span<const std::uint64_t> seeds,
                      PolicyKind policy, int threads) {
    if (seeds.empty()) throw std::invalid_argument("run_batch: need at least one seed");
    cfg.validate();
    std::vector<RunResult> runs(seeds.size());
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, static_cast<int>(seeds.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                runs[i] = run_simulation(cfg, seeds[i], policy);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return aggregate(std::move(runs), policy, cfg.convergence_cpi);
}

}  // namespace hcrn
