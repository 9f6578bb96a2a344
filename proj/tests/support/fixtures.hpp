#pragma once

// Small hand-built worlds and configs shared by the test binaries.

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sdlp/config.hpp"
#include "sdlp/road_world.hpp"

namespace fixtures {

inline std::filesystem::path config_dir() { return SDLP_CONFIG_DIR; }

inline sdlp::config::ScenarioConfig scenario(const std::string& name) {
    return sdlp::config::load_config(config_dir() / name);
}

// One 1000 m segment closed into a ring; no features.
inline std::shared_ptr<const sdlp::world::RoadMap> plain_ring(double length = 1000.0, double limit = 14.0) {
    return std::make_shared<const sdlp::world::RoadMap>(std::vector<sdlp::world::Segment>{{0, length, limit}},
                                                        std::vector<sdlp::world::Intersection>{},
                                                        std::vector<sdlp::world::CongestionZone>{},
                                                        std::vector<sdlp::world::Infrastructure>{});
}

inline sdlp::world::VehicleState vehicle(std::uint32_t id, double offset, double speed, double desired = -1.0) {
    sdlp::world::VehicleState v;
    v.true_id = sdlp::VehicleId{id};
    v.segment = 0;
    v.offset = offset;
    v.speed = speed;
    v.desired_speed = desired < 0.0 ? speed : desired;
    return v;
}

inline sdlp::world::WorldState world_of(std::shared_ptr<const sdlp::world::RoadMap> map,
                                        std::vector<sdlp::world::VehicleState> vehicles, double dt = 0.5,
                                        double time = 0.0) {
    sdlp::world::WorldState w;
    w.map = std::move(map);
    w.dt = dt;
    w.params.dt = dt;
    w.time = time;
    w.step = static_cast<std::uint64_t>(time / dt);
    w.vehicles = std::move(vehicles);
    return w;
}

// Seeded generator for property tests.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }
    // Random probability vector of length n; some entries may be exactly zero.
    std::vector<double> distribution(std::size_t n) {
        std::vector<double> w(n);
        double sum = 0.0;
        for (auto& x : w) {
            x = coin(0.15) ? 0.0 : real(0.0, 1.0);
            sum += x;
        }
        if (sum == 0.0) {
            w[0] = 1.0;
            sum = 1.0;
        }
        for (auto& x : w) x /= sum;
        return w;
    }
};

}  // namespace fixtures
