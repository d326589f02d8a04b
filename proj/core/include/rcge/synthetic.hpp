#pragma once

#include <cstdint>

#include <rcge/economy.hpp>

namespace rcge::synthetic {

/// Configuration of a symmetric benchmark: identical domestic regions in one
/// country plus the rest of the world.
struct SymmetricConfig {
    int regions = 2;          // domestic
    int sectors = 1;          // domestic
    Real households = 10.0;   // per region
    Real internal_cost = 1.05;
    Real cross_cost = 1.2;
    Real world_cost = 1.3;
    Real wage_rigidity = 0.5;  // gamma_w
};

/// An uncalibrated symmetric economy; run calibrate() to land on its steady
/// state.
Economy symmetric_economy(const SymmetricConfig& config = {});

struct RandomConfig {
    int min_regions = 2, max_regions = 4;  // domestic
    int min_sectors = 1, max_sectors = 3;  // domestic
    int max_countries = 2;
};

/// A seeded random feasible economy (mild asymmetries around the symmetric
/// template) that validates and calibrates robustly.
Economy random_economy(std::uint64_t seed, const RandomConfig& config = {});

}  // namespace rcge::synthetic
