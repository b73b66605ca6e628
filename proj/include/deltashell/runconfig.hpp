#pragma once
#include <string>
#include <vector>

#include "deltashell/convergence.hpp"
#include "deltashell/estimates.hpp"

namespace ds {

// one JSON document per run; every field validated on load, unknown keys
// rejected so typos cannot silently fall back to defaults
struct RunConfig {
    std::string shape_kind = "circle";
    std::vector<double> shape_params = {1.0};
    double beta = 0.3;

    std::string profile = "box";
    double amplitude = 1.0;
    double alpha = 0.0; // direct delta coupling for spectrum; 0 = derive from potential

    double lambda = -25.0;
    double window_lo = -3.0, window_hi = -0.5; // spectral search window

    std::vector<double> eps;     // defaults to {0.2, 0.1, 0.05, 0.025} beta
    std::vector<double> lambdas = {-1.0, -4.0};
    std::vector<double> r0 = {0.05, 0.1, 0.2, 0.4};

    int surface_nodes = 256;
    int transverse_order = 16;
    int volume_per_dim = 50;
    int scan_points = 24;
    int hypothesis_density = 200;
    bool allow_small_eps = false; // eps below 0.025 beta is gated

    RateThresholds rate_thresholds;
    EstimateThresholds estimate_thresholds;

    std::string out_dir = ".";
    unsigned seed = 0;
    std::string config_hash; // of the raw file text
};

RunConfig load_config(const std::string& path);

} // namespace ds
