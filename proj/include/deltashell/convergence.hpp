#pragma once
#include <string>
#include <vector>

#include "deltashell/operators.hpp"

namespace ds {

// envelope families the rate fits compare against:
//   "eps"         -> eps
//   "eps_sqrtlog" -> eps (1 + |ln eps|)^{1/2}
//   "eps_log"     -> eps (1 + |ln eps|)
double rate_envelope(const std::string& name, double eps);

struct RateFit {
    std::vector<double> eps; // strictly decreasing
    std::vector<double> norms;
    std::vector<double> env;
    std::string envelope;
    double slope = 0.0;              // log-log least squares vs eps
    double ratio_min = 0.0, ratio_max = 0.0; // norm/envelope over the sweep
    bool pass = false;
};

struct RateThresholds {
    double slope_min = 0.9;
    double slope_max = 1e9; // upper window only asserted where the spec asks
    double ratio_factor = 3.0;
};

// >= 4 points required; an all-zero norm column (V = 0) passes vacuously
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& norms,
                 const std::string& envelope, const RateThresholds& th = {});

struct ComponentRates {
    RateFit a, b, c;
};

// norms of A_eps - A_0, B_eps - B_0, C_eps - C_0 on matched quadrature
// layouts, fitted against the lemma envelopes (sqrt-log for A and C, log
// for B).  Throws numerical_error when the measured norms stop decreasing
// (discretization floor).
ComponentRates component_rates(const SpectralParameter& sp, const ProductGrid& g,
                               const PotentialData& pd, const VolumeGrid& vol,
                               std::vector<double> eps_list,
                               const RateThresholds& th = {});

struct FullRateReport {
    RateFit fit;                  // SVD norms vs eps (1 + |ln eps|)
    std::vector<double> schur;    // Schur upper bound per eps (>= SVD norm)
    std::vector<double> norm_b;   // ||B_eps|| per eps
    std::vector<double> inv_bound; // 1/(1 - ||B_eps||) >= ||(1-B_eps)^{-1}||
    double free_cancellation = 0.0; // residual of the R(lambda) cancellation
};

// D_eps = A_eps (1-B_eps)^{-1} C_eps - A_0 (1-B_0)^{-1} C_0 on the volume
// grid, all factors on matched layouts so the difference discretizes the
// resolvent difference itself
FullRateReport full_resolvent_rate(const SpectralParameter& sp, const ProductGrid& g,
                                   const PotentialData& pd, const VolumeGrid& vol,
                                   std::vector<double> eps_list,
                                   const RateThresholds& th = {0.9, 1.15, 3.0});

} // namespace ds
