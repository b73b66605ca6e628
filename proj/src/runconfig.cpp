#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "deltashell/csv.hpp"
#include "deltashell/errors.hpp"
#include "deltashell/runconfig.hpp"

namespace ds {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where)
{
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw config_error("unknown config key '" + key + "' in " + where);
}

double get_num(const json& j, const char* key, double fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw config_error(std::string(key) + " must be a number");
    return j[key].get<double>();
}

int get_int(const json& j, const char* key, int fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer())
        throw config_error(std::string(key) + " must be an integer");
    return j[key].get<int>();
}

std::vector<double> get_list(const json& j, const char* key,
                             std::vector<double> fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array()) throw config_error(std::string(key) + " must be an array");
    std::vector<double> v;
    for (const auto& e : j[key]) {
        if (!e.is_number()) throw config_error(std::string(key) + " entries must be numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

} // namespace

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file: " + path);
    std::stringstream raw;
    raw << in.rdbuf();

    json j;
    try {
        j = json::parse(raw.str());
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be a JSON object");

    reject_unknown(j, {"shape", "beta", "potential", "alpha", "lambda", "lambda_window",
                       "eps", "lambdas", "r0", "surface_nodes", "transverse_order",
                       "volume_per_dim", "scan_points", "hypothesis_density",
                       "allow_small_eps", "thresholds", "out_dir", "seed"},
                   "config root");

    RunConfig c;
    c.config_hash = content_hash(raw.str());

    if (j.contains("shape")) {
        const json& s = j["shape"];
        if (!s.is_object()) throw config_error("shape must be an object");
        reject_unknown(s, {"kind", "params"}, "shape");
        if (!s.contains("kind") || !s["kind"].is_string())
            throw config_error("shape.kind must be a string");
        c.shape_kind = s["kind"].get<std::string>();
        c.shape_params = get_list(s, "params", c.shape_params);
    }
    c.beta = get_num(j, "beta", c.beta);
    if (!(c.beta > 0.0)) throw config_error("beta must be positive");

    if (j.contains("potential")) {
        const json& p = j["potential"];
        if (!p.is_object()) throw config_error("potential must be an object");
        reject_unknown(p, {"profile", "amplitude"}, "potential");
        if (p.contains("profile")) {
            if (!p["profile"].is_string())
                throw config_error("potential.profile must be a string");
            c.profile = p["profile"].get<std::string>();
        }
        c.amplitude = get_num(p, "amplitude", c.amplitude);
    }
    c.alpha = get_num(j, "alpha", c.alpha);
    if (c.alpha < 0.0) throw config_error("alpha must be >= 0");

    c.lambda = get_num(j, "lambda", c.lambda);
    if (!(c.lambda < 0.0)) throw config_error("lambda must be negative");
    if (j.contains("lambda_window")) {
        const auto w = get_list(j, "lambda_window", {});
        if (w.size() != 2 || !(w[0] < w[1]) || !(w[1] < 0.0))
            throw config_error("lambda_window must be [lo, hi] with lo < hi < 0");
        c.window_lo = w[0];
        c.window_hi = w[1];
    }

    c.eps = get_list(j, "eps", {});
    if (c.eps.empty())
        for (double f : {0.2, 0.1, 0.05, 0.025}) c.eps.push_back(f * c.beta);
    for (double e : c.eps) {
        if (!(e > 0.0) || e > c.beta)
            throw config_error("eps entries must lie in (0, beta]");
        if (e < 0.025 * c.beta - 1e-15 && !j.value("allow_small_eps", false))
            throw config_error("eps below 0.025 beta needs allow_small_eps "
                               "(finer transverse rules required)");
    }
    for (size_t i = 0; i + 1 < c.eps.size(); ++i)
        if (!(c.eps[i] > c.eps[i + 1]))
            throw config_error("eps list must be strictly decreasing");

    c.lambdas = get_list(j, "lambdas", c.lambdas);
    for (double l : c.lambdas)
        if (!(l < 0.0)) throw config_error("lambdas entries must be negative");
    c.r0 = get_list(j, "r0", c.r0);
    for (double r : c.r0)
        if (!(r > 0.0)) throw config_error("r0 entries must be positive");

    c.surface_nodes = get_int(j, "surface_nodes", c.surface_nodes);
    if (c.surface_nodes < 8) throw config_error("surface_nodes must be >= 8");
    c.transverse_order = get_int(j, "transverse_order", c.transverse_order);
    if (c.transverse_order < 2) throw config_error("transverse_order must be >= 2");
    c.volume_per_dim = get_int(j, "volume_per_dim", c.volume_per_dim);
    if (c.volume_per_dim < 8) throw config_error("volume_per_dim must be >= 8");
    c.scan_points = get_int(j, "scan_points", c.scan_points);
    if (c.scan_points < 2) throw config_error("scan_points must be >= 2");
    c.hypothesis_density = get_int(j, "hypothesis_density", c.hypothesis_density);
    if (c.hypothesis_density < 10) throw config_error("hypothesis_density must be >= 10");
    if (j.contains("allow_small_eps")) {
        if (!j["allow_small_eps"].is_boolean())
            throw config_error("allow_small_eps must be a boolean");
        c.allow_small_eps = j["allow_small_eps"].get<bool>();
    }

    if (j.contains("thresholds")) {
        const json& t = j["thresholds"];
        if (!t.is_object()) throw config_error("thresholds must be an object");
        reject_unknown(t, {"slope_min", "slope_max", "ratio_factor", "exponent_tol"},
                       "thresholds");
        c.rate_thresholds.slope_min = get_num(t, "slope_min", c.rate_thresholds.slope_min);
        c.rate_thresholds.slope_max = get_num(t, "slope_max", c.rate_thresholds.slope_max);
        c.rate_thresholds.ratio_factor =
            get_num(t, "ratio_factor", c.rate_thresholds.ratio_factor);
        c.estimate_thresholds.slope_min = c.rate_thresholds.slope_min;
        c.estimate_thresholds.ratio_factor = c.rate_thresholds.ratio_factor;
        c.estimate_thresholds.exponent_tol =
            get_num(t, "exponent_tol", c.estimate_thresholds.exponent_tol);
    }

    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) throw config_error("out_dir must be a string");
        c.out_dir = j["out_dir"].get<std::string>();
    }
    const int seed = get_int(j, "seed", 0);
    if (seed < 0) throw config_error("seed must be >= 0");
    c.seed = static_cast<unsigned>(seed);
    return c;
}

} // namespace ds
