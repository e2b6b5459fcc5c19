#include "trackimpute/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "trackimpute/error.hpp"

namespace trackimpute {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, std::string_view where) {
    const std::set<std::string_view> allowed(known);
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ValidationError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (const auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ValidationError(std::string("bad value for '") + key + "'");
        }
    }
}

const json& object_at(const json& root, const char* key) {
    static const json empty = json::object();
    const auto it = root.find(key);
    if (it == root.end()) {
        return empty;
    }
    if (!it->is_object()) {
        throw ValidationError(std::string("'") + key + "' must be an object");
    }
    return *it;
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string to_string(RemainingDistanceMode mode) {
    return mode == RemainingDistanceMode::Literal ? "literal" : "adjusted";
}

RemainingDistanceMode parse_remaining_distance_mode(std::string_view text) {
    if (text == "literal") {
        return RemainingDistanceMode::Literal;
    }
    if (text == "adjusted") {
        return RemainingDistanceMode::Adjusted;
    }
    throw ValidationError("remaining_distance_mode must be 'literal' or 'adjusted', got '" + std::string(text) + "'");
}

RunConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    reject_unknown(root,
                   {"priors", "n_iter", "keep_frac", "seed", "detection_radius_m", "remaining_distance_mode",
                    "floors", "enforce_endpoint_radius", "reject_interior_in_range", "interior_retry_cap",
                    "heatmap", "threads"},
                   "config");
    RunConfig c;

    const auto& pr = object_at(root, "priors");
    reject_unknown(pr,
                   {"alpha_shape", "alpha_rate", "phi_logmean", "phi_logvar", "gamma_logmean", "gamma_logvar",
                    "sigma_r_shape", "sigma_r_scale", "beta_fixed"},
                   "priors");
    read(pr, "alpha_shape", c.priors.alpha_shape);
    read(pr, "alpha_rate", c.priors.alpha_rate);
    read(pr, "phi_logmean", c.priors.phi_logmean);
    read(pr, "phi_logvar", c.priors.phi_logvar);
    read(pr, "gamma_logmean", c.priors.gamma_logmean);
    read(pr, "gamma_logvar", c.priors.gamma_logvar);
    read(pr, "sigma_r_shape", c.priors.sigma_r_shape);
    read(pr, "sigma_r_scale", c.priors.sigma_r_scale);
    read(pr, "beta_fixed", c.priors.beta_fixed);

    read(root, "n_iter", c.n_iter);
    read(root, "keep_frac", c.keep_frac);
    if (const auto it = root.find("seed"); it != root.end() && !it->is_null()) {
        if (!it->is_number_unsigned()) {
            throw ValidationError("seed must be a nonnegative integer");
        }
        c.seed = it->get<std::uint64_t>();
    }
    read(root, "detection_radius_m", c.detection_radius_m);
    if (const auto it = root.find("remaining_distance_mode"); it != root.end()) {
        if (!it->is_string()) {
            throw ValidationError("remaining_distance_mode must be a string");
        }
        c.remaining_distance_mode = parse_remaining_distance_mode(it->get<std::string>());
    }

    const auto& fl = object_at(root, "floors");
    reject_unknown(fl, {"distance_m", "variance_m2", "variance_ceiling_m2", "step_length_m", "angular_variance"},
                   "floors");
    read(fl, "distance_m", c.floors.distance_m);
    read(fl, "variance_m2", c.floors.variance_m2);
    read(fl, "variance_ceiling_m2", c.floors.variance_ceiling_m2);
    read(fl, "step_length_m", c.floors.step_length_m);
    read(fl, "angular_variance", c.floors.angular_variance);

    read(root, "enforce_endpoint_radius", c.enforce_endpoint_radius);
    read(root, "reject_interior_in_range", c.reject_interior_in_range);
    read(root, "interior_retry_cap", c.interior_retry_cap);

    const auto& hm = object_at(root, "heatmap");
    reject_unknown(hm, {"cell_m", "padding_m", "include_endpoints", "max_cells"}, "heatmap");
    read(hm, "cell_m", c.heatmap.cell_m);
    read(hm, "padding_m", c.heatmap.padding_m);
    read(hm, "include_endpoints", c.heatmap.include_endpoints);
    read(hm, "max_cells", c.heatmap.max_cells);

    read(root, "threads", c.threads);
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) {
    json root;
    root["priors"] = {{"alpha_shape", c.priors.alpha_shape},     {"alpha_rate", c.priors.alpha_rate},
                      {"phi_logmean", c.priors.phi_logmean},     {"phi_logvar", c.priors.phi_logvar},
                      {"gamma_logmean", c.priors.gamma_logmean}, {"gamma_logvar", c.priors.gamma_logvar},
                      {"sigma_r_shape", c.priors.sigma_r_shape}, {"sigma_r_scale", c.priors.sigma_r_scale},
                      {"beta_fixed", c.priors.beta_fixed}};
    root["n_iter"] = c.n_iter;
    root["keep_frac"] = c.keep_frac;
    root["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    root["detection_radius_m"] = c.detection_radius_m;
    root["remaining_distance_mode"] = to_string(c.remaining_distance_mode);
    root["floors"] = {{"distance_m", c.floors.distance_m},
                      {"variance_m2", c.floors.variance_m2},
                      {"variance_ceiling_m2", c.floors.variance_ceiling_m2},
                      {"step_length_m", c.floors.step_length_m},
                      {"angular_variance", c.floors.angular_variance}};
    root["enforce_endpoint_radius"] = c.enforce_endpoint_radius;
    root["reject_interior_in_range"] = c.reject_interior_in_range;
    root["interior_retry_cap"] = c.interior_retry_cap;
    root["heatmap"] = {{"cell_m", c.heatmap.cell_m},
                       {"padding_m", c.heatmap.padding_m},
                       {"include_endpoints", c.heatmap.include_endpoints},
                       {"max_cells", c.heatmap.max_cells}};
    root["threads"] = c.threads;
    return root.dump(2);
}

void validate(const RunConfig& c) {
    validate(c.priors);
    if (c.n_iter < 1) {
        throw ValidationError("n_iter must be at least 1");
    }
    if (!(c.keep_frac > 0.0 && c.keep_frac <= 1.0)) {
        throw ValidationError("keep_frac must lie in (0, 1]");
    }
    if (!positive(c.detection_radius_m)) {
        throw ValidationError("detection_radius_m must be positive");
    }
    const auto& f = c.floors;
    if (!positive(f.distance_m) || !positive(f.variance_m2) || !positive(f.step_length_m) ||
        !positive(f.angular_variance) || !positive(f.variance_ceiling_m2)) {
        throw ValidationError("floors must be positive");
    }
    if (f.variance_ceiling_m2 < f.variance_m2) {
        throw ValidationError("variance_ceiling_m2 must not be below variance_m2");
    }
    if (c.interior_retry_cap < 1) {
        throw ValidationError("interior_retry_cap must be at least 1");
    }
    if (!positive(c.heatmap.cell_m) || !(c.heatmap.padding_m >= 0.0) || c.heatmap.max_cells < 1) {
        throw ValidationError("heatmap cell_m must be positive, padding_m nonnegative, max_cells at least 1");
    }
}

}  // namespace trackimpute
