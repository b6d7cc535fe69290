#include "rotpro/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include "rotpro/errors.hpp"

#include <nlohmann/json.hpp>

namespace rotpro {

const char* to_string(PhaseInterval v) { return v == PhaseInterval::Pi ? "pi" : "half-pi"; }

const char* to_string(PhaseConstraintMode v) {
    switch (v) {
        case PhaseConstraintMode::None: return "none";
        case PhaseConstraintMode::Clamp: return "clamp";
        case PhaseConstraintMode::Wrap: return "wrap";
    }
    return "?";
}

const char* to_string(GateMode v) { return v == GateMode::Abs ? "abs" : "signed-product"; }

double interval_halfwidth(PhaseInterval v) {
    return v == PhaseInterval::Pi ? std::numbers::pi : std::numbers::pi / 2.0;
}

namespace {

PhaseInterval interval_from_string(std::string_view s) {
    if (s == "pi") return PhaseInterval::Pi;
    if (s == "half-pi" || s == "half_pi") return PhaseInterval::HalfPi;
    throw InputError("unknown phase interval: " + std::string(s) + " (expected pi|half-pi)");
}

PhaseConstraintMode constraint_from_string(std::string_view s) {
    if (s == "none") return PhaseConstraintMode::None;
    if (s == "clamp") return PhaseConstraintMode::Clamp;
    if (s == "wrap") return PhaseConstraintMode::Wrap;
    throw InputError("unknown phase constraint: " + std::string(s) +
                     " (expected none|clamp|wrap)");
}

GateMode gate_from_string(std::string_view s) {
    if (s == "abs") return GateMode::Abs;
    if (s == "signed-product" || s == "signed_product") return GateMode::SignedProduct;
    throw InputError("unknown penalty gate: " + std::string(s) +
                     " (expected abs|signed-product)");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view key, std::string_view v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(std::string(v), &used);
        if (used != v.size()) throw std::invalid_argument("trailing garbage");
        return x;
    } catch (const std::exception&) {
        throw InputError("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
    }
}

std::int64_t parse_int(std::string_view key, std::string_view v) {
    std::int64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw InputError("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
    return x;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw InputError("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
    return x;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InputError("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
}

} // namespace

void TrainConfig::validate() const {
    if (dim < 1) throw InputError("dim must be >= 1");
    if (batch_size < 1) throw InputError("batch_size must be >= 1");
    if (gamma <= 0) throw InputError("gamma must be > 0");
    if (alpha < 0) throw InputError("alpha must be >= 0");
    if (gamma_m <= 0) throw InputError("gamma_m must be > 0");
    if (beta <= 1) throw InputError("beta must be > 1");
    if (negatives < 1) throw InputError("negatives must be >= 1");
    if (adv_temperature < 0) throw InputError("adv_temperature must be >= 0");
    if (learning_rate <= 0) throw InputError("learning_rate must be > 0");
    if (max_steps < 0) throw InputError("max_steps must be >= 0");
    if (entity_init_range <= 0) throw InputError("entity_init_range must be > 0");
    if (ab_init_min > ab_init_max) throw InputError("ab_init_min must be <= ab_init_max");
    if (lr_decay_steps < 0) throw InputError("lr_decay_steps must be >= 0");
    if (lr_decay_factor <= 0 || lr_decay_factor > 1)
        throw InputError("lr_decay_factor must be in (0, 1]");
    if (valid_every < 0) throw InputError("valid_every must be >= 0");
    if (trace_every < 1) throw InputError("trace_every must be >= 1");
}

void set_key(TrainConfig& cfg, std::string_view key, std::string_view value) {
    const auto v = trim(value);
    if (key == "dim") cfg.dim = parse_int(key, v);
    else if (key == "batch_size") cfg.batch_size = parse_int(key, v);
    else if (key == "gamma") cfg.gamma = parse_double(key, v);
    else if (key == "alpha") cfg.alpha = parse_double(key, v);
    else if (key == "gamma_m") cfg.gamma_m = parse_double(key, v);
    else if (key == "beta") cfg.beta = parse_double(key, v);
    else if (key == "negatives") cfg.negatives = parse_int(key, v);
    else if (key == "adv_temperature") cfg.adv_temperature = parse_double(key, v);
    else if (key == "learning_rate") cfg.learning_rate = parse_double(key, v);
    else if (key == "adam_beta1") cfg.adam_beta1 = parse_double(key, v);
    else if (key == "adam_beta2") cfg.adam_beta2 = parse_double(key, v);
    else if (key == "adam_eps") cfg.adam_eps = parse_double(key, v);
    else if (key == "lr_decay_steps") cfg.lr_decay_steps = parse_int(key, v);
    else if (key == "lr_decay_factor") cfg.lr_decay_factor = parse_double(key, v);
    else if (key == "max_steps") cfg.max_steps = parse_int(key, v);
    else if (key == "phase_init") cfg.phase_init = interval_from_string(v);
    else if (key == "phase_constraint") cfg.phase_constraint = constraint_from_string(v);
    else if (key == "phase_constraint_interval")
        cfg.phase_constraint_interval = interval_from_string(v);
    else if (key == "entity_init_range") cfg.entity_init_range = parse_double(key, v);
    else if (key == "ab_init_min") cfg.ab_init_min = parse_double(key, v);
    else if (key == "ab_init_max") cfg.ab_init_max = parse_double(key, v);
    else if (key == "seed") cfg.seed = parse_uint(key, v);
    else if (key == "model") cfg.model = model_kind_from_string(v);
    else if (key == "norm") cfg.norm = norm_kind_from_string(v);
    else if (key == "penalty_gate") cfg.penalty_gate = gate_from_string(v);
    else if (key == "negative_filter") cfg.negative_filter = parse_bool(key, v);
    else if (key == "valid_every") cfg.valid_every = parse_int(key, v);
    else if (key == "trace_every") cfg.trace_every = parse_int(key, v);
    else throw InputError("unknown config key: " + std::string(key));
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "dim", "batch_size", "gamma", "alpha", "gamma_m", "beta", "negatives",
        "adv_temperature", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps",
        "lr_decay_steps", "lr_decay_factor", "max_steps", "phase_init", "phase_constraint",
        "phase_constraint_interval", "entity_init_range", "ab_init_min", "ab_init_max", "seed",
        "model", "norm", "penalty_gate", "negative_filter", "valid_every", "trace_every"};
    return keys;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fb15k-237", "wn18rr", "yago3-10",
                                                   "countries-s1", "countries-s2", "countries-s3"};
    return names;
}

void apply_preset(TrainConfig& cfg, std::string_view name) {
    auto apply = [&cfg](std::initializer_list<std::pair<const char*, const char*>> kv) {
        for (const auto& [k, v] : kv) set_key(cfg, k, v);
    };
    if (name == "fb15k-237") {
        apply({{"dim", "1000"}, {"batch_size", "1024"}, {"gamma", "9.0"},
               {"gamma_m", "0.000001"}, {"beta", "1.5"}, {"alpha", "0.001"}});
    } else if (name == "wn18rr") {
        apply({{"dim", "500"}, {"batch_size", "512"}, {"gamma", "4.0"},
               {"gamma_m", "0.000001"}, {"beta", "1.3"}, {"alpha", "0.0003"}});
    } else if (name == "yago3-10") {
        apply({{"dim", "500"}, {"batch_size", "1024"}, {"gamma", "16.0"},
               {"gamma_m", "0.000001"}, {"beta", "1.5"}, {"alpha", "0.0005"}});
    } else if (name == "countries-s1" || name == "countries-s2" || name == "countries-s3") {
        apply({{"dim", "500"}, {"batch_size", "512"}, {"gamma", "0.1"},
               {"gamma_m", "0.000001"}, {"beta", "1.5"}, {"alpha", "0.0005"}});
    } else {
        std::string names;
        for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
        throw InputError("unknown preset '" + std::string(name) + "'; available: " + names);
    }
}

void load_config_file(TrainConfig& cfg, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config file: " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto s = std::string_view(line);
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw InputError(file.string() + ":" + std::to_string(lineno) +
                             ": expected `key = value`");
        set_key(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
}

nlohmann::json config_to_json(const TrainConfig& cfg) {
    return nlohmann::json{{"dim", cfg.dim},
                          {"batch_size", cfg.batch_size},
                          {"gamma", cfg.gamma},
                          {"alpha", cfg.alpha},
                          {"gamma_m", cfg.gamma_m},
                          {"beta", cfg.beta},
                          {"negatives", cfg.negatives},
                          {"adv_temperature", cfg.adv_temperature},
                          {"learning_rate", cfg.learning_rate},
                          {"adam_beta1", cfg.adam_beta1},
                          {"adam_beta2", cfg.adam_beta2},
                          {"adam_eps", cfg.adam_eps},
                          {"lr_decay_steps", cfg.lr_decay_steps},
                          {"lr_decay_factor", cfg.lr_decay_factor},
                          {"max_steps", cfg.max_steps},
                          {"phase_init", to_string(cfg.phase_init)},
                          {"phase_constraint", to_string(cfg.phase_constraint)},
                          {"phase_constraint_interval", to_string(cfg.phase_constraint_interval)},
                          {"entity_init_range", cfg.entity_init_range},
                          {"ab_init_min", cfg.ab_init_min},
                          {"ab_init_max", cfg.ab_init_max},
                          {"seed", cfg.seed},
                          {"model", to_string(cfg.model)},
                          {"norm", to_string(cfg.norm)},
                          {"penalty_gate", to_string(cfg.penalty_gate)},
                          {"negative_filter", cfg.negative_filter},
                          {"valid_every", cfg.valid_every},
                          {"trace_every", cfg.trace_every}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    for (const auto& [key, value] : j.items()) {
        std::string text;
        if (value.is_string()) text = value.get<std::string>();
        else text = value.dump();
        set_key(cfg, key, text);
    }
    return cfg;
}

} // namespace rotpro
