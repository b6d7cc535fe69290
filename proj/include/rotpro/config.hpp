#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rotpro/model.hpp"

#include <nlohmann/json_fwd.hpp>

namespace rotpro {

enum class PhaseInterval { Pi, HalfPi }; // (-pi, pi) or (-pi/2, pi/2)
enum class PhaseConstraintMode { None, Clamp, Wrap };
enum class GateMode { Abs, SignedProduct };

const char* to_string(PhaseInterval v);
const char* to_string(PhaseConstraintMode v);
const char* to_string(GateMode v);
double interval_halfwidth(PhaseInterval v);

struct TrainConfig {
    std::int64_t dim = 100;
    std::int64_t batch_size = 256;
    double gamma = 6.0;        // fixed margin
    double alpha = 0.0005;     // penalty weight
    double gamma_m = 1e-6;     // penalty gate threshold
    double beta = 1.5;         // penalty gate multiplier, > 1
    std::int64_t negatives = 8;
    double adv_temperature = 1.0;
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::int64_t lr_decay_steps = 0; // 0 = constant learning rate
    double lr_decay_factor = 0.1;
    std::int64_t max_steps = 1000;
    PhaseInterval phase_init = PhaseInterval::Pi;
    PhaseConstraintMode phase_constraint = PhaseConstraintMode::None;
    PhaseInterval phase_constraint_interval = PhaseInterval::Pi;
    double entity_init_range = 1.0; // entities ~ U(-range, range)
    double ab_init_min = 0.5;
    double ab_init_max = 1.0;
    std::uint64_t seed = 0;
    ModelKind model = ModelKind::RotPro;
    NormKind norm = NormKind::SumModulus;
    GateMode penalty_gate = GateMode::Abs;
    bool negative_filter = false;
    std::int64_t valid_every = 0; // 0 = no validation during training
    std::int64_t trace_every = 100;

    void validate() const; // throws InputError on violated bounds
};

// Sets a single field from its config-file key; throws InputError naming the
// key when it is unknown or the value does not parse. The same keys back the
// CLI flags, so precedence is just application order:
// defaults < preset < config file < flags.
void set_key(TrainConfig& cfg, std::string_view key, std::string_view value);

const std::vector<std::string>& config_keys();
const std::vector<std::string>& preset_names();
void apply_preset(TrainConfig& cfg, std::string_view name);

// Line-oriented `key = value` file; '#' starts a comment.
void load_config_file(TrainConfig& cfg, const std::filesystem::path& file);

nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

} // namespace rotpro
