#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rotpro/config.hpp"
#include "rotpro/dataset.hpp"
#include "rotpro/model.hpp"
#include "rotpro/rng.hpp"

namespace rotpro {

// Numerically stable log(sigmoid(x)).
double log_sigmoid(double x);
double sigmoid(double x);

// Softmax of adv_temperature * score over one positive's negatives. The
// result is treated as constants downstream (no gradient flows through it).
std::vector<double> adversarial_weights(std::span<const double> neg_scores,
                                        double adv_temperature);

// -log s(gamma - d+) - sum_j w_j * log s(d-_j - gamma)
double loss_main(double pos_dist, std::span<const double> neg_dists,
                 std::span<const double> weights, double gamma);

// Per relation: ||(a-1) . a . q||_2 + ||(b-1) . b . q||_2, summed over
// relations. The gate q is 1 where the penalized value sits within gamma_m of
// {0,1} (Abs mode tests |(v-1)*v| < gamma_m; SignedProduct keeps the raw
// signed product) and beta elsewhere.
double loss_penalty(const RelationTable& rel, double gamma_m, double beta, GateMode gate);

double loss_total(double main, double penalty, double alpha);

void constrain_phases(RelationTable& rel, PhaseConstraintMode mode, PhaseInterval interval);

// Fresh tables per the config's init intervals. Draw order is fixed
// (entity re, entity im, theta_r, theta_p, a, b) so a given seed always
// produces bit-identical tables.
Model init_parameters(const TrainConfig& cfg, std::int64_t n_entities, std::int64_t n_relations,
                      Rng& rng);

struct NegativeSample {
    Triple triple;
    bool head_corrupted{false};
};

struct TrainingBatch {
    std::vector<Triple> positives;
    std::vector<NegativeSample> negatives; // positives.size() * negatives_per_positive, row-major
    std::int64_t negatives_per_positive{0};
};

struct ForwardCache {
    std::vector<double> pos_dist;
    std::vector<double> neg_dist; // row-major, same layout as batch.negatives
};

// Dense gradient planes mirroring the parameter layout.
struct ModelGrads {
    std::vector<double> ent_re, ent_im;
    std::vector<double> theta_r, theta_p, a, b;
    void resize_like(const Model& m);
    void zero();
    void add(const ModelGrads& other);
};

struct StepStats {
    std::int64_t step{0};
    double loss_main{0};
    double loss_penalty{0};
    double loss_total{0};
};

struct TraceRow {
    std::int64_t step{0};
    double loss_main{0};
    double loss_penalty{0};
    double loss_total{0};
    std::optional<double> valid_mrr;
};

class Trainer {
public:
    // model must outlive the trainer; threads > 1 parallelizes forward and
    // backward over the batch with per-thread gradient partials reduced in a
    // fixed order (single-threaded mode is exactly deterministic).
    Trainer(Model& model, const TripleStore& store, const TrainConfig& cfg, int threads = 1);

    TrainingBatch sample_batch();
    TrainingBatch sample_negatives(std::span<const Triple> positives);
    ForwardCache forward(const TrainingBatch& batch) const;
    // Row-major positives.size() x n weights.
    std::vector<double> batch_weights(const ForwardCache& fwd) const;
    double batch_loss_main(const ForwardCache& fwd, std::span<const double> weights) const;
    // Gradients of loss_total (batch mean main term + alpha * penalty);
    // adversarial weights enter as constants.
    void backward(const TrainingBatch& batch, const ForwardCache& fwd,
                  std::span<const double> weights, ModelGrads& grads) const;

    StepStats step();

    using TraceSink = std::function<void(const TraceRow&)>;
    using ValidationFn = std::function<double()>; // returns validation MRR
    // Runs cfg.max_steps steps; throws DivergenceError on a non-finite loss.
    void train(const TraceSink& trace = {}, const ValidationFn& validate = {});

    std::int64_t steps_done() const { return step_count_; }
    double current_lr() const;

private:
    Model& model_;
    const TripleStore& store_;
    TrainConfig cfg_;
    int threads_;
    Rng rng_;
    std::int64_t step_count_{0};

    // Adam state, one moment pair per parameter plane.
    ModelGrads m_, v_;
    ModelGrads grads_;
    mutable std::vector<ModelGrads> thread_grads_; // scratch for parallel backward
    std::vector<RelationTransform> transforms_; // rebuilt each step

    void rebuild_transforms();
    double sample_distance(const RelationTransform& tf, const Triple& t) const;
    void accumulate_sample(const Triple& t, double coeff, ModelGrads& g) const;
    void accumulate_penalty(ModelGrads& g) const;
    void adam_update();
    void adam_plane(std::vector<double>& param, const std::vector<double>& grad,
                    std::vector<double>& m, std::vector<double>& v, double lr, double bc1,
                    double bc2);
};

} // namespace rotpro
