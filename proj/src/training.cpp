#include "rotpro/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rotpro/errors.hpp"
#include "rotpro/parallel.hpp"

namespace rotpro {

double log_sigmoid(double x) {
    // -softplus(-x), with softplus(z) = max(z,0) + log1p(exp(-|z|)).
    return -(std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))));
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> adversarial_weights(std::span<const double> neg_scores,
                                        double adv_temperature) {
    std::vector<double> w(neg_scores.size());
    if (neg_scores.empty()) return w;
    double hi = -std::numeric_limits<double>::infinity();
    for (double s : neg_scores) hi = std::max(hi, adv_temperature * s);
    double z = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = std::exp(adv_temperature * neg_scores[j] - hi);
        z += w[j];
    }
    for (auto& x : w) x /= z;
    return w;
}

double loss_main(double pos_dist, std::span<const double> neg_dists,
                 std::span<const double> weights, double gamma) {
    double loss = -log_sigmoid(gamma - pos_dist);
    for (std::size_t j = 0; j < neg_dists.size(); ++j)
        loss -= weights[j] * log_sigmoid(neg_dists[j] - gamma);
    return loss;
}

namespace {

double gate_value(double v, double gamma_m, double beta, GateMode gate) {
    const double prod = (v - 1.0) * v;
    const bool near = gate == GateMode::Abs ? std::abs(prod) < gamma_m : prod < gamma_m;
    return near ? 1.0 : beta;
}

} // namespace

double loss_penalty(const RelationTable& rel, double gamma_m, double beta, GateMode gate) {
    double total = 0.0;
    for (std::int64_t j = 0; j < rel.n; ++j) {
        const double* a = rel.a_row(static_cast<RelationId>(j));
        const double* b = rel.b_row(static_cast<RelationId>(j));
        double sq_a = 0.0, sq_b = 0.0;
        for (std::int64_t k = 0; k < rel.dim; ++k) {
            const double ua = (a[k] - 1.0) * a[k] * gate_value(a[k], gamma_m, beta, gate);
            const double ub = (b[k] - 1.0) * b[k] * gate_value(b[k], gamma_m, beta, gate);
            sq_a += ua * ua;
            sq_b += ub * ub;
        }
        total += std::sqrt(sq_a) + std::sqrt(sq_b);
    }
    return total;
}

double loss_total(double main, double penalty, double alpha) { return main + alpha * penalty; }

void constrain_phases(RelationTable& rel, PhaseConstraintMode mode, PhaseInterval interval) {
    if (mode == PhaseConstraintMode::None) return;
    const double w = interval_halfwidth(interval);
    for (auto& th : rel.theta_r) {
        if (mode == PhaseConstraintMode::Clamp) {
            th = std::clamp(th, -w, w);
        } else {
            th -= 2.0 * w * std::floor((th + w) / (2.0 * w));
        }
    }
}

Model init_parameters(const TrainConfig& cfg, std::int64_t n_entities, std::int64_t n_relations,
                      Rng& rng) {
    cfg.validate();
    Model model(cfg.model, cfg.norm, n_entities, n_relations, cfg.dim);
    const double e = cfg.entity_init_range;
    for (auto& x : model.entities.re) x = rng.uniform(-e, e);
    for (auto& x : model.entities.im) x = rng.uniform(-e, e);

    if (cfg.model == ModelKind::TransE) {
        // theta planes hold the translation; a/b stay at their frozen 1.0.
        for (auto& x : model.relations.theta_r) x = rng.uniform(-e, e);
        for (auto& x : model.relations.theta_p) x = rng.uniform(-e, e);
        return model;
    }

    const double w = interval_halfwidth(cfg.phase_init);
    for (auto& x : model.relations.theta_r) x = rng.uniform(-w, w);
    if (cfg.model == ModelKind::RotPro) {
        for (auto& x : model.relations.theta_p) x = rng.uniform(-w, w);
        for (auto& x : model.relations.a) x = rng.uniform(cfg.ab_init_min, cfg.ab_init_max);
        for (auto& x : model.relations.b) x = rng.uniform(cfg.ab_init_min, cfg.ab_init_max);
    }
    return model;
}

void ModelGrads::resize_like(const Model& m) {
    ent_re.assign(m.entities.re.size(), 0.0);
    ent_im.assign(m.entities.im.size(), 0.0);
    theta_r.assign(m.relations.theta_r.size(), 0.0);
    theta_p.assign(m.relations.theta_p.size(), 0.0);
    a.assign(m.relations.a.size(), 0.0);
    b.assign(m.relations.b.size(), 0.0);
}

void ModelGrads::zero() {
    std::fill(ent_re.begin(), ent_re.end(), 0.0);
    std::fill(ent_im.begin(), ent_im.end(), 0.0);
    std::fill(theta_r.begin(), theta_r.end(), 0.0);
    std::fill(theta_p.begin(), theta_p.end(), 0.0);
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
}

void ModelGrads::add(const ModelGrads& o) {
    auto axpy = [](std::vector<double>& dst, const std::vector<double>& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    };
    axpy(ent_re, o.ent_re);
    axpy(ent_im, o.ent_im);
    axpy(theta_r, o.theta_r);
    axpy(theta_p, o.theta_p);
    axpy(a, o.a);
    axpy(b, o.b);
}

Trainer::Trainer(Model& model, const TripleStore& store, const TrainConfig& cfg, int threads)
    : model_(model),
      store_(store),
      cfg_(cfg),
      threads_(std::max(1, threads)),
      rng_(derive_seed(cfg.seed, 0x545241494eULL)) /* "TRAIN" */ {
    cfg_.validate();
    if (store_.train.empty()) throw InputError("cannot train on an empty train split");
    grads_.resize_like(model_);
    m_.resize_like(model_);
    v_.resize_like(model_);
    if (threads_ > 1) thread_grads_.resize(threads_);
    rebuild_transforms();
}

void Trainer::rebuild_transforms() {
    transforms_.resize(model_.n_relations());
    for (RelationId r = 0; r < model_.n_relations(); ++r)
        transforms_[r] = model_.build_transform(r);
}

TrainingBatch Trainer::sample_batch() {
    std::vector<Triple> positives(cfg_.batch_size);
    for (auto& p : positives) p = store_.train[rng_.uniform_int(store_.train.size())];
    return sample_negatives(positives);
}

TrainingBatch Trainer::sample_negatives(std::span<const Triple> positives) {
    const auto n_ent = static_cast<std::int64_t>(store_.n_entities());
    if (n_ent < 2) throw InputError("negative sampling needs at least 2 entities");

    TrainingBatch batch;
    batch.positives.assign(positives.begin(), positives.end());
    batch.negatives_per_positive = cfg_.negatives;
    batch.negatives.reserve(positives.size() * cfg_.negatives);

    // Exhaustive fallback for pathological filtered cases: every candidate on
    // one side may be known true.
    auto exhaustive = [&](const Triple& pos, bool head_side) -> std::optional<EntityId> {
        std::vector<EntityId> ok;
        for (EntityId e = 0; e < n_ent; ++e) {
            if (head_side && e != pos.h && !store_.is_known_true(e, pos.r, pos.t)) ok.push_back(e);
            if (!head_side && e != pos.t && !store_.is_known_true(pos.h, pos.r, e)) ok.push_back(e);
        }
        if (ok.empty()) return std::nullopt;
        return ok[rng_.uniform_int(ok.size())];
    };

    for (const auto& pos : positives) {
        for (std::int64_t j = 0; j < cfg_.negatives; ++j) {
            bool head_side = rng_.coin();
            const EntityId original = head_side ? pos.h : pos.t;
            EntityId pick = -1;
            for (int attempt = 0; attempt < 64; ++attempt) {
                const auto e = static_cast<EntityId>(rng_.uniform_int(n_ent));
                if (e == original) continue;
                if (cfg_.negative_filter) {
                    const bool truth = head_side ? store_.is_known_true(e, pos.r, pos.t)
                                                 : store_.is_known_true(pos.h, pos.r, e);
                    if (truth) continue;
                }
                pick = e;
                break;
            }
            if (pick < 0 && cfg_.negative_filter) {
                auto e = exhaustive(pos, head_side);
                if (!e) {
                    head_side = !head_side;
                    e = exhaustive(pos, head_side);
                }
                if (!e)
                    throw InputError("negative sampling exhausted: every corruption of (" +
                                     std::to_string(pos.h) + "," + std::to_string(pos.r) + "," +
                                     std::to_string(pos.t) + ") is known true");
                pick = *e;
            }
            if (pick < 0) throw Error("negative sampling failed unexpectedly");
            Triple neg = pos;
            (head_side ? neg.h : neg.t) = pick;
            batch.negatives.push_back({neg, head_side});
        }
    }
    return batch;
}

double Trainer::sample_distance(const RelationTransform& tf, const Triple& t) const {
    return model_.distance_with(tf, t.r, t.h, t.t);
}

ForwardCache Trainer::forward(const TrainingBatch& batch) const {
    ForwardCache fwd;
    fwd.pos_dist.resize(batch.positives.size());
    fwd.neg_dist.resize(batch.negatives.size());
    const auto total = static_cast<std::int64_t>(batch.positives.size() + batch.negatives.size());
    parallel_chunks(total, threads_, [&](int, std::int64_t begin, std::int64_t end) {
        const auto n_pos = static_cast<std::int64_t>(batch.positives.size());
        for (std::int64_t i = begin; i < end; ++i) {
            if (i < n_pos) {
                const auto& tr = batch.positives[i];
                fwd.pos_dist[i] = sample_distance(transforms_[tr.r], tr);
            } else {
                const auto& tr = batch.negatives[i - n_pos].triple;
                fwd.neg_dist[i - n_pos] = sample_distance(transforms_[tr.r], tr);
            }
        }
    });
    return fwd;
}

std::vector<double> Trainer::batch_weights(const ForwardCache& fwd) const {
    const auto n = cfg_.negatives;
    std::vector<double> weights(fwd.neg_dist.size());
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < fwd.pos_dist.size(); ++i) {
        for (std::int64_t j = 0; j < n; ++j) scores[j] = -fwd.neg_dist[i * n + j];
        const auto w = adversarial_weights(scores, cfg_.adv_temperature);
        std::copy(w.begin(), w.end(), weights.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    return weights;
}

double Trainer::batch_loss_main(const ForwardCache& fwd, std::span<const double> weights) const {
    const auto n = cfg_.negatives;
    double total = 0.0;
    for (std::size_t i = 0; i < fwd.pos_dist.size(); ++i)
        total += loss_main(fwd.pos_dist[i],
                           std::span(fwd.neg_dist).subspan(i * n, n),
                           weights.subspan(i * n, n), cfg_.gamma);
    return total / static_cast<double>(fwd.pos_dist.size());
}

// Adds coeff * d distance(h,r,t) / d params to g.
void Trainer::accumulate_sample(const Triple& t, double coeff, ModelGrads& g) const {
    const auto& tf = transforms_[t.r];
    const auto d = model_.dim();
    const double* hx = model_.entities.re_row(t.h);
    const double* hy = model_.entities.im_row(t.h);
    const double* tx = model_.entities.re_row(t.t);
    const double* ty = model_.entities.im_row(t.t);
    const auto h_off = static_cast<std::size_t>(t.h) * d;
    const auto t_off = static_cast<std::size_t>(t.t) * d;
    const auto r_off = static_cast<std::size_t>(t.r) * d;
    const bool sum_modulus = model_.norm == NormKind::SumModulus;

    if (model_.kind == ModelKind::TransE) {
        for (std::int64_t k = 0; k < d; ++k) {
            const double dx = hx[k] + tf.cr[k] - tx[k];
            const double dy = hy[k] + tf.sr[k] - ty[k];
            double gx, gy;
            if (sum_modulus) {
                const double m = std::sqrt(dx * dx + dy * dy);
                if (m == 0.0) continue; // subgradient 0 at the origin
                gx = coeff * dx / m;
                gy = coeff * dy / m;
            } else {
                gx = coeff * 2.0 * dx;
                gy = coeff * 2.0 * dy;
            }
            g.ent_re[h_off + k] += gx;
            g.ent_im[h_off + k] += gy;
            g.theta_r[r_off + k] += gx; // translation, real part
            g.theta_p[r_off + k] += gy; // translation, imaginary part
            g.ent_re[t_off + k] -= gx;
            g.ent_im[t_off + k] -= gy;
        }
        return;
    }

    const bool rotpro = model_.kind == ModelKind::RotPro;
    const double* a = model_.relations.a_row(t.r);
    const double* b = model_.relations.b_row(t.r);
    for (std::int64_t k = 0; k < d; ++k) {
        const double m00 = tf.m00[k], m01 = tf.m01[k], m11 = tf.m11[k];
        const double cr = tf.cr[k], sr = tf.sr[k];
        const double phx = m00 * hx[k] + m01 * hy[k];
        const double phy = m01 * hx[k] + m11 * hy[k];
        const double ptx = m00 * tx[k] + m01 * ty[k];
        const double pty = m01 * tx[k] + m11 * ty[k];
        const double rhx = cr * phx - sr * phy;
        const double rhy = sr * phx + cr * phy;
        const double dx = rhx - ptx;
        const double dy = rhy - pty;
        double gx, gy;
        if (sum_modulus) {
            const double m = std::sqrt(dx * dx + dy * dy);
            if (m == 0.0) continue;
            gx = coeff * dx / m;
            gy = coeff * dy / m;
        } else {
            gx = coeff * 2.0 * dx;
            gy = coeff * 2.0 * dy;
        }

        g.theta_r[r_off + k] += gx * (-rhy) + gy * rhx;

        // Back through the rotation, then the (symmetric) projection.
        const double gphx = cr * gx + sr * gy;
        const double gphy = -sr * gx + cr * gy;
        g.ent_re[h_off + k] += m00 * gphx + m01 * gphy;
        g.ent_im[h_off + k] += m01 * gphx + m11 * gphy;
        g.ent_re[t_off + k] -= m00 * gx + m01 * gy;
        g.ent_im[t_off + k] -= m01 * gx + m11 * gy;

        if (!rotpro) continue;
        // d loss / d M as a full 2x2, then chain into (a, b, theta_p).
        const double gptx = -gx, gpty = -gy;
        const double g00 = gphx * hx[k] + gptx * tx[k];
        const double g01 = gphx * hy[k] + gptx * ty[k];
        const double g10 = gphy * hx[k] + gpty * tx[k];
        const double g11 = gphy * hy[k] + gpty * ty[k];
        const double cp = tf.cp[k], sp = tf.sp[k];
        const double cc = cp * cp, ss = sp * sp, sc = sp * cp;
        g.a[r_off + k] += g00 * cc - (g01 + g10) * sc + g11 * ss;
        g.b[r_off + k] += g00 * ss + (g01 + g10) * sc + g11 * cc;
        g.theta_p[r_off + k] += (b[k] - a[k]) * (2.0 * sc * (g00 - g11) + (cc - ss) * (g01 + g10));
    }
}

void Trainer::accumulate_penalty(ModelGrads& g) const {
    if (model_.kind != ModelKind::RotPro || cfg_.alpha == 0.0) return;
    const auto& rel = model_.relations;
    for (std::int64_t j = 0; j < rel.n; ++j) {
        const auto off = static_cast<std::size_t>(j) * rel.dim;
        for (int plane = 0; plane < 2; ++plane) {
            const double* v = plane == 0 ? &rel.a[off] : &rel.b[off];
            std::vector<double>& gv = plane == 0 ? g.a : g.b;
            double sq = 0.0;
            for (std::int64_t k = 0; k < rel.dim; ++k) {
                const double q = gate_value(v[k], cfg_.gamma_m, cfg_.beta, cfg_.penalty_gate);
                const double u = (v[k] - 1.0) * v[k] * q;
                sq += u * u;
            }
            const double nrm = std::sqrt(sq);
            if (nrm == 0.0) continue;
            for (std::int64_t k = 0; k < rel.dim; ++k) {
                const double q = gate_value(v[k], cfg_.gamma_m, cfg_.beta, cfg_.penalty_gate);
                const double u = (v[k] - 1.0) * v[k] * q;
                gv[off + k] += cfg_.alpha * u * q * (2.0 * v[k] - 1.0) / nrm;
            }
        }
    }
}

void Trainer::backward(const TrainingBatch& batch, const ForwardCache& fwd,
                       std::span<const double> weights, ModelGrads& grads) const {
    const auto n_pos = static_cast<std::int64_t>(batch.positives.size());
    const auto n_neg = static_cast<std::int64_t>(batch.negatives.size());
    const double inv_p = 1.0 / static_cast<double>(n_pos);

    auto sample_coeff = [&](std::int64_t i) {
        if (i < n_pos) return inv_p * sigmoid(fwd.pos_dist[i] - cfg_.gamma);
        const auto j = i - n_pos;
        // Weights are constants here: no gradient flows through the softmax.
        return -inv_p * weights[j] * sigmoid(cfg_.gamma - fwd.neg_dist[j]);
    };
    auto sample_triple = [&](std::int64_t i) -> const Triple& {
        return i < n_pos ? batch.positives[i] : batch.negatives[i - n_pos].triple;
    };

    if (threads_ <= 1) {
        for (std::int64_t i = 0; i < n_pos + n_neg; ++i)
            accumulate_sample(sample_triple(i), sample_coeff(i), grads);
    } else {
        for (auto& tg : thread_grads_) {
            tg.resize_like(model_);
        }
        parallel_chunks(n_pos + n_neg, threads_, [&](int w, std::int64_t begin, std::int64_t end) {
            for (std::int64_t i = begin; i < end; ++i)
                accumulate_sample(sample_triple(i), sample_coeff(i), thread_grads_[w]);
        });
        for (const auto& tg : thread_grads_) grads.add(tg);
    }
    accumulate_penalty(grads);
}

double Trainer::current_lr() const {
    double lr = cfg_.learning_rate;
    if (cfg_.lr_decay_steps > 0)
        lr *= std::pow(cfg_.lr_decay_factor,
                       static_cast<double>(step_count_ / cfg_.lr_decay_steps));
    return lr;
}

void Trainer::adam_plane(std::vector<double>& param, const std::vector<double>& grad,
                         std::vector<double>& m, std::vector<double>& v, double lr, double bc1,
                         double bc2) {
    const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2, eps = cfg_.adam_eps;
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

void Trainer::adam_update() {
    const auto t = static_cast<double>(step_count_ + 1);
    const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, t);
    const double lr = current_lr();

    adam_plane(model_.entities.re, grads_.ent_re, m_.ent_re, v_.ent_re, lr, bc1, bc2);
    adam_plane(model_.entities.im, grads_.ent_im, m_.ent_im, v_.ent_im, lr, bc1, bc2);
    adam_plane(model_.relations.theta_r, grads_.theta_r, m_.theta_r, v_.theta_r, lr, bc1, bc2);
    if (model_.kind != ModelKind::RotatE)
        adam_plane(model_.relations.theta_p, grads_.theta_p, m_.theta_p, v_.theta_p, lr, bc1, bc2);
    if (model_.kind == ModelKind::RotPro) {
        adam_plane(model_.relations.a, grads_.a, m_.a, v_.a, lr, bc1, bc2);
        adam_plane(model_.relations.b, grads_.b, m_.b, v_.b, lr, bc1, bc2);
    }
}

StepStats Trainer::step() {
    rebuild_transforms();
    const auto batch = sample_batch();
    const auto fwd = forward(batch);
    const auto weights = batch_weights(fwd);

    StepStats stats;
    stats.loss_main = batch_loss_main(fwd, weights);
    stats.loss_penalty = model_.kind == ModelKind::RotPro
                             ? loss_penalty(model_.relations, cfg_.gamma_m, cfg_.beta,
                                            cfg_.penalty_gate)
                             : 0.0;
    stats.loss_total = loss_total(stats.loss_main, stats.loss_penalty, cfg_.alpha);

    grads_.zero();
    backward(batch, fwd, weights, grads_);
    adam_update();
    if (model_.kind != ModelKind::TransE)
        constrain_phases(model_.relations, cfg_.phase_constraint, cfg_.phase_constraint_interval);

    ++step_count_;
    stats.step = step_count_;
    return stats;
}

void Trainer::train(const TraceSink& trace, const ValidationFn& validate) {
    for (std::int64_t s = 1; s <= cfg_.max_steps; ++s) {
        const auto stats = step();
        if (!std::isfinite(stats.loss_total))
            throw DivergenceError("non-finite loss at step " + std::to_string(stats.step) +
                                  " (loss_main=" + std::to_string(stats.loss_main) +
                                  ", loss_penalty=" + std::to_string(stats.loss_penalty) + ")");
        const bool do_validate = validate && cfg_.valid_every > 0 && s % cfg_.valid_every == 0;
        const bool do_trace =
            trace && (s == 1 || s % cfg_.trace_every == 0 || s == cfg_.max_steps || do_validate);
        if (do_trace) {
            TraceRow row{stats.step, stats.loss_main, stats.loss_penalty, stats.loss_total, {}};
            if (do_validate) row.valid_mrr = validate();
            trace(row);
        }
    }
}

} // namespace rotpro
