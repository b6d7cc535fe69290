#include "rotpro/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rotpro/errors.hpp"
#include "rotpro/parallel.hpp"
#include "rotpro/training.hpp"

namespace rotpro {

namespace {

// rank = 1 + #strictly-better + #ties/2, ties excluding the target itself.
// Masked candidates (filtered known-true) are skipped entirely.
double rank_of(std::span<const double> scores, std::span<const char> masked, std::int64_t target) {
    const double s = scores[target];
    std::int64_t better = 0, equal = 0;
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(scores.size()); ++c) {
        if (c == target || masked[c]) continue;
        if (scores[c] > s) ++better;
        else if (scores[c] == s) ++equal;
    }
    return 1.0 + static_cast<double>(better) + static_cast<double>(equal) / 2.0;
}

struct RankAccum {
    double sum_rank = 0, sum_rr = 0;
    std::uint64_t h1 = 0, h3 = 0, h10 = 0, n = 0;
    void add(double rank) {
        sum_rank += rank;
        sum_rr += 1.0 / rank;
        if (rank <= 1.0) ++h1;
        if (rank <= 3.0) ++h3;
        if (rank <= 10.0) ++h10;
        ++n;
    }
    RankingReport report() const {
        if (n == 0) return {};
        RankingReport r;
        r.mr = sum_rank / static_cast<double>(n);
        r.mrr = sum_rr / static_cast<double>(n);
        r.hits1 = static_cast<double>(h1) / static_cast<double>(n);
        r.hits3 = static_cast<double>(h3) / static_cast<double>(n);
        r.hits10 = static_cast<double>(h10) / static_cast<double>(n);
        r.n_queries = n;
        return r;
    }
};

} // namespace

RankingReport evaluate_filtered(const Model& model, const TripleStore& store,
                                std::span<const Triple> triples, const EvalOptions& opts) {
    if (triples.empty()) throw InputError("evaluate_filtered: empty triple set");
    const auto n_ent = static_cast<std::int64_t>(model.n_entities());

    // Two ranks per triple (tail query, head query), index-addressed so the
    // reduction below is independent of the thread count.
    std::vector<double> ranks(triples.size() * 2);
    parallel_chunks(static_cast<std::int64_t>(triples.size()), opts.threads,
                    [&](int, std::int64_t begin, std::int64_t end) {
                        std::vector<char> masked(n_ent);
                        for (std::int64_t i = begin; i < end; ++i) {
                            const auto& tr = triples[i];
                            const auto tail_scores = model.score_all_tails(tr.h, tr.r);
                            for (EntityId c = 0; c < n_ent; ++c)
                                masked[c] = c != tr.t && store.is_known_true(tr.h, tr.r, c);
                            ranks[i * 2] = rank_of(tail_scores, masked, tr.t);

                            const auto head_scores = model.score_all_heads(tr.t, tr.r);
                            for (EntityId c = 0; c < n_ent; ++c)
                                masked[c] = c != tr.h && store.is_known_true(c, tr.r, tr.t);
                            ranks[i * 2 + 1] = rank_of(head_scores, masked, tr.h);
                        }
                    });

    RankAccum all;
    std::map<RelationId, RankAccum> by_rel;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        for (int q = 0; q < 2; ++q) {
            all.add(ranks[i * 2 + q]);
            if (opts.per_relation) by_rel[triples[i].r].add(ranks[i * 2 + q]);
        }
    }
    auto report = all.report();
    for (const auto& [rel, acc] : by_rel) report.per_relation[rel] = acc.report();
    return report;
}

RankingReport evaluate_filtered(const Model& model, const TripleStore& store, Split split,
                                const EvalOptions& opts) {
    return evaluate_filtered(model, store, store.split(split), opts);
}

double auc_pr(std::span<const std::pair<double, int>> scored) {
    std::uint64_t total_pos = 0;
    for (const auto& [s, label] : scored) total_pos += label ? 1 : 0;
    if (total_pos == 0) throw InputError("auc_pr: no positive labels, metric undefined");

    std::vector<std::pair<double, int>> sorted(scored.begin(), scored.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& x, const auto& y) { return x.first > y.first; });

    // Trapezoids between cut points; equal scores form one cut point.
    double area = 0.0;
    double prev_recall = 0.0, prev_precision = 1.0;
    std::uint64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            (sorted[j].second ? tp : fp) += 1;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * (precision + prev_precision) / 2.0;
        prev_recall = recall;
        prev_precision = precision;
        i = j;
    }
    return area;
}

double auc_pr_countries(const Model& model, const TripleStore& store,
                        std::span<const EntityId> region_ids,
                        std::span<const Triple> test_triples) {
    if (test_triples.empty()) throw InputError("auc_pr_countries: empty test set");
    if (region_ids.empty()) throw InputError("auc_pr_countries: empty candidate region set");
    std::vector<std::pair<double, int>> scored;
    scored.reserve(test_triples.size() * region_ids.size());
    for (const auto& tr : test_triples) {
        const auto scores = model.score_all_tails(tr.h, tr.r);
        for (const auto region : region_ids) {
            model.check_entity(region);
            const int label = store.is_known_true(tr.h, tr.r, region) ? 1 : 0;
            scored.emplace_back(scores[region], label);
        }
    }
    return auc_pr(scored);
}

double wrap_phase(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(theta, two_pi);
    if (w < 0) w += two_pi;
    return w;
}

bool non_trivial_projection(double a, double b, double tol) {
    const bool one_zero = std::abs(a - 1.0) <= tol && std::abs(b) <= tol;
    const bool zero_one = std::abs(a) <= tol && std::abs(b - 1.0) <= tol;
    return one_zero || zero_one;
}

std::uint64_t PhaseHistogram::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

PhaseHistogram phase_histogram(const RelationTable& rel, std::optional<RelationId> relation,
                               double tolerance, int bins) {
    if (bins < 1) throw InputError("phase_histogram: need at least one bin");
    if (relation && (*relation < 0 || *relation >= rel.n))
        throw InputError("phase_histogram: relation id out of range");
    const double two_pi = 2.0 * std::numbers::pi;
    PhaseHistogram hist;
    hist.tolerance = tolerance;
    hist.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) hist.edges[i] = two_pi * i / bins;
    hist.counts.assign(bins, 0);

    const RelationId lo = relation ? *relation : 0;
    const RelationId hi = relation ? *relation + 1 : static_cast<RelationId>(rel.n);
    for (RelationId j = lo; j < hi; ++j) {
        const auto off = static_cast<std::size_t>(j) * rel.dim;
        for (std::int64_t k = 0; k < rel.dim; ++k) {
            if (!non_trivial_projection(rel.a[off + k], rel.b[off + k], tolerance)) continue;
            const double w = wrap_phase(rel.theta_r[off + k]);
            auto bin = static_cast<std::size_t>(w / two_pi * bins);
            if (bin >= static_cast<std::size_t>(bins)) bin = bins - 1;
            ++hist.counts[bin];
        }
    }
    return hist;
}

std::vector<double> collinearity_residuals(const Model& model,
                                           std::span<const EntityId> chain_entities,
                                           RelationId relation) {
    if (chain_entities.size() < 2)
        throw InputError("collinearity check needs at least 2 chain entities");
    model.check_relation(relation);
    for (auto e : chain_entities) model.check_entity(e);

    const auto d = model.dim();
    const double* th_p = model.relations.theta_p_row(relation);
    std::vector<double> residuals(d);
    const auto m = static_cast<double>(chain_entities.size());
    for (std::int64_t k = 0; k < d; ++k) {
        const double c = std::cos(th_p[k]);
        const double s = std::sin(th_p[k]);
        double sum = 0.0, sum_sq = 0.0;
        for (auto e : chain_entities) {
            const double v = c * model.entities.re_row(e)[k] - s * model.entities.im_row(e)[k];
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / m;
        residuals[k] = std::sqrt(std::max(0.0, sum_sq / m - mean * mean));
    }
    return residuals;
}

std::vector<double> default_phase_grid(int n) {
    if (n < 1) throw InputError("phase grid needs at least one point");
    std::vector<double> grid(n);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < n; ++i) grid[i] = two_pi * (i + 1) / (n + 1);
    return grid;
}

std::vector<std::pair<double, double>> loss_phase_sweep(const Model& model,
                                                        std::span<const Triple> chain_triples,
                                                        std::span<const double> phase_grid,
                                                        double gamma) {
    if (phase_grid.empty()) throw InputError("loss_phase_sweep: empty phase grid");
    if (chain_triples.empty()) throw InputError("loss_phase_sweep: no triples");
    for (const auto& tr : chain_triples) {
        model.check_entity(tr.h);
        model.check_entity(tr.t);
        model.check_relation(tr.r);
    }

    // Copy the model and override every dimension of the swept relations'
    // theta_r with the shared grid phase; only the positive loss term enters.
    Model probe = model;
    std::vector<std::pair<double, double>> rows;
    rows.reserve(phase_grid.size());
    for (const double phase : phase_grid) {
        for (const auto& tr : chain_triples) {
            double* th = probe.relations.theta_r_row(tr.r);
            for (std::int64_t k = 0; k < probe.dim(); ++k) th[k] = phase;
        }
        double loss = 0.0;
        for (const auto& tr : chain_triples)
            loss += -log_sigmoid(gamma - probe.distance(tr.h, tr.r, tr.t));
        rows.emplace_back(phase, loss);
    }
    return rows;
}

std::vector<SliceRow> export_embedding_slice(const Model& model, std::span<const EntityId> ids,
                                             std::int64_t dim_k, RelationId relation) {
    if (dim_k < 0 || dim_k >= model.dim())
        throw InputError("embedding slice: dimension out of range: " + std::to_string(dim_k));
    model.check_relation(relation);
    const auto spec = model.relations.spec(relation, dim_k);
    std::vector<SliceRow> rows;
    rows.reserve(ids.size());
    for (const auto id : ids) {
        model.check_entity(id);
        SliceRow row;
        row.entity = id;
        row.x = model.entities.re_row(id)[dim_k];
        row.y = model.entities.im_row(id)[dim_k];
        const auto p = project({row.x, row.y}, spec);
        row.px = p.x;
        row.py = p.y;
        row.theta_p = spec.theta_p;
        rows.push_back(row);
    }
    return rows;
}

} // namespace rotpro
