#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rotpro/dataset.hpp"
#include "rotpro/model.hpp"

namespace rotpro {

struct RankingReport {
    double mr{0};
    double mrr{0};
    double hits1{0};
    double hits3{0};
    double hits10{0};
    std::uint64_t n_queries{0};
    std::map<RelationId, RankingReport> per_relation; // empty unless requested
};

struct EvalOptions {
    bool per_relation = false;
    int threads = 1;
};

// Filtered protocol: each triple is ranked twice (tail- and head-replacement)
// against every entity; candidates forming known-true triples other than the
// target are excluded. Ties get the mean rank among equals. Results are
// reduced in triple order, so they are bit-stable for any thread count.
RankingReport evaluate_filtered(const Model& model, const TripleStore& store,
                                std::span<const Triple> triples, const EvalOptions& opts = {});
RankingReport evaluate_filtered(const Model& model, const TripleStore& store, Split split,
                                const EvalOptions& opts = {});

// Area under the precision-recall curve by trapezoidal construction over
// descending scores, with equal scores collapsed into one cut point. Throws
// InputError when there is no positive label.
double auc_pr(std::span<const std::pair<double, int>> scored);

// Countries task: per test triple (country, r, region) scores every candidate
// region and labels it positive iff the triple is known true.
double auc_pr_countries(const Model& model, const TripleStore& store,
                        std::span<const EntityId> region_ids, std::span<const Triple> test_triples);

struct PhaseHistogram {
    std::vector<double> edges;        // bins + 1 ascending edges over [0, 2pi)
    std::vector<std::uint64_t> counts;
    double tolerance{0.1};
    std::uint64_t total() const;
};

// Counts wrapped theta_r values over dimensions whose (a,b) lies within
// tolerance of (1,0) or (0,1) — the non-trivial projections.
PhaseHistogram phase_histogram(const RelationTable& rel, std::optional<RelationId> relation,
                               double tolerance, int bins);

// True iff (a,b) is within tol of (1,0) or (0,1).
bool non_trivial_projection(double a, double b, double tol);

// Wraps an angle into [0, 2pi).
double wrap_phase(double theta);

// Per dimension k: standard deviation across the chain's entities of
// cos(theta_p)*Re(e) - sin(theta_p)*Im(e); near zero means the entities sit
// on one projection line.
std::vector<double> collinearity_residuals(const Model& model,
                                           std::span<const EntityId> chain_entities,
                                           RelationId relation);

// Positive-term loss of the given triples as a function of a shared theta_r
// override applied to every dimension of the relation.
std::vector<std::pair<double, double>> loss_phase_sweep(const Model& model,
                                                        std::span<const Triple> chain_triples,
                                                        std::span<const double> phase_grid,
                                                        double gamma);

// Interior grid over (0, 2pi): 2pi*(i+1)/(n+1), i = 0..n-1.
std::vector<double> default_phase_grid(int n);

struct SliceRow {
    EntityId entity{0};
    double x{0}, y{0};   // raw coordinates in dimension k
    double px{0}, py{0}; // after the relation's projection
    double theta_p{0};
};

std::vector<SliceRow> export_embedding_slice(const Model& model, std::span<const EntityId> ids,
                                             std::int64_t dim_k, RelationId relation);

} // namespace rotpro
