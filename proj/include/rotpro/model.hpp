#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rotpro/dataset.hpp"
#include "rotpro/geometry.hpp"

#include <nlohmann/json_fwd.hpp>

namespace rotpro {

enum class ModelKind { RotPro, RotatE, TransE };
enum class NormKind { SumModulus, SumSquares };

const char* to_string(ModelKind k);
const char* to_string(NormKind k);
ModelKind model_kind_from_string(std::string_view s);
NormKind norm_kind_from_string(std::string_view s);

// Structure-of-arrays parameter planes, row-major n x dim.
struct EntityTable {
    std::int64_t n{0};
    std::int64_t dim{0};
    std::vector<double> re;
    std::vector<double> im;

    void resize(std::int64_t n_, std::int64_t dim_);
    double* re_row(EntityId i) { return re.data() + static_cast<std::size_t>(i) * dim; }
    double* im_row(EntityId i) { return im.data() + static_cast<std::size_t>(i) * dim; }
    const double* re_row(EntityId i) const { return re.data() + static_cast<std::size_t>(i) * dim; }
    const double* im_row(EntityId i) const { return im.data() + static_cast<std::size_t>(i) * dim; }
};

// For RotPro/RotatE: rotation phases theta_r, projection-axis phases theta_p
// and the diagonal relaxations a, b. For TransE the theta_r/theta_p planes
// carry the translation's real/imaginary parts and a,b stay frozen at 1.
struct RelationTable {
    std::int64_t n{0};
    std::int64_t dim{0};
    std::vector<double> theta_r;
    std::vector<double> theta_p;
    std::vector<double> a;
    std::vector<double> b;

    void resize(std::int64_t n_, std::int64_t dim_);
    double* theta_r_row(RelationId i) { return theta_r.data() + static_cast<std::size_t>(i) * dim; }
    const double* theta_r_row(RelationId i) const { return theta_r.data() + static_cast<std::size_t>(i) * dim; }
    const double* theta_p_row(RelationId i) const { return theta_p.data() + static_cast<std::size_t>(i) * dim; }
    const double* a_row(RelationId i) const { return a.data() + static_cast<std::size_t>(i) * dim; }
    const double* b_row(RelationId i) const { return b.data() + static_cast<std::size_t>(i) * dim; }

    ProjectionSpec spec(RelationId r, std::int64_t k) const {
        const auto off = static_cast<std::size_t>(r) * dim + k;
        return {a[off], b[off], theta_p[off]};
    }
};

// Per-dimension transform of one relation with the trigonometry hoisted out:
// projection matrix entries and the rotation's cos/sin. Scoring loops build
// this once per (relation, parameter state) instead of per triple. For TransE
// cr/sr carry the translation instead. cp/sp (cos/sin of theta_p) are filled
// for RotPro only; the backward pass needs them.
struct RelationTransform {
    std::int64_t dim{0};
    bool identity_projection{false}; // every dim has a==1 && b==1 bitwise
    std::vector<double> m00, m01, m11;
    std::vector<double> cr, sr;
    std::vector<double> cp, sp;
};

class Model {
public:
    Model() = default;
    Model(ModelKind kind, NormKind norm, std::int64_t n_entities, std::int64_t n_relations,
          std::int64_t dim);

    ModelKind kind{ModelKind::RotPro};
    NormKind norm{NormKind::SumModulus};
    EntityTable entities;
    RelationTable relations;

    // Vocabulary carried with the parameters so checkpoints are
    // self-describing; may be empty for models built in tests.
    std::vector<std::string> entity_names;
    std::vector<std::string> relation_names;

    std::int64_t dim() const { return entities.dim; }
    std::int64_t n_entities() const { return entities.n; }
    std::int64_t n_relations() const { return relations.n; }

    // Eq-8-style distance (>= 0); score(h,r,t) = -distance(h,r,t).
    double distance(EntityId h, RelationId r, EntityId t) const;
    double score(EntityId h, RelationId r, EntityId t) const;
    std::vector<double> score_batch(std::span<const EntityId> hs, std::span<const RelationId> rs,
                                    std::span<const EntityId> ts) const;

    // Entry i = score(h, r, i) / score(i, r, t); the fixed side's transform is
    // hoisted out of the candidate loop.
    std::vector<double> score_all_tails(EntityId h, RelationId r) const;
    std::vector<double> score_all_heads(EntityId t, RelationId r) const;

    RelationTransform build_transform(RelationId r) const;
    double distance_with(const RelationTransform& tf, RelationId r, EntityId h, EntityId t) const;

    void check_entity(EntityId id) const;
    void check_relation(RelationId id) const;
};

// Checkpoint = one file: magic, little-endian u64 manifest length, JSON
// manifest, then raw little-endian float32 planes in fixed order
// (entity re, entity im, theta_r, theta_p, a, b). Round-trip through
// load/save is byte-exact.
void save_checkpoint(const Model& model, const std::filesystem::path& file,
                     const nlohmann::json& config_echo);
Model load_checkpoint(const std::filesystem::path& file, nlohmann::json* manifest_out = nullptr);

// Translates store triples into the checkpoint's id space by name; throws
// InputError naming the first unresolvable symbol.
TripleStore remap_store(const TripleStore& store, const Model& model);

} // namespace rotpro
