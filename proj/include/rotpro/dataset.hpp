#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rotpro {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
    EntityId h{0};
    RelationId r{0};
    EntityId t{0};
    bool operator==(const Triple&) const = default;
};

enum class Split { Train, Valid, Test };

// Bidirectional string <-> dense id mapping.
class Vocab {
public:
    std::int32_t get_or_add(std::string_view name);
    std::optional<std::int32_t> find(std::string_view name) const;
    const std::string& name(std::int32_t id) const;
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    // FNV-1a over the names in id order; checkpoint compatibility check.
    std::uint64_t hash() const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::int32_t> ids_;
};

// Integer-encoded triples with train/valid/test splits and a hash index over
// the union of all three (the "known true" set used by filtered evaluation
// and negative-sample filtering). Immutable after construction.
class TripleStore {
public:
    Vocab entities;
    Vocab relations;
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;

    // Reads train/valid/test TSV files (head<TAB>relation<TAB>tail) from a
    // directory. Accepts either .txt or .tsv suffixes. Duplicates within a
    // split are dropped (counted in the report); an empty or missing train
    // file is an error, empty valid/test produce a warning only.
    static TripleStore ingest(const std::filesystem::path& dir,
                              std::vector<std::string>* warnings = nullptr);

    const std::vector<Triple>& split(Split s) const;
    static const char* split_name(Split s);

    bool is_known_true(EntityId h, RelationId r, EntityId t) const;
    bool is_known_true(const Triple& tr) const { return is_known_true(tr.h, tr.r, tr.t); }

    std::size_t n_entities() const { return entities.size(); }
    std::size_t n_relations() const { return relations.size(); }

    // Rebuilds the known-true index; call after mutating splits by hand
    // (generators do; ingest already does).
    void rebuild_index();

    // All edges of one relation across every split.
    std::vector<Triple> relation_edges(RelationId r) const;

private:
    std::unordered_set<std::uint64_t> known_;
    static std::uint64_t pack(EntityId h, RelationId r, EntityId t);
};

struct TransitiveChain {
    std::vector<EntityId> entities; // e_1 .. e_m, pairwise distinct
    RelationId relation{0};
};

// Consecutive edges all present in the store and entities pairwise distinct.
bool chain_is_valid(const TripleStore& store, const TransitiveChain& chain);

// All (e, r, e') with a directed r-path from e to e', e != e'. Per-source BFS
// over the given single-relation edge list.
std::vector<Triple> transitive_closure(std::span<const Triple> edges);

struct TransitivitySets {
    std::vector<Triple> s1; // relation instances in the original test split
    std::vector<Triple> s2; // shortest r-path length exactly 2, not in any split
    std::vector<Triple> s3; // shortest r-path length >= 3, not in any split
};

// Path lengths are measured in the union train+valid+test r-subgraph.
TransitivitySets build_transitivity_testsets(const TripleStore& store, RelationId r);

// Disjoint chains over fresh entities under one transitive relation.
// train = chain edges plus keep_fraction of the derived closure edges,
// test = the remaining closure edges, valid = empty. Deterministic per seed.
TripleStore generate_synthetic(int n_chains, int chain_length, double keep_fraction,
                               std::uint64_t seed);

// Countries-style benchmark generator (locatedIn/neighborOf world with 5
// regions, 23 subregions, 243 countries; 24 valid + 24 test countries whose
// locatedIn-region facts are held out). task selects how much support is
// removed from train: 1 = region facts only, 2 = also the held-out countries'
// subregion facts, 3 = also the region facts of their neighbor countries.
TripleStore generate_countries(std::uint64_t seed, int task);

void write_triples_tsv(const std::filesystem::path& file, std::span<const Triple> triples,
                       const TripleStore& store);

// Writes train.txt/valid.txt/test.txt into dir (created if needed).
void write_store(const TripleStore& store, const std::filesystem::path& dir);

} // namespace rotpro
