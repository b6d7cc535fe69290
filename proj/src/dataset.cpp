#include "rotpro/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rotpro/errors.hpp"
#include "rotpro/rng.hpp"

namespace rotpro {

std::int32_t Vocab::get_or_add(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<std::int32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
}

std::optional<std::int32_t> Vocab::find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocab::name(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= names_.size())
        throw InputError("vocab id out of range: " + std::to_string(id));
    return names_[id];
}

std::uint64_t Vocab::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& s : names_) {
        for (unsigned char c : s) mix(c);
        mix('\x1f');
    }
    return h;
}

const char* TripleStore::split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Valid: return "valid";
        case Split::Test: return "test";
    }
    return "?";
}

const std::vector<Triple>& TripleStore::split(Split s) const {
    switch (s) {
        case Split::Valid: return valid;
        case Split::Test: return test;
        default: return train;
    }
}

std::uint64_t TripleStore::pack(EntityId h, RelationId r, EntityId t) {
    // 24 bits per entity, 16 per relation; checked at ingest/rebuild time.
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(h)) << 40) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 16) |
           static_cast<std::uint64_t>(static_cast<std::uint16_t>(r));
}

void TripleStore::rebuild_index() {
    if (entities.size() >= (1u << 24) || relations.size() >= (1u << 16))
        throw InputError("store too large for the packed known-true index");
    known_.clear();
    known_.reserve(train.size() + valid.size() + test.size());
    for (const auto* split : {&train, &valid, &test})
        for (const auto& tr : *split) known_.insert(pack(tr.h, tr.r, tr.t));
}

bool TripleStore::is_known_true(EntityId h, RelationId r, EntityId t) const {
    return known_.contains(pack(h, r, t));
}

std::vector<Triple> TripleStore::relation_edges(RelationId r) const {
    std::vector<Triple> out;
    for (const auto* split : {&train, &valid, &test})
        for (const auto& tr : *split)
            if (tr.r == r) out.push_back(tr);
    return out;
}

namespace {

std::filesystem::path find_split_file(const std::filesystem::path& dir, const char* base) {
    for (const char* ext : {".txt", ".tsv"}) {
        auto p = dir / (std::string(base) + ext);
        if (std::filesystem::exists(p)) return p;
    }
    return {};
}

void parse_split(const std::filesystem::path& file, Split which, TripleStore& store,
                 std::vector<std::string>& warnings) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());

    auto& out = const_cast<std::vector<Triple>&>(store.split(which));
    std::unordered_set<std::uint64_t> seen;
    std::size_t dups = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos ||
            line.find('\t', tab2 + 1) != std::string::npos || tab1 == 0 || tab2 == tab1 + 1 ||
            tab2 + 1 == line.size()) {
            throw InputError(file.string() + ":" + std::to_string(lineno) +
                             ": malformed triple line (expected head<TAB>relation<TAB>tail)");
        }
        Triple tr;
        tr.h = store.entities.get_or_add(std::string_view(line).substr(0, tab1));
        tr.r = store.relations.get_or_add(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1));
        tr.t = store.entities.get_or_add(std::string_view(line).substr(tab2 + 1));
        const std::uint64_t key = (static_cast<std::uint64_t>(tr.h) << 40) |
                                  (static_cast<std::uint64_t>(tr.t) << 16) |
                                  static_cast<std::uint64_t>(tr.r);
        if (!seen.insert(key).second) {
            ++dups;
            continue;
        }
        out.push_back(tr);
    }
    if (dups > 0)
        warnings.push_back(std::string(TripleStore::split_name(which)) + ": dropped " +
                           std::to_string(dups) + " duplicate triples");
}

} // namespace

TripleStore TripleStore::ingest(const std::filesystem::path& dir,
                                std::vector<std::string>* warnings_out) {
    if (!std::filesystem::is_directory(dir))
        throw IoError("dataset directory not found: " + dir.string());

    TripleStore store;
    std::vector<std::string> warnings;

    const auto train_file = find_split_file(dir, "train");
    if (train_file.empty()) throw IoError("no train.txt/train.tsv in " + dir.string());
    parse_split(train_file, Split::Train, store, warnings);
    if (store.train.empty()) throw InputError("empty train split in " + train_file.string());

    // Entities first seen in valid/test stay in the vocabulary but can only
    // rank poorly; flag them.
    const auto train_entities = store.entities.size();
    for (auto [which, base] : {std::pair{Split::Valid, "valid"}, std::pair{Split::Test, "test"}}) {
        const auto file = find_split_file(dir, base);
        if (file.empty()) {
            warnings.push_back(std::string(base) + " split file missing; treated as empty");
            continue;
        }
        parse_split(file, which, store, warnings);
        if (store.split(which).empty())
            warnings.push_back(std::string(base) + " split is empty");
    }
    if (store.entities.size() > train_entities) {
        std::size_t fresh = store.entities.size() - train_entities;
        warnings.push_back(std::to_string(fresh) +
                           " valid/test entities never appear in train (kept; they will rank poorly),"
                           " first: " +
                           store.entities.name(static_cast<std::int32_t>(train_entities)));
    }

    store.rebuild_index();
    if (warnings_out) *warnings_out = std::move(warnings);
    return store;
}

bool chain_is_valid(const TripleStore& store, const TransitiveChain& chain) {
    if (chain.entities.size() < 2) return false;
    std::unordered_set<EntityId> seen(chain.entities.begin(), chain.entities.end());
    if (seen.size() != chain.entities.size()) return false;
    for (std::size_t i = 0; i + 1 < chain.entities.size(); ++i)
        if (!store.is_known_true(chain.entities[i], chain.relation, chain.entities[i + 1]))
            return false;
    return true;
}

namespace {

// Adjacency over the compacted vertex set of `edges`.
struct RelGraph {
    std::vector<EntityId> vertices; // sorted unique
    std::vector<std::vector<std::int32_t>> adj;
    RelationId relation{0};

    explicit RelGraph(std::span<const Triple> edges) {
        if (!edges.empty()) relation = edges.front().r;
        vertices.reserve(edges.size() * 2);
        for (const auto& e : edges) {
            vertices.push_back(e.h);
            vertices.push_back(e.t);
        }
        std::sort(vertices.begin(), vertices.end());
        vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
        adj.resize(vertices.size());
        for (const auto& e : edges) adj[index(e.h)].push_back(index(e.t));
    }

    std::int32_t index(EntityId v) const {
        return static_cast<std::int32_t>(
            std::lower_bound(vertices.begin(), vertices.end(), v) - vertices.begin());
    }

    // BFS depths from source (local index); -1 = unreachable.
    std::vector<std::int32_t> bfs(std::int32_t src) const {
        std::vector<std::int32_t> depth(vertices.size(), -1);
        std::deque<std::int32_t> queue{src};
        depth[src] = 0;
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (auto v : adj[u])
                if (depth[v] < 0) {
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
        }
        return depth;
    }
};

} // namespace

std::vector<Triple> transitive_closure(std::span<const Triple> edges) {
    std::vector<Triple> out;
    if (edges.empty()) return out;
    RelGraph g(edges);
    for (std::int32_t s = 0; s < static_cast<std::int32_t>(g.vertices.size()); ++s) {
        const auto depth = g.bfs(s);
        for (std::int32_t v = 0; v < static_cast<std::int32_t>(g.vertices.size()); ++v)
            if (depth[v] > 0 && v != s)
                out.push_back({g.vertices[s], g.relation, g.vertices[v]});
    }
    return out;
}

TransitivitySets build_transitivity_testsets(const TripleStore& store, RelationId r) {
    if (r < 0 || static_cast<std::size_t>(r) >= store.n_relations())
        throw InputError("relation id out of range: " + std::to_string(r));
    TransitivitySets sets;
    for (const auto& tr : store.test)
        if (tr.r == r) sets.s1.push_back(tr);

    const auto edges = store.relation_edges(r);
    if (edges.empty()) return sets;
    RelGraph g(edges);
    for (std::int32_t s = 0; s < static_cast<std::int32_t>(g.vertices.size()); ++s) {
        const auto depth = g.bfs(s);
        for (std::int32_t v = 0; v < static_cast<std::int32_t>(g.vertices.size()); ++v) {
            if (v == s || depth[v] < 2) continue;
            Triple tr{g.vertices[s], r, g.vertices[v]};
            if (store.is_known_true(tr)) continue;
            (depth[v] == 2 ? sets.s2 : sets.s3).push_back(tr);
        }
    }
    return sets;
}

TripleStore generate_synthetic(int n_chains, int chain_length, double keep_fraction,
                               std::uint64_t seed) {
    if (chain_length < 3) throw InputError("chain length must be >= 3");
    if (n_chains < 1) throw InputError("need at least one chain");
    if (keep_fraction < 0.0 || keep_fraction > 1.0)
        throw InputError("keep fraction must be in [0, 1]");

    TripleStore store;
    const RelationId rel = store.relations.get_or_add("rel");
    Rng rng(derive_seed(seed, 0x53594e54ULL)); // "SYNT"

    for (int c = 0; c < n_chains; ++c) {
        std::vector<EntityId> ids(chain_length);
        for (int j = 0; j < chain_length; ++j) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "c%03d_e%02d", c, j);
            ids[j] = store.entities.get_or_add(buf);
        }
        std::vector<Triple> chain_edges;
        for (int j = 0; j + 1 < chain_length; ++j) {
            store.train.push_back({ids[j], rel, ids[j + 1]});
            chain_edges.push_back(store.train.back());
        }
        // Derived closure edges: path length >= 2.
        std::vector<Triple> derived;
        for (int i = 0; i < chain_length; ++i)
            for (int j = i + 2; j < chain_length; ++j) derived.push_back({ids[i], rel, ids[j]});
        // Seeded shuffle, keep the first floor(keep * |derived|) in train.
        for (std::size_t i = derived.size(); i > 1; --i)
            std::swap(derived[i - 1], derived[rng.uniform_int(i)]);
        const auto n_keep = static_cast<std::size_t>(keep_fraction * derived.size());
        for (std::size_t i = 0; i < derived.size(); ++i)
            (i < n_keep ? store.train : store.test).push_back(derived[i]);
    }
    store.rebuild_index();
    return store;
}

namespace {

const char* kRegions[5] = {"africa", "americas", "asia", "europe", "oceania"};

} // namespace

TripleStore generate_countries(std::uint64_t seed, int task) {
    if (task < 1 || task > 3) throw InputError("countries task must be 1, 2 or 3");

    constexpr int kNumSub = 23;
    constexpr int kNumCountries = 243;
    constexpr int kHeldOut = 48; // 24 valid + 24 test
    const int sub_per_region[5] = {5, 5, 5, 4, 4};

    TripleStore store;
    Rng rng(derive_seed(seed, 0x434f554eULL)); // "COUN"

    const RelationId located_in = store.relations.get_or_add("locatedIn");
    const RelationId neighbor_of = store.relations.get_or_add("neighborOf");

    // Vocab ids: countries first, then subregions, then regions.
    std::vector<EntityId> countries(kNumCountries);
    for (int i = 0; i < kNumCountries; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "country_%03d", i);
        countries[i] = store.entities.get_or_add(buf);
    }
    std::vector<EntityId> subregions(kNumSub);
    std::vector<int> sub_region(kNumSub); // region index per subregion
    {
        int s = 0;
        for (int rgn = 0; rgn < 5; ++rgn)
            for (int j = 0; j < sub_per_region[rgn]; ++j, ++s) {
                char buf[48];
                std::snprintf(buf, sizeof buf, "%s_sub_%d", kRegions[rgn], j);
                subregions[s] = store.entities.get_or_add(buf);
                sub_region[s] = rgn;
            }
    }
    std::vector<EntityId> regions(5);
    for (int rgn = 0; rgn < 5; ++rgn) regions[rgn] = store.entities.get_or_add(kRegions[rgn]);

    // Countries per subregion: 243 = 13 * 11 + 10 * 10.
    std::vector<int> country_sub(kNumCountries);
    std::vector<std::vector<int>> sub_members(kNumSub);
    {
        std::vector<int> order(kNumCountries);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);
        int pos = 0;
        for (int s = 0; s < kNumSub; ++s) {
            const int size = s < 13 ? 11 : 10;
            for (int j = 0; j < size; ++j) {
                country_sub[order[pos]] = s;
                sub_members[s].push_back(order[pos]);
                ++pos;
            }
        }
    }

    // neighborOf pairs: a ring within each subregion, one chord in the larger
    // subregions, and three same-region bridges per region. Stored in both
    // directions (the relation is symmetric).
    std::vector<std::pair<int, int>> neighbor_pairs;
    auto add_pair = [&neighbor_pairs](int a, int b) {
        if (a == b) return;
        if (a > b) std::swap(a, b);
        if (std::find(neighbor_pairs.begin(), neighbor_pairs.end(), std::pair{a, b}) ==
            neighbor_pairs.end())
            neighbor_pairs.emplace_back(a, b);
    };
    for (int s = 0; s < kNumSub; ++s) {
        auto& mem = sub_members[s];
        for (std::size_t i = mem.size(); i > 1; --i)
            std::swap(mem[i - 1], mem[rng.uniform_int(i)]);
        for (std::size_t i = 0; i < mem.size(); ++i)
            add_pair(mem[i], mem[(i + 1) % mem.size()]);
        if (mem.size() >= 8)
            add_pair(mem[rng.uniform_int(mem.size())], mem[rng.uniform_int(mem.size())]);
    }
    for (int rgn = 0; rgn < 5; ++rgn) {
        std::vector<int> subs;
        for (int s = 0; s < kNumSub; ++s)
            if (sub_region[s] == rgn) subs.push_back(s);
        for (int k = 0; k < 3; ++k) {
            const int s1 = subs[rng.uniform_int(subs.size())];
            int s2 = subs[rng.uniform_int(subs.size())];
            while (s2 == s1) s2 = subs[rng.uniform_int(subs.size())];
            add_pair(sub_members[s1][rng.uniform_int(sub_members[s1].size())],
                     sub_members[s2][rng.uniform_int(sub_members[s2].size())]);
        }
    }
    std::vector<std::vector<int>> neighbors(kNumCountries);
    for (auto [a, b] : neighbor_pairs) {
        neighbors[a].push_back(b);
        neighbors[b].push_back(a);
    }

    // Held-out countries, round-robin over regions so every region shows up
    // in both the valid and test tails. Invariant: every held-out country
    // keeps at least one non-held-out neighbor (its inference path for the
    // harder tasks), enforced via free-neighbor counts.
    std::vector<char> held(kNumCountries, 0);
    std::vector<int> held_list;
    {
        std::vector<int> free_count(kNumCountries);
        for (int c = 0; c < kNumCountries; ++c)
            free_count[c] = static_cast<int>(neighbors[c].size());
        std::vector<std::vector<int>> by_region(5);
        std::vector<int> order(kNumCountries);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);
        for (int c : order) by_region[sub_region[country_sub[c]]].push_back(c);
        std::vector<std::size_t> cursor(5, 0);
        int rgn = 0;
        int stalled_rounds = 0;
        while (static_cast<int>(held_list.size()) < kHeldOut) {
            auto& bucket = by_region[rgn];
            bool placed = false;
            while (cursor[rgn] < bucket.size()) {
                const int c = bucket[cursor[rgn]++];
                if (free_count[c] < 1) continue;
                const bool starves_neighbor =
                    std::any_of(neighbors[c].begin(), neighbors[c].end(),
                                [&](int n) { return held[n] && free_count[n] < 2; });
                if (starves_neighbor) continue;
                held[c] = 1;
                for (int n : neighbors[c]) --free_count[n];
                held_list.push_back(c);
                placed = true;
                break;
            }
            rgn = (rgn + 1) % 5;
            stalled_rounds = placed ? 0 : stalled_rounds + 1;
            if (stalled_rounds >= 5)
                throw Error("countries generator could not place the held-out set");
        }
    }

    // locatedIn facts.
    auto region_of = [&](int c) { return regions[sub_region[country_sub[c]]]; };
    std::vector<char> neighbor_of_held(kNumCountries, 0);
    for (int c : held_list)
        for (int n : neighbors[c]) neighbor_of_held[n] = 1;

    for (int c = 0; c < kNumCountries; ++c) {
        const bool drop_sub = task >= 2 && held[c];
        const bool drop_region = held[c] || (task >= 3 && neighbor_of_held[c]);
        if (!drop_sub)
            store.train.push_back({countries[c], located_in, subregions[country_sub[c]]});
        if (!drop_region) store.train.push_back({countries[c], located_in, region_of(c)});
    }
    for (int s = 0; s < kNumSub; ++s)
        store.train.push_back({subregions[s], located_in, regions[sub_region[s]]});
    for (auto [a, b] : neighbor_pairs) {
        store.train.push_back({countries[a], neighbor_of, countries[b]});
        store.train.push_back({countries[b], neighbor_of, countries[a]});
    }
    for (std::size_t i = 0; i < held_list.size(); ++i) {
        const int c = held_list[i];
        auto& split = i % 2 == 0 ? store.valid : store.test;
        split.push_back({countries[c], located_in, region_of(c)});
    }

    store.rebuild_index();
    return store;
}

void write_triples_tsv(const std::filesystem::path& file, std::span<const Triple> triples,
                       const TripleStore& store) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    for (const auto& tr : triples)
        out << store.entities.name(tr.h) << '\t' << store.relations.name(tr.r) << '\t'
            << store.entities.name(tr.t) << '\n';
    if (!out) throw IoError("write failed: " + file.string());
}

void write_store(const TripleStore& store, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_triples_tsv(dir / "train.txt", store.train, store);
    write_triples_tsv(dir / "valid.txt", store.valid, store);
    write_triples_tsv(dir / "test.txt", store.test, store);
}

} // namespace rotpro
