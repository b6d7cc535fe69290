// rotpro: train / eval / generate / analyze for the Rot-Pro embedding engine.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rotpro/config.hpp"
#include "rotpro/dataset.hpp"
#include "rotpro/errors.hpp"
#include "rotpro/eval.hpp"
#include "rotpro/model.hpp"
#include "rotpro/rng.hpp"
#include "rotpro/training.hpp"
#include "rotpro/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a_file(const fs::path& file, std::uint64_t h) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return h;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const auto n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

std::string dataset_hash(const fs::path& dir) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* base : {"train", "valid", "test"}) {
        for (const char* ext : {".txt", ".tsv"}) {
            const auto p = dir / (std::string(base) + ext);
            if (fs::exists(p)) {
                h = fnv1a_file(p, h);
                break;
            }
        }
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        out.push_back(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

rotpro::TripleStore ingest_verbose(const fs::path& dir) {
    std::vector<std::string> warnings;
    auto store = rotpro::TripleStore::ingest(dir, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "dataset " << dir.string() << ": " << store.n_entities() << " entities, "
              << store.n_relations() << " relations, " << store.train.size() << " train, "
              << store.valid.size() << " valid, " << store.test.size() << " test\n";
    return store;
}

// Per-hyperparameter overrides share their spelling with the config file
// keys; precedence is defaults < preset < config file < flag.
struct ConfigCli {
    std::string preset;
    std::string config_file;
    std::string from_manifest;
    std::map<std::string, std::string> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "hyperparameter preset")
            ->check(CLI::IsMember(rotpro::preset_names()));
        cmd->add_option("--config", config_file, "key = value config file");
        cmd->add_option("--from-manifest", from_manifest,
                        "re-run with the resolved config of a previous run manifest");
        for (const auto& key : rotpro::config_keys()) {
            std::string flag = "--" + key;
            for (auto& c : flag)
                if (c == '_') c = '-';
            overrides[key] = {};
            cmd->add_option(flag, overrides[key], "override config key " + key);
        }
    }

    rotpro::TrainConfig resolve() const {
        rotpro::TrainConfig cfg;
        if (!from_manifest.empty()) {
            std::ifstream in(from_manifest);
            if (!in) throw rotpro::IoError("cannot open manifest: " + from_manifest);
            json m = json::parse(in);
            cfg = rotpro::config_from_json(m.at("config"));
        }
        if (!preset.empty()) rotpro::apply_preset(cfg, preset);
        if (!config_file.empty()) rotpro::load_config_file(cfg, config_file);
        for (const auto& [key, value] : overrides)
            if (!value.empty()) rotpro::set_key(cfg, key, value);
        cfg.validate();
        return cfg;
    }
};

void write_report_csv(std::ostream& out, const std::string& tag,
                      const rotpro::RankingReport& rep, std::optional<double> auc,
                      bool header) {
    if (header) {
        out << "set,n_queries,mr,mrr,hits1,hits3,hits10";
        if (auc) out << ",auc_pr";
        out << "\n";
    }
    out << tag << ',' << rep.n_queries << ',' << fmt_double(rep.mr) << ',' << fmt_double(rep.mrr)
        << ',' << fmt_double(rep.hits1) << ',' << fmt_double(rep.hits3) << ','
        << fmt_double(rep.hits10);
    if (auc) out << ',' << fmt_double(*auc);
    out << "\n";
}

void print_report(const std::string& tag, const rotpro::RankingReport& rep) {
    std::printf("%-14s queries=%-6llu MR=%-9.2f MRR=%-7.4f Hit@1=%-7.4f Hit@3=%-7.4f Hit@10=%.4f\n",
                tag.c_str(), static_cast<unsigned long long>(rep.n_queries), rep.mr, rep.mrr,
                rep.hits1, rep.hits3, rep.hits10);
}

rotpro::RelationId resolve_relation(const rotpro::Model& model, const std::string& name) {
    for (std::size_t i = 0; i < model.relation_names.size(); ++i)
        if (model.relation_names[i] == name) return static_cast<rotpro::RelationId>(i);
    throw rotpro::InputError("unknown relation name: '" + name + "'");
}

rotpro::EntityId resolve_entity(const rotpro::Model& model, const std::string& name) {
    for (std::size_t i = 0; i < model.entity_names.size(); ++i)
        if (model.entity_names[i] == name) return static_cast<rotpro::EntityId>(i);
    throw rotpro::InputError("unknown entity name: '" + name + "'");
}

// ---------------------------------------------------------------- train ----

int cmd_train(const ConfigCli& ccli, const std::string& data_dir, const std::string& out_dir,
              int threads) {
    const auto cfg = ccli.resolve();
    const fs::path out(out_dir);
    fs::create_directories(out);

    auto store = ingest_verbose(data_dir);

    json manifest;
    manifest["code_version"] = rotpro::kVersion;
    manifest["command"] = "train";
    manifest["dataset"] = {{"path", fs::path(data_dir).string()}, {"hash", dataset_hash(data_dir)}};
    manifest["seed"] = cfg.seed;
    manifest["threads"] = threads;
    manifest["config"] = rotpro::config_to_json(cfg);
    manifest["outputs"] = {{"checkpoint", (out / "checkpoint.rpc").string()},
                           {"trace", (out / "trace.csv").string()},
                           {"manifest", (out / "manifest.json").string()}};
    manifest["started_at"] = iso_now();
    manifest["finished_at"] = nullptr;
    {
        std::ofstream mf(out / "manifest.json");
        mf << manifest.dump(2) << "\n";
        if (!mf) throw rotpro::IoError("cannot write manifest");
    }

    rotpro::Rng init_rng(rotpro::derive_seed(cfg.seed, 0x494e4954ULL)); // "INIT"
    auto model = rotpro::init_parameters(cfg, static_cast<std::int64_t>(store.n_entities()),
                                         static_cast<std::int64_t>(store.n_relations()), init_rng);
    model.entity_names = store.entities.names();
    model.relation_names = store.relations.names();

    std::ofstream trace(out / "trace.csv");
    trace << "step,loss_main,loss_penalty,loss_total,valid_mrr\n";

    rotpro::Trainer trainer(model, store, cfg, threads);
    rotpro::Trainer::ValidationFn validate;
    if (cfg.valid_every > 0 && !store.valid.empty()) {
        validate = [&]() {
            rotpro::EvalOptions opts;
            opts.threads = threads;
            return rotpro::evaluate_filtered(model, store, rotpro::Split::Valid, opts).mrr;
        };
    }
    trainer.train(
        [&](const rotpro::TraceRow& row) {
            trace << row.step << ',' << fmt_double(row.loss_main) << ','
                  << fmt_double(row.loss_penalty) << ',' << fmt_double(row.loss_total) << ',';
            if (row.valid_mrr) trace << fmt_double(*row.valid_mrr);
            trace << "\n";
            trace.flush();
            std::printf("step %-8lld L_s=%-10.5f L_p=%-10.5f L=%-10.5f",
                        static_cast<long long>(row.step), row.loss_main, row.loss_penalty,
                        row.loss_total);
            if (row.valid_mrr) std::printf(" valid MRR=%.4f", *row.valid_mrr);
            std::printf("\n");
            std::fflush(stdout);
        },
        validate);

    rotpro::save_checkpoint(model, out / "checkpoint.rpc", rotpro::config_to_json(cfg));
    manifest["finished_at"] = iso_now();
    {
        std::ofstream mf(out / "manifest.json");
        mf << manifest.dump(2) << "\n";
        if (!mf) throw rotpro::IoError("cannot write manifest");
    }
    std::cout << "checkpoint written to " << (out / "checkpoint.rpc").string() << "\n";
    return 0;
}

// ----------------------------------------------------------------- eval ----

int cmd_eval(const std::string& checkpoint, const std::string& data_dir, const std::string& split,
             const std::string& transitivity_rel, bool auc, const std::string& regions_arg,
             const std::string& out_dir, bool per_relation, int threads) {
    json ckpt_manifest;
    const auto model = rotpro::load_checkpoint(checkpoint, &ckpt_manifest);
    auto raw_store = ingest_verbose(data_dir);
    const auto store = rotpro::remap_store(raw_store, model);

    const fs::path out(out_dir);
    fs::create_directories(out);
    rotpro::EvalOptions opts;
    opts.per_relation = per_relation;
    opts.threads = threads;

    if (!transitivity_rel.empty()) {
        const auto rel = resolve_relation(model, transitivity_rel);
        const auto sets = rotpro::build_transitivity_testsets(store, rel);
        std::ofstream csv(out / "transitivity_metrics.csv");
        bool header = true;
        for (const auto& [tag, triples] :
             {std::pair{"S1", &sets.s1}, std::pair{"S2", &sets.s2}, std::pair{"S3", &sets.s3}}) {
            if (triples->empty()) {
                std::cout << tag << ": empty set, skipped\n";
                continue;
            }
            const auto rep = rotpro::evaluate_filtered(model, store, *triples, opts);
            print_report(tag, rep);
            write_report_csv(csv, tag, rep, std::nullopt, header);
            header = false;
        }
        if (!csv) throw rotpro::IoError("cannot write transitivity_metrics.csv");
        std::cout << "report written to " << (out / "transitivity_metrics.csv").string() << "\n";
        return 0;
    }

    rotpro::Split which = rotpro::Split::Test;
    if (split == "valid") which = rotpro::Split::Valid;
    else if (split == "train") which = rotpro::Split::Train;
    else if (split != "test") throw rotpro::InputError("unknown split: " + split);

    const auto& triples = store.split(which);
    const auto rep = rotpro::evaluate_filtered(model, store, triples, opts);
    std::optional<double> auc_value;
    if (auc) {
        std::vector<rotpro::EntityId> regions;
        if (!regions_arg.empty()) {
            for (const auto& name : split_csv(regions_arg))
                regions.push_back(resolve_entity(model, name));
        } else {
            // Default candidate set: the distinct tail entities of the split.
            std::vector<char> seen(model.n_entities(), 0);
            for (const auto& tr : triples)
                if (!seen[tr.t]) {
                    seen[tr.t] = 1;
                    regions.push_back(tr.t);
                }
        }
        auc_value = rotpro::auc_pr_countries(model, store, regions, triples);
    }

    print_report(split, rep);
    if (auc_value) std::printf("AUC-PR: %.4f\n", *auc_value);
    if (per_relation)
        for (const auto& [rel, sub] : rep.per_relation)
            print_report("  " + model.relation_names[rel], sub);

    std::ofstream csv(out / "metrics.csv");
    write_report_csv(csv, split, rep, auc_value, true);
    if (per_relation)
        for (const auto& [rel, sub] : rep.per_relation)
            write_report_csv(csv, model.relation_names[rel], sub, std::nullopt, false);
    if (!csv) throw rotpro::IoError("cannot write metrics.csv");
    std::cout << "report written to " << (out / "metrics.csv").string() << "\n";
    return 0;
}

// ------------------------------------------------------------- generate ----

int cmd_generate_chains(int chains, int length, double keep, std::uint64_t seed,
                        const std::string& out_dir) {
    const auto store = rotpro::generate_synthetic(chains, length, keep, seed);
    const fs::path out(out_dir);
    rotpro::write_store(store, out);
    json manifest{{"code_version", rotpro::kVersion},
                  {"kind", "synthetic-chains"},
                  {"chains", chains},
                  {"length", length},
                  {"keep_fraction", keep},
                  {"seed", seed},
                  {"entities", store.n_entities()},
                  {"relations", store.n_relations()},
                  {"train", store.train.size()},
                  {"valid", store.valid.size()},
                  {"test", store.test.size()}};
    std::ofstream mf(out / "manifest.json");
    mf << manifest.dump(2) << "\n";
    if (!mf) throw rotpro::IoError("cannot write manifest");
    std::cout << "synthetic dataset written to " << out.string() << " (" << store.train.size()
              << " train, " << store.test.size() << " test)\n";
    return 0;
}

int cmd_generate_countries(const std::string& task, std::uint64_t seed,
                           const std::string& out_dir) {
    int task_num = 0;
    if (task == "s1") task_num = 1;
    else if (task == "s2") task_num = 2;
    else if (task == "s3") task_num = 3;
    else throw rotpro::InputError("countries task must be s1, s2 or s3");
    const auto store = rotpro::generate_countries(seed, task_num);
    const fs::path out(out_dir);
    rotpro::write_store(store, out);
    json manifest{{"code_version", rotpro::kVersion},
                  {"kind", "countries"},
                  {"task", task},
                  {"seed", seed},
                  {"entities", store.n_entities()},
                  {"relations", store.n_relations()},
                  {"train", store.train.size()},
                  {"valid", store.valid.size()},
                  {"test", store.test.size()}};
    std::ofstream mf(out / "manifest.json");
    mf << manifest.dump(2) << "\n";
    if (!mf) throw rotpro::IoError("cannot write manifest");
    std::cout << "countries dataset written to " << out.string() << "\n";
    return 0;
}

int cmd_generate_transitivity(const std::string& data_dir, const std::string& relation,
                              const std::string& out_dir) {
    const auto store = ingest_verbose(data_dir);
    const fs::path out(out_dir);
    fs::create_directories(out);

    rotpro::TransitivitySets sets;
    const auto rel = store.relations.find(relation);
    if (!rel) {
        std::cerr << "warning: relation '" << relation
                  << "' not present in the dataset; writing empty sets\n";
    } else {
        sets = rotpro::build_transitivity_testsets(store, *rel);
        if (sets.s1.empty() && sets.s2.empty() && sets.s3.empty())
            std::cerr << "warning: relation '" << relation << "' produced empty S1/S2/S3 sets\n";
    }
    rotpro::write_triples_tsv(out / "s1.txt", sets.s1, store);
    rotpro::write_triples_tsv(out / "s2.txt", sets.s2, store);
    rotpro::write_triples_tsv(out / "s3.txt", sets.s3, store);
    json manifest{{"code_version", rotpro::kVersion},
                  {"kind", "transitivity-sets"},
                  {"dataset", fs::path(data_dir).string()},
                  {"dataset_hash", dataset_hash(data_dir)},
                  {"relation", relation},
                  {"s1", sets.s1.size()},
                  {"s2", sets.s2.size()},
                  {"s3", sets.s3.size()}};
    std::ofstream mf(out / "manifest.json");
    mf << manifest.dump(2) << "\n";
    if (!mf) throw rotpro::IoError("cannot write manifest");
    std::cout << "S1=" << sets.s1.size() << " S2=" << sets.s2.size() << " S3=" << sets.s3.size()
              << " written to " << out.string() << "\n";
    return 0;
}

// -------------------------------------------------------------- analyze ----

int cmd_analyze_phases(const std::string& checkpoint, const std::string& relation, int bins,
                       double tolerance, const std::string& out_file) {
    const auto model = rotpro::load_checkpoint(checkpoint);
    std::optional<rotpro::RelationId> rel;
    if (!relation.empty()) rel = resolve_relation(model, relation);
    const auto hist = rotpro::phase_histogram(model.relations, rel, tolerance, bins);
    std::ofstream out(out_file);
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        out << fmt_double(hist.edges[i]) << ',' << fmt_double(hist.edges[i + 1]) << ','
            << hist.counts[i] << "\n";
    if (!out) throw rotpro::IoError("cannot write " + out_file);
    std::cout << "non-trivial projection dimensions: " << hist.total() << "; histogram written to "
              << out_file << "\n";
    return 0;
}

std::vector<rotpro::EntityId> resolve_chain(const rotpro::Model& model, const std::string& arg) {
    std::vector<rotpro::EntityId> chain;
    for (const auto& name : split_csv(arg)) chain.push_back(resolve_entity(model, name));
    return chain;
}

int cmd_analyze_collinearity(const std::string& checkpoint, const std::string& relation,
                             const std::string& chain_arg, const std::string& out_file) {
    const auto model = rotpro::load_checkpoint(checkpoint);
    const auto rel = resolve_relation(model, relation);
    const auto chain = resolve_chain(model, chain_arg);
    const auto residuals = rotpro::collinearity_residuals(model, chain, rel);
    std::ofstream out(out_file);
    out << "dim,residual\n";
    for (std::size_t k = 0; k < residuals.size(); ++k)
        out << k << ',' << fmt_double(residuals[k]) << "\n";
    if (!out) throw rotpro::IoError("cannot write " + out_file);
    double median;
    {
        auto sorted = residuals;
        std::sort(sorted.begin(), sorted.end());
        median = sorted[sorted.size() / 2];
    }
    std::cout << "median per-dimension residual: " << median << "; written to " << out_file
              << "\n";
    return 0;
}

int cmd_analyze_sweep(const std::string& checkpoint, const std::string& relation,
                      const std::string& chain_arg, int grid, double gamma,
                      const std::string& out_file) {
    json manifest;
    const auto model = rotpro::load_checkpoint(checkpoint, &manifest);
    const auto rel = resolve_relation(model, relation);
    const auto chain = resolve_chain(model, chain_arg);
    if (chain.size() < 2) throw rotpro::InputError("chain needs at least 2 entities");
    std::vector<rotpro::Triple> triples;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
        triples.push_back({chain[i], rel, chain[i + 1]});
    if (gamma <= 0 && manifest.contains("config") && manifest["config"].contains("gamma"))
        gamma = manifest["config"]["gamma"].get<double>();
    if (gamma <= 0) gamma = 6.0;
    const auto rows =
        rotpro::loss_phase_sweep(model, triples, rotpro::default_phase_grid(grid), gamma);
    std::ofstream out(out_file);
    out << "phase,loss\n";
    for (const auto& [phase, loss] : rows)
        out << fmt_double(phase) << ',' << fmt_double(loss) << "\n";
    if (!out) throw rotpro::IoError("cannot write " + out_file);
    std::cout << rows.size() << " sweep rows written to " << out_file << "\n";
    return 0;
}

int cmd_analyze_slice(const std::string& checkpoint, const std::string& relation,
                      const std::string& entities_arg, std::int64_t dim_k,
                      const std::string& out_file) {
    const auto model = rotpro::load_checkpoint(checkpoint);
    const auto rel = resolve_relation(model, relation);
    const auto ids = resolve_chain(model, entities_arg);
    const auto rows = rotpro::export_embedding_slice(model, ids, dim_k, rel);
    std::ofstream out(out_file);
    out << "entity,x,y,proj_x,proj_y,theta_p\n";
    for (const auto& row : rows)
        out << model.entity_names[row.entity] << ',' << fmt_double(row.x) << ','
            << fmt_double(row.y) << ',' << fmt_double(row.px) << ',' << fmt_double(row.py) << ','
            << fmt_double(row.theta_p) << "\n";
    if (!out) throw rotpro::IoError("cannot write " + out_file);
    std::cout << rows.size() << " slice rows written to " << out_file << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rot-Pro knowledge graph embedding engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rotpro::kVersion);

    // train
    auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
    ConfigCli ccli;
    std::string data_dir, out_dir = "run";
    int threads = 1;
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--threads", threads, "worker threads for batch forward/backward");
    ccli.attach(train);

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string ev_ckpt, ev_data, ev_split = "test", ev_trans, ev_regions, ev_out = "eval";
    bool ev_auc = false, ev_per_rel = false;
    int ev_threads = 1;
    eval->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
    eval->add_option("--data", ev_data, "dataset directory")->required();
    eval->add_option("--split", ev_split, "split to evaluate (train|valid|test)");
    eval->add_option("--transitivity", ev_trans,
                     "evaluate S1/S2/S3 transitivity sets of this relation instead of a split");
    eval->add_flag("--auc-pr", ev_auc, "also report AUC-PR over a candidate tail set");
    eval->add_option("--regions", ev_regions, "comma-separated AUC-PR candidate tails");
    eval->add_option("--out", ev_out, "output directory");
    eval->add_flag("--per-relation", ev_per_rel, "per-relation metric breakdown");
    eval->add_option("--threads", ev_threads, "evaluation threads");

    // generate
    auto* gen = app.add_subcommand("generate", "generate datasets and test sets");
    gen->require_subcommand(1);
    auto* gchains = gen->add_subcommand("synthetic-chains", "disjoint transitive chains");
    int gc_chains = 1, gc_length = 4;
    double gc_keep = 0.0;
    std::uint64_t gc_seed = 0;
    std::string gc_out = "synthetic";
    gchains->add_option("--chains", gc_chains, "number of chains");
    gchains->add_option("--length", gc_length, "entities per chain (>= 3)");
    gchains->add_option("--keep", gc_keep, "fraction of derived closure edges kept in train");
    gchains->add_option("--seed", gc_seed, "generator seed");
    gchains->add_option("--out", gc_out, "output directory")->required();

    auto* gtrans = gen->add_subcommand("transitivity-sets", "S1/S2/S3 sets for one relation");
    std::string gt_data, gt_rel, gt_out = "transitivity";
    gtrans->add_option("--data", gt_data, "dataset directory")->required();
    gtrans->add_option("--relation", gt_rel, "relation name")->required();
    gtrans->add_option("--out", gt_out, "output directory")->required();

    auto* gcountries = gen->add_subcommand("countries", "countries-style benchmark world");
    std::string gco_task = "s1", gco_out = "countries";
    std::uint64_t gco_seed = 0;
    gcountries->add_option("--task", gco_task, "s1|s2|s3");
    gcountries->add_option("--seed", gco_seed, "generator seed");
    gcountries->add_option("--out", gco_out, "output directory")->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "diagnostics from a checkpoint");
    analyze->require_subcommand(1);
    auto* aphases = analyze->add_subcommand("phases", "rotation-phase histogram");
    std::string ap_ckpt, ap_rel, ap_out = "phases.csv";
    int ap_bins = 36;
    double ap_tol = 0.1;
    aphases->add_option("--checkpoint", ap_ckpt)->required();
    aphases->add_option("--relation", ap_rel, "restrict to one relation (default: all)");
    aphases->add_option("--bins", ap_bins, "histogram bins over [0, 2pi)");
    aphases->add_option("--tolerance", ap_tol, "non-trivial projection tolerance");
    aphases->add_option("--out", ap_out, "output CSV");

    auto* acol = analyze->add_subcommand("collinearity", "per-dimension line residuals");
    std::string ac_ckpt, ac_rel, ac_chain, ac_out = "collinearity.csv";
    acol->add_option("--checkpoint", ac_ckpt)->required();
    acol->add_option("--relation", ac_rel)->required();
    acol->add_option("--chain", ac_chain, "comma-separated chain entity names")->required();
    acol->add_option("--out", ac_out, "output CSV");

    auto* asweep = analyze->add_subcommand("loss-sweep", "positive loss vs shared rotation phase");
    std::string as_ckpt, as_rel, as_chain, as_out = "sweep.csv";
    int as_grid = 64;
    double as_gamma = 0.0;
    asweep->add_option("--checkpoint", as_ckpt)->required();
    asweep->add_option("--relation", as_rel)->required();
    asweep->add_option("--chain", as_chain, "comma-separated chain entity names")->required();
    asweep->add_option("--grid", as_grid, "number of interior grid points over (0, 2pi)");
    asweep->add_option("--gamma", as_gamma, "margin (default: checkpoint config echo)");
    asweep->add_option("--out", as_out, "output CSV");

    auto* aslice = analyze->add_subcommand("slice", "raw vs projected coordinates of one dim");
    std::string asl_ckpt, asl_rel, asl_entities, asl_out = "slice.csv";
    std::int64_t asl_dim = 0;
    aslice->add_option("--checkpoint", asl_ckpt)->required();
    aslice->add_option("--relation", asl_rel)->required();
    aslice->add_option("--entities", asl_entities, "comma-separated entity names")->required();
    aslice->add_option("--dim", asl_dim, "dimension index");
    aslice->add_option("--out", asl_out, "output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(ccli, data_dir, out_dir, threads);
        if (eval->parsed())
            return cmd_eval(ev_ckpt, ev_data, ev_split, ev_trans, ev_auc, ev_regions, ev_out,
                            ev_per_rel, ev_threads);
        if (gen->parsed()) {
            if (gchains->parsed()) return cmd_generate_chains(gc_chains, gc_length, gc_keep,
                                                              gc_seed, gc_out);
            if (gtrans->parsed()) return cmd_generate_transitivity(gt_data, gt_rel, gt_out);
            if (gcountries->parsed()) return cmd_generate_countries(gco_task, gco_seed, gco_out);
        }
        if (analyze->parsed()) {
            if (aphases->parsed())
                return cmd_analyze_phases(ap_ckpt, ap_rel, ap_bins, ap_tol, ap_out);
            if (acol->parsed())
                return cmd_analyze_collinearity(ac_ckpt, ac_rel, ac_chain, ac_out);
            if (asweep->parsed())
                return cmd_analyze_sweep(as_ckpt, as_rel, as_chain, as_grid, as_gamma, as_out);
            if (aslice->parsed())
                return cmd_analyze_slice(asl_ckpt, asl_rel, asl_entities, asl_dim, asl_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
