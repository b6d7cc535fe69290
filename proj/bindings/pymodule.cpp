// Python bindings for the main operations: geometry primitives, dataset
// handling, scoring, training, evaluation and the analysis diagnostics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include <nlohmann/json.hpp>

#include "rotpro/config.hpp"
#include "rotpro/dataset.hpp"
#include "rotpro/errors.hpp"
#include "rotpro/eval.hpp"
#include "rotpro/geometry.hpp"
#include "rotpro/model.hpp"
#include "rotpro/rng.hpp"
#include "rotpro/training.hpp"
#include "rotpro/version.hpp"

namespace py = pybind11;
using namespace rotpro;

namespace {

std::vector<std::tuple<EntityId, RelationId, EntityId>> to_tuples(const std::vector<Triple>& ts) {
    std::vector<std::tuple<EntityId, RelationId, EntityId>> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.emplace_back(t.h, t.r, t.t);
    return out;
}

std::vector<Triple> from_tuples(const std::vector<std::tuple<EntityId, RelationId, EntityId>>& ts) {
    std::vector<Triple> out;
    out.reserve(ts.size());
    for (const auto& [h, r, t] : ts) out.push_back({h, r, t});
    return out;
}

py::dict report_to_dict(const RankingReport& rep) {
    py::dict d;
    d["mr"] = rep.mr;
    d["mrr"] = rep.mrr;
    d["hits1"] = rep.hits1;
    d["hits3"] = rep.hits3;
    d["hits10"] = rep.hits10;
    d["n_queries"] = rep.n_queries;
    return d;
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "valid") return Split::Valid;
    if (s == "test") return Split::Test;
    throw InputError("unknown split: " + s);
}

} // namespace

PYBIND11_MODULE(_rotpro, m) {
    m.doc() = "Rot-Pro knowledge graph embedding engine";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "RotproError");

    // geometry
    m.def(
        "rotate",
        [](double x, double y, double theta) {
            const auto p = rotate({x, y}, theta);
            return std::pair{p.x, p.y};
        },
        py::arg("x"), py::arg("y"), py::arg("theta"));
    m.def(
        "project",
        [](double x, double y, double a, double b, double theta_p) {
            const auto p = project({x, y}, {a, b, theta_p});
            return std::pair{p.x, p.y};
        },
        py::arg("x"), py::arg("y"), py::arg("a"), py::arg("b"), py::arg("theta_p"));
    m.def(
        "projection_matrix",
        [](double a, double b, double theta_p) {
            const auto mat = projection_matrix({a, b, theta_p});
            return std::pair{std::pair{mat.m00, mat.m01}, std::pair{mat.m10, mat.m11}};
        },
        py::arg("a"), py::arg("b"), py::arg("theta_p"));

    // dataset
    py::class_<TripleStore>(m, "TripleStore")
        .def_static("ingest", [](const std::filesystem::path& dir) {
            return TripleStore::ingest(dir);
        })
        .def_property_readonly("n_entities", &TripleStore::n_entities)
        .def_property_readonly("n_relations", &TripleStore::n_relations)
        .def("entity_name", [](const TripleStore& s, EntityId id) { return s.entities.name(id); })
        .def("relation_name",
             [](const TripleStore& s, RelationId id) { return s.relations.name(id); })
        .def("entity_id",
             [](const TripleStore& s, const std::string& name) { return s.entities.find(name); })
        .def("relation_id",
             [](const TripleStore& s, const std::string& name) { return s.relations.find(name); })
        .def("triples",
             [](const TripleStore& s, const std::string& split) {
                 return to_tuples(s.split(split_from_string(split)));
             },
             py::arg("split") = "train")
        .def("is_known_true",
             [](const TripleStore& s, EntityId h, RelationId r, EntityId t) {
                 return s.is_known_true(h, r, t);
             })
        .def("transitive_closure",
             [](const TripleStore& s, RelationId r) {
                 return to_tuples(transitive_closure(s.relation_edges(r)));
             })
        .def("transitivity_testsets",
             [](const TripleStore& s, RelationId r) {
                 const auto sets = build_transitivity_testsets(s, r);
                 return py::make_tuple(to_tuples(sets.s1), to_tuples(sets.s2), to_tuples(sets.s3));
             })
        .def("write", [](const TripleStore& s, const std::filesystem::path& dir) {
            write_store(s, dir);
        });
    m.def("generate_synthetic", &generate_synthetic, py::arg("chains"), py::arg("length"),
          py::arg("keep_fraction"), py::arg("seed"));
    m.def("generate_countries", &generate_countries, py::arg("seed"), py::arg("task"));

    // config
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def("set", [](TrainConfig& c, const std::string& k, const std::string& v) {
            set_key(c, k, v);
        })
        .def("preset", [](TrainConfig& c, const std::string& name) { apply_preset(c, name); })
        .def("validate", &TrainConfig::validate)
        .def_readwrite("dim", &TrainConfig::dim)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("gamma", &TrainConfig::gamma)
        .def_readwrite("alpha", &TrainConfig::alpha)
        .def_readwrite("gamma_m", &TrainConfig::gamma_m)
        .def_readwrite("beta", &TrainConfig::beta)
        .def_readwrite("negatives", &TrainConfig::negatives)
        .def_readwrite("adv_temperature", &TrainConfig::adv_temperature)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("max_steps", &TrainConfig::max_steps)
        .def_readwrite("entity_init_range", &TrainConfig::entity_init_range)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("valid_every", &TrainConfig::valid_every)
        .def("__repr__", [](const TrainConfig& c) {
            return "<TrainConfig " + config_to_json(c).dump() + ">";
        });
    m.def("preset_names", [] { return preset_names(); });

    // model
    py::class_<Model>(m, "Model")
        .def_property_readonly("dim", &Model::dim)
        .def_property_readonly("n_entities", &Model::n_entities)
        .def_property_readonly("n_relations", &Model::n_relations)
        .def_property_readonly("kind", [](const Model& mo) { return to_string(mo.kind); })
        .def_property_readonly("norm", [](const Model& mo) { return to_string(mo.norm); })
        .def("score", &Model::score, py::arg("h"), py::arg("r"), py::arg("t"))
        .def("distance", &Model::distance, py::arg("h"), py::arg("r"), py::arg("t"))
        .def("score_batch",
             [](const Model& mo, const std::vector<EntityId>& hs,
                const std::vector<RelationId>& rs, const std::vector<EntityId>& ts) {
                 return mo.score_batch(hs, rs, ts);
             })
        .def("score_all_tails", &Model::score_all_tails, py::arg("h"), py::arg("r"))
        .def("score_all_heads", &Model::score_all_heads, py::arg("t"), py::arg("r"))
        .def("save", [](const Model& mo, const std::filesystem::path& path) {
            save_checkpoint(mo, path, nlohmann::json::object());
        })
        .def_static("load", [](const std::filesystem::path& path) {
            return load_checkpoint(path);
        });

    // training
    m.def(
        "train",
        [](const TripleStore& store, const TrainConfig& cfg, int threads, bool verbose) {
            Rng init_rng(derive_seed(cfg.seed, 0x494e4954ULL));
            Model model = init_parameters(cfg, static_cast<std::int64_t>(store.n_entities()),
                                          static_cast<std::int64_t>(store.n_relations()),
                                          init_rng);
            model.entity_names = store.entities.names();
            model.relation_names = store.relations.names();
            Trainer trainer(model, store, cfg, threads);
            trainer.train([&](const TraceRow& row) {
                if (verbose)
                    py::print("step", row.step, "loss", row.loss_total);
            });
            return model;
        },
        py::arg("store"), py::arg("config"), py::arg("threads") = 1, py::arg("verbose") = false);

    // evaluation and diagnostics
    m.def(
        "evaluate_filtered",
        [](const Model& model, const TripleStore& store, const std::string& split, int threads) {
            EvalOptions opts;
            opts.threads = threads;
            return report_to_dict(
                evaluate_filtered(model, store, split_from_string(split), opts));
        },
        py::arg("model"), py::arg("store"), py::arg("split") = "test", py::arg("threads") = 1);
    m.def(
        "evaluate_triples",
        [](const Model& model, const TripleStore& store,
           const std::vector<std::tuple<EntityId, RelationId, EntityId>>& triples, int threads) {
            EvalOptions opts;
            opts.threads = threads;
            return report_to_dict(evaluate_filtered(model, store, from_tuples(triples), opts));
        },
        py::arg("model"), py::arg("store"), py::arg("triples"), py::arg("threads") = 1);
    m.def("auc_pr", [](const std::vector<std::pair<double, int>>& scored) {
        return auc_pr(scored);
    });
    m.def(
        "auc_pr_countries",
        [](const Model& model, const TripleStore& store, const std::vector<EntityId>& regions) {
            return auc_pr_countries(model, store, regions, store.test);
        },
        py::arg("model"), py::arg("store"), py::arg("regions"));
    m.def(
        "phase_histogram",
        [](const Model& model, std::optional<RelationId> relation, double tolerance, int bins) {
            const auto hist = phase_histogram(model.relations, relation, tolerance, bins);
            return std::pair{hist.edges, hist.counts};
        },
        py::arg("model"), py::arg("relation") = std::nullopt, py::arg("tolerance") = 0.1,
        py::arg("bins") = 36);
    m.def(
        "collinearity_residuals",
        [](const Model& model, const std::vector<EntityId>& chain, RelationId relation) {
            return collinearity_residuals(model, chain, relation);
        },
        py::arg("model"), py::arg("chain"), py::arg("relation"));
    m.def(
        "loss_phase_sweep",
        [](const Model& model, const std::vector<std::tuple<EntityId, RelationId, EntityId>>& ts,
           int grid, double gamma) {
            return loss_phase_sweep(model, from_tuples(ts), default_phase_grid(grid), gamma);
        },
        py::arg("model"), py::arg("triples"), py::arg("grid") = 64, py::arg("gamma") = 6.0);
}
