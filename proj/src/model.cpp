#include "rotpro/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rotpro/errors.hpp"
#include "rotpro/version.hpp"

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts are unsupported");

namespace rotpro {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::RotPro: return "rotpro";
        case ModelKind::RotatE: return "rotate";
        case ModelKind::TransE: return "transe";
    }
    return "?";
}

const char* to_string(NormKind k) {
    return k == NormKind::SumModulus ? "modulus" : "sum-squares";
}

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "rotpro") return ModelKind::RotPro;
    if (s == "rotate") return ModelKind::RotatE;
    if (s == "transe") return ModelKind::TransE;
    throw InputError("unknown model kind: " + std::string(s) +
                     " (expected rotpro|rotate|transe)");
}

NormKind norm_kind_from_string(std::string_view s) {
    if (s == "modulus") return NormKind::SumModulus;
    if (s == "sum-squares") return NormKind::SumSquares;
    throw InputError("unknown norm: " + std::string(s) + " (expected modulus|sum-squares)");
}

void EntityTable::resize(std::int64_t n_, std::int64_t dim_) {
    n = n_;
    dim = dim_;
    re.assign(static_cast<std::size_t>(n) * dim, 0.0);
    im.assign(static_cast<std::size_t>(n) * dim, 0.0);
}

void RelationTable::resize(std::int64_t n_, std::int64_t dim_) {
    n = n_;
    dim = dim_;
    const auto sz = static_cast<std::size_t>(n) * dim;
    theta_r.assign(sz, 0.0);
    theta_p.assign(sz, 0.0);
    a.assign(sz, 1.0);
    b.assign(sz, 1.0);
}

Model::Model(ModelKind kind_, NormKind norm_, std::int64_t n_entities, std::int64_t n_relations,
             std::int64_t dim_)
    : kind(kind_), norm(norm_) {
    entities.resize(n_entities, dim_);
    relations.resize(n_relations, dim_);
}

void Model::check_entity(EntityId id) const {
    if (id < 0 || id >= entities.n)
        throw InputError("entity id out of range: " + std::to_string(id));
}

void Model::check_relation(RelationId id) const {
    if (id < 0 || id >= relations.n)
        throw InputError("relation id out of range: " + std::to_string(id));
}

RelationTransform Model::build_transform(RelationId r) const {
    check_relation(r);
    RelationTransform tf;
    const auto d = dim();
    tf.dim = d;
    tf.m00.resize(d);
    tf.m01.resize(d);
    tf.m11.resize(d);
    tf.cr.resize(d);
    tf.sr.resize(d);
    const double* th_r = relations.theta_r_row(r);
    const double* th_p = relations.theta_p_row(r);
    const double* a = relations.a_row(r);
    const double* b = relations.b_row(r);

    if (kind == ModelKind::TransE) {
        // theta planes hold the translation; no trig, no projection.
        tf.identity_projection = true;
        for (std::int64_t k = 0; k < d; ++k) {
            tf.cr[k] = th_r[k]; // translation, real part
            tf.sr[k] = th_p[k]; // translation, imaginary part
            tf.m00[k] = 1.0;
            tf.m01[k] = 0.0;
            tf.m11[k] = 1.0;
        }
        return tf;
    }

    if (kind == ModelKind::RotatE) {
        // a, b frozen at 1: the projection is the identity by definition.
        for (std::int64_t k = 0; k < d; ++k) {
            tf.cr[k] = std::cos(th_r[k]);
            tf.sr[k] = std::sin(th_r[k]);
            tf.m00[k] = 1.0;
            tf.m01[k] = 0.0;
            tf.m11[k] = 1.0;
        }
        tf.identity_projection = true;
        return tf;
    }

    tf.cp.resize(d);
    tf.sp.resize(d);
    tf.identity_projection = true;
    for (std::int64_t k = 0; k < d; ++k) {
        tf.cr[k] = std::cos(th_r[k]);
        tf.sr[k] = std::sin(th_r[k]);
        const double c = std::cos(th_p[k]);
        const double s = std::sin(th_p[k]);
        tf.cp[k] = c;
        tf.sp[k] = s;
        if (a[k] == 1.0 && b[k] == 1.0) {
            // Exact identity entries; c*c + s*s would be off by an ulp.
            tf.m00[k] = 1.0;
            tf.m01[k] = 0.0;
            tf.m11[k] = 1.0;
        } else {
            tf.identity_projection = false;
            tf.m00[k] = a[k] * c * c + b[k] * s * s;
            tf.m01[k] = (b[k] - a[k]) * s * c;
            tf.m11[k] = a[k] * s * s + b[k] * c * c;
        }
    }
    return tf;
}

double Model::distance_with(const RelationTransform& tf, RelationId, EntityId h, EntityId t) const {
    const auto d = dim();
    const double* hx = entities.re_row(h);
    const double* hy = entities.im_row(h);
    const double* tx = entities.re_row(t);
    const double* ty = entities.im_row(t);
    double total = 0.0;

    if (kind == ModelKind::TransE) {
        for (std::int64_t k = 0; k < d; ++k) {
            const double dx = hx[k] + tf.cr[k] - tx[k];
            const double dy = hy[k] + tf.sr[k] - ty[k];
            total += norm == NormKind::SumModulus ? std::sqrt(dx * dx + dy * dy)
                                                  : dx * dx + dy * dy;
        }
        return total;
    }

    for (std::int64_t k = 0; k < d; ++k) {
        double phx = hx[k], phy = hy[k], ptx = tx[k], pty = ty[k];
        if (!tf.identity_projection) {
            phx = tf.m00[k] * hx[k] + tf.m01[k] * hy[k];
            phy = tf.m01[k] * hx[k] + tf.m11[k] * hy[k];
            ptx = tf.m00[k] * tx[k] + tf.m01[k] * ty[k];
            pty = tf.m01[k] * tx[k] + tf.m11[k] * ty[k];
        }
        const double dx = tf.cr[k] * phx - tf.sr[k] * phy - ptx;
        const double dy = tf.sr[k] * phx + tf.cr[k] * phy - pty;
        total += norm == NormKind::SumModulus ? std::sqrt(dx * dx + dy * dy) : dx * dx + dy * dy;
    }
    return total;
}

double Model::distance(EntityId h, RelationId r, EntityId t) const {
    check_entity(h);
    check_entity(t);
    const auto tf = build_transform(r);
    return distance_with(tf, r, h, t);
}

double Model::score(EntityId h, RelationId r, EntityId t) const {
    return -distance(h, r, t);
}

std::vector<double> Model::score_batch(std::span<const EntityId> hs,
                                       std::span<const RelationId> rs,
                                       std::span<const EntityId> ts) const {
    if (hs.size() != rs.size() || hs.size() != ts.size())
        throw InputError("score_batch: array lengths differ");
    std::vector<double> out(hs.size());
    RelationTransform tf;
    RelationId cached = -1;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        check_entity(hs[i]);
        check_entity(ts[i]);
        if (rs[i] != cached) {
            tf = build_transform(rs[i]);
            cached = rs[i];
        }
        out[i] = -distance_with(tf, rs[i], hs[i], ts[i]);
    }
    return out;
}

std::vector<double> Model::score_all_tails(EntityId h, RelationId r) const {
    check_entity(h);
    const auto tf = build_transform(r);
    const auto d = dim();
    // Hoist the head-side transform rot(p_r(e_h), theta_r) (TransE: h + r).
    std::vector<double> qx(d), qy(d);
    const double* hx = entities.re_row(h);
    const double* hy = entities.im_row(h);
    for (std::int64_t k = 0; k < d; ++k) {
        if (kind == ModelKind::TransE) {
            qx[k] = hx[k] + tf.cr[k];
            qy[k] = hy[k] + tf.sr[k];
        } else {
            const double phx = tf.m00[k] * hx[k] + tf.m01[k] * hy[k];
            const double phy = tf.m01[k] * hx[k] + tf.m11[k] * hy[k];
            qx[k] = tf.cr[k] * phx - tf.sr[k] * phy;
            qy[k] = tf.sr[k] * phx + tf.cr[k] * phy;
        }
    }
    std::vector<double> out(entities.n);
    const bool project = kind != ModelKind::TransE && !tf.identity_projection;
    for (EntityId c = 0; c < entities.n; ++c) {
        const double* tx = entities.re_row(c);
        const double* ty = entities.im_row(c);
        double total = 0.0;
        for (std::int64_t k = 0; k < d; ++k) {
            double ptx = tx[k], pty = ty[k];
            if (project) {
                ptx = tf.m00[k] * tx[k] + tf.m01[k] * ty[k];
                pty = tf.m01[k] * tx[k] + tf.m11[k] * ty[k];
            }
            const double dx = qx[k] - ptx;
            const double dy = qy[k] - pty;
            total +=
                norm == NormKind::SumModulus ? std::sqrt(dx * dx + dy * dy) : dx * dx + dy * dy;
        }
        out[c] = -total;
    }
    return out;
}

std::vector<double> Model::score_all_heads(EntityId t, RelationId r) const {
    check_entity(t);
    const auto tf = build_transform(r);
    const auto d = dim();
    // Hoisted tail side: p_r(e_t) (TransE: t - r).
    std::vector<double> qx(d), qy(d);
    const double* tx = entities.re_row(t);
    const double* ty = entities.im_row(t);
    const bool project = kind != ModelKind::TransE && !tf.identity_projection;
    for (std::int64_t k = 0; k < d; ++k) {
        if (kind == ModelKind::TransE) {
            qx[k] = tx[k] - tf.cr[k];
            qy[k] = ty[k] - tf.sr[k];
        } else if (project) {
            qx[k] = tf.m00[k] * tx[k] + tf.m01[k] * ty[k];
            qy[k] = tf.m01[k] * tx[k] + tf.m11[k] * ty[k];
        } else {
            qx[k] = tx[k];
            qy[k] = ty[k];
        }
    }
    std::vector<double> out(entities.n);
    for (EntityId c = 0; c < entities.n; ++c) {
        const double* hx = entities.re_row(c);
        const double* hy = entities.im_row(c);
        double total = 0.0;
        for (std::int64_t k = 0; k < d; ++k) {
            double dx, dy;
            if (kind == ModelKind::TransE) {
                dx = hx[k] - qx[k];
                dy = hy[k] - qy[k];
            } else {
                double phx = hx[k], phy = hy[k];
                if (project) {
                    phx = tf.m00[k] * hx[k] + tf.m01[k] * hy[k];
                    phy = tf.m01[k] * hx[k] + tf.m11[k] * hy[k];
                }
                dx = tf.cr[k] * phx - tf.sr[k] * phy - qx[k];
                dy = tf.sr[k] * phx + tf.cr[k] * phy - qy[k];
            }
            total +=
                norm == NormKind::SumModulus ? std::sqrt(dx * dx + dy * dy) : dx * dx + dy * dy;
        }
        out[c] = -total;
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'R', 'P', 'C', 'K', 'P', 'T', '0', '1'};

void write_plane_f32(std::ofstream& out, const std::vector<double>& plane) {
    if (plane.empty()) return;
    std::vector<float> buf(plane.size());
    for (std::size_t i = 0; i < plane.size(); ++i) buf[i] = static_cast<float>(plane[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void read_plane_f32(std::ifstream& in, std::vector<double>& plane, std::size_t count) {
    plane.assign(count, 0.0);
    if (count == 0) return;
    std::vector<float> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw IoError("checkpoint truncated while reading parameter planes");
    for (std::size_t i = 0; i < count; ++i) plane[i] = static_cast<double>(buf[i]);
}

char hex_digit(std::uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hex64(std::uint64_t v) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[i] = hex_digit(v);
    return s;
}

} // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& file,
                     const nlohmann::json& config_echo) {
    nlohmann::json manifest;
    manifest["format"] = "rotpro-checkpoint";
    manifest["format_version"] = 1;
    manifest["code_version"] = kVersion;
    manifest["model"] = to_string(model.kind);
    manifest["norm"] = to_string(model.norm);
    manifest["dim"] = model.dim();
    manifest["n_entities"] = model.n_entities();
    manifest["n_relations"] = model.n_relations();
    manifest["plane_order"] = {"entity_re", "entity_im", "theta_r", "theta_p", "a", "b"};
    manifest["entity_names"] = model.entity_names;
    manifest["relation_names"] = model.relation_names;
    {
        Vocab ve, vr;
        for (const auto& n : model.entity_names) ve.get_or_add(n);
        for (const auto& n : model.relation_names) vr.get_or_add(n);
        manifest["entity_vocab_hash"] = hex64(ve.hash());
        manifest["relation_vocab_hash"] = hex64(vr.hash());
    }
    manifest["config"] = config_echo;

    const std::string text = manifest.dump();
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + file.string());
    out.write(kMagic, sizeof kMagic);
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_plane_f32(out, model.entities.re);
    write_plane_f32(out, model.entities.im);
    write_plane_f32(out, model.relations.theta_r);
    write_plane_f32(out, model.relations.theta_p);
    write_plane_f32(out, model.relations.a);
    write_plane_f32(out, model.relations.b);
    if (!out) throw IoError("checkpoint write failed: " + file.string());
}

Model load_checkpoint(const std::filesystem::path& file, nlohmann::json* manifest_out) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + file.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw IoError("not a rotpro checkpoint: " + file.string());
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len > (1ull << 31)) throw IoError("corrupt checkpoint manifest length");
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw IoError("checkpoint truncated while reading manifest");
    nlohmann::json manifest = nlohmann::json::parse(text);

    Model model(model_kind_from_string(manifest.at("model").get<std::string>()),
                norm_kind_from_string(manifest.at("norm").get<std::string>()),
                manifest.at("n_entities").get<std::int64_t>(),
                manifest.at("n_relations").get<std::int64_t>(),
                manifest.at("dim").get<std::int64_t>());
    model.entity_names = manifest.value("entity_names", std::vector<std::string>{});
    model.relation_names = manifest.value("relation_names", std::vector<std::string>{});

    const auto ne = static_cast<std::size_t>(model.n_entities()) * model.dim();
    const auto nr = static_cast<std::size_t>(model.n_relations()) * model.dim();
    read_plane_f32(in, model.entities.re, ne);
    read_plane_f32(in, model.entities.im, ne);
    read_plane_f32(in, model.relations.theta_r, nr);
    read_plane_f32(in, model.relations.theta_p, nr);
    read_plane_f32(in, model.relations.a, nr);
    read_plane_f32(in, model.relations.b, nr);
    if (manifest_out) *manifest_out = std::move(manifest);
    return model;
}

TripleStore remap_store(const TripleStore& store, const Model& model) {
    Vocab ckpt_entities, ckpt_relations;
    for (const auto& n : model.entity_names) ckpt_entities.get_or_add(n);
    for (const auto& n : model.relation_names) ckpt_relations.get_or_add(n);

    std::vector<EntityId> ent_map(store.n_entities());
    for (std::size_t i = 0; i < store.n_entities(); ++i) {
        const auto& name = store.entities.name(static_cast<EntityId>(i));
        const auto id = ckpt_entities.find(name);
        if (!id) throw InputError("vocab mismatch: entity '" + name + "' not in checkpoint");
        ent_map[i] = *id;
    }
    std::vector<RelationId> rel_map(store.n_relations());
    for (std::size_t i = 0; i < store.n_relations(); ++i) {
        const auto& name = store.relations.name(static_cast<RelationId>(i));
        const auto id = ckpt_relations.find(name);
        if (!id) throw InputError("vocab mismatch: relation '" + name + "' not in checkpoint");
        rel_map[i] = *id;
    }

    TripleStore out;
    for (const auto& n : model.entity_names) out.entities.get_or_add(n);
    for (const auto& n : model.relation_names) out.relations.get_or_add(n);
    auto convert = [&](const std::vector<Triple>& src, std::vector<Triple>& dst) {
        dst.reserve(src.size());
        for (const auto& tr : src) dst.push_back({ent_map[tr.h], rel_map[tr.r], ent_map[tr.t]});
    };
    convert(store.train, out.train);
    convert(store.valid, out.valid);
    convert(store.test, out.test);
    out.rebuild_index();
    return out;
}

} // namespace rotpro
