#include "spectral_loop/path_io.hpp"

#include "spectral_loop/errors.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace sloop {

namespace {

Error parse_error(const std::string& what) { return Error(ErrorKind::Parse, "path file: " + what); }

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw parse_error(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw parse_error(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

Expr expr_field(const json& j, const char* key) {
    const json& v = j.contains(key) ? j.at(key) : json();
    if (v.is_string()) return Expr::parse(v.get<std::string>());
    if (v.is_number()) return Expr::constant(cplx(v.get<double>(), 0.0));
    throw parse_error(std::string("field '") + key + "' must be an expression string");
}

} // namespace

GeneratorSpec generator_from_json(const json& j) {
    if (!j.is_object()) throw parse_error("generator must be an object");
    GeneratorSpec g;
    g.dim = field<int>(j, "dim");
    g.tail_bound = field_or<double>(j, "tail_bound", 0.0);
    const json& diag = j.contains("diagonal") ? j.at("diagonal") : json();
    if (!diag.is_array()) throw parse_error("generator needs a 'diagonal' array");
    for (const auto& d : diag) {
        if (d.is_string()) g.initial_diagonal.push_back(Expr::parse(d.get<std::string>()));
        else if (d.is_number()) g.initial_diagonal.push_back(Expr::constant(cplx(d.get<double>(), 0.0)));
        else throw parse_error("diagonal entries must be expression strings");
    }
    if (j.contains("segments")) {
        if (!j.at("segments").is_array()) throw parse_error("'segments' must be an array");
        for (const auto& s : j.at("segments")) {
            Segment seg;
            auto kind = field<std::string>(s, "kind");
            seg.i = field<int>(s, "i");
            seg.j = field<int>(s, "j");
            seg.a = field_or<double>(s, "a", 0.0);
            seg.b = field_or<double>(s, "b", 1.0);
            if (kind == "rotation") {
                seg.kind = Segment::Kind::Rotation;
                seg.angle = expr_field(s, "angle");
            } else if (kind == "diagonal") {
                seg.kind = Segment::Kind::Diagonal;
                seg.scale_i = expr_field(s, "scale_i");
                seg.scale_j = expr_field(s, "scale_j");
            } else {
                throw parse_error("unknown segment kind '" + kind + "'");
            }
            g.segments.push_back(std::move(seg));
        }
    }
    return g;
}

json generator_to_json(const GeneratorSpec& g) {
    json j;
    j["dim"] = g.dim;
    j["tail_bound"] = g.tail_bound;
    j["diagonal"] = json::array();
    for (const auto& e : g.initial_diagonal) j["diagonal"].push_back(e.text());
    j["segments"] = json::array();
    for (const auto& s : g.segments) {
        json o;
        o["i"] = s.i;
        o["j"] = s.j;
        o["a"] = s.a;
        o["b"] = s.b;
        if (s.kind == Segment::Kind::Rotation) {
            o["kind"] = "rotation";
            o["angle"] = s.angle.text();
        } else {
            o["kind"] = "diagonal";
            o["scale_i"] = s.scale_i.text();
            o["scale_j"] = s.scale_j.text();
        }
        j["segments"].push_back(std::move(o));
    }
    return j;
}

PathDocument document_from_json(const json& j) {
    if (!j.is_object()) throw parse_error("top level must be an object");
    PathDocument doc;
    doc.loop = field_or<bool>(j, "loop", false);
    doc.tail_bound = field_or<double>(j, "tail_bound", 0.0);
    if (j.contains("generator")) {
        doc.generator = generator_from_json(j.at("generator"));
        doc.grid = field_or<int>(j, "grid", 512);
        if (!j.contains("tail_bound")) doc.tail_bound = doc.generator->tail_bound;
        return doc;
    }
    const int dim = field<int>(j, "dim");
    doc.grid = field<int>(j, "grid");
    if (dim < 1) throw parse_error("dim must be positive");
    const json& samples = j.contains("samples") ? j.at("samples") : json();
    if (!samples.is_array()) throw parse_error("'samples' must be an array");
    if (static_cast<int>(samples.size()) != doc.grid + 1)
        throw parse_error("expected grid + 1 = " + std::to_string(doc.grid + 1) + " samples, found " +
                          std::to_string(samples.size()));
    for (size_t g = 0; g < samples.size(); ++g) {
        const json& s = samples[g];
        if (!s.is_array() || static_cast<int>(s.size()) != dim * dim)
            throw Error(ErrorKind::Parse, "path file: sample " + std::to_string(g) + " must hold dim*dim entries",
                        static_cast<long>(g));
        Mat m(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                const json& e = s[static_cast<size_t>(r * dim + c)];
                if (e.is_number()) {
                    m(r, c) = cplx(e.get<double>(), 0.0);
                } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                    m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
                } else {
                    throw Error(ErrorKind::Parse, "path file: bad entry in sample " + std::to_string(g),
                                static_cast<long>(g));
                }
            }
        doc.samples.push_back(std::move(m));
    }
    return doc;
}

json document_to_json(const PathDocument& doc) {
    json j;
    j["loop"] = doc.loop;
    j["tail_bound"] = doc.tail_bound;
    j["grid"] = doc.grid;
    if (doc.generator) {
        j["generator"] = generator_to_json(*doc.generator);
        return j;
    }
    const auto dim = doc.samples.empty() ? 0 : doc.samples[0].rows();
    j["dim"] = dim;
    j["samples"] = json::array();
    for (const auto& m : doc.samples) {
        json s = json::array();
        for (Eigen::Index r = 0; r < dim; ++r)
            for (Eigen::Index c = 0; c < dim; ++c) s.push_back({m(r, c).real(), m(r, c).imag()});
        j["samples"].push_back(std::move(s));
    }
    return j;
}

PathDocument read_document(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::Usage, "cannot open " + file);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, file + ": " + e.what(), static_cast<long>(e.byte));
    }
    return document_from_json(j);
}

void write_json(const std::string& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw Error(ErrorKind::Usage, "cannot write " + file);
    // json.hpp prints doubles with max_digits10 (17 significant digits)
    out << j.dump(2) << '\n';
}

OperatorPath build_path(const PathDocument& doc, int grid_override) {
    if (doc.generator) {
        GeneratorSpec g = *doc.generator;
        g.tail_bound = doc.tail_bound;
        OperatorPath p = evaluate_generator(g, grid_override > 0 ? grid_override : doc.grid);
        if (doc.loop && !p.is_loop)
            throw Error(ErrorKind::NotALoop, "generator does not close", std::nullopt, op_norm(p.at(0) - p.at(p.grid_size)));
        return p;
    }
    if (grid_override > 0 && grid_override != doc.grid)
        throw Error(ErrorKind::Usage, "--grid cannot resample a sampled path");
    return make_path(doc.samples, doc.loop, doc.tail_bound);
}

PathDocument document_from_path(const OperatorPath& path) {
    PathDocument doc;
    doc.grid = path.grid_size;
    doc.loop = path.is_loop;
    doc.tail_bound = path.tail_bound;
    for (const auto& s : path.samples) doc.samples.push_back(s.matrix);
    return doc;
}

void write_braid_csv(std::ostream& os, const EigenBraid& braid) {
    os << "x,track,re,im,abs,certified\n";
    os << std::setprecision(17);
    for (size_t t = 0; t < braid.tracks.size(); ++t) {
        const Track& tr = braid.tracks[t];
        for (size_t k = 0; k < tr.values.size(); ++k) {
            int g = tr.birth + static_cast<int>(k);
            // certified refers to the step leaving this point; the last point inherits the previous step
            bool cert = tr.certified.empty() ? true : tr.certified[std::min(k, tr.certified.size() - 1)];
            os << static_cast<double>(g) / braid.grid_size << ',' << t << ',' << tr.values[k].real() << ','
               << tr.values[k].imag() << ',' << std::abs(tr.values[k]) << ',' << (cert ? 1 : 0) << '\n';
        }
    }
}

void write_residuals_csv(std::ostream& os, const std::vector<double>& residuals) {
    os << "x,residual\n";
    os << std::setprecision(17);
    const auto G = residuals.size() > 1 ? residuals.size() - 1 : 1;
    for (size_t g = 0; g < residuals.size(); ++g)
        os << static_cast<double>(g) / static_cast<double>(G) << ',' << residuals[g] << '\n';
}

std::vector<std::vector<int>> cycles(const std::vector<int>& perm) {
    std::vector<std::vector<int>> out;
    std::vector<bool> seen(perm.size(), false);
    for (size_t s = 0; s < perm.size(); ++s) {
        if (seen[s]) continue;
        std::vector<int> c;
        for (int i = static_cast<int>(s); i >= 0 && !seen[static_cast<size_t>(i)]; i = perm[static_cast<size_t>(i)]) {
            seen[static_cast<size_t>(i)] = true;
            c.push_back(i);
        }
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace sloop
