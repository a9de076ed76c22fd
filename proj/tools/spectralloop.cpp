// spectralloop: command-line front end for the spectral_loop library.

#include "spectral_loop/equivalence.hpp"
#include "spectral_loop/errors.hpp"
#include "spectral_loop/examples.hpp"
#include "spectral_loop/path_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

using namespace sloop;

namespace {

struct RunConfig {
    std::string command;
    std::string input, other;
    std::string example;
    int window = 4;
    int depth = 6;
    bool repair = false;
    bool conjugate = false;
    int grid = 0;
    int n = 3;
    double threshold = 1e-3;
    std::string out = ".";
    unsigned long seed = 1;
};

std::filesystem::path out_file(const RunConfig& cfg, const char* name) {
    std::filesystem::create_directories(cfg.out);
    return std::filesystem::path(cfg.out) / name;
}

OperatorPath load_primary(const RunConfig& cfg) {
    if (!cfg.example.empty()) {
        const int G = cfg.grid > 0 ? cfg.grid : 512;
        if (cfg.example == "shift-loop") return evaluate_generator(example_shift_loop(cfg.window), G);
        if (cfg.example == "halving-cascade") return evaluate_generator(example_halving_cascade(cfg.depth, cfg.repair), G);
        throw Error(ErrorKind::Usage, "unknown example '" + cfg.example + "'");
    }
    if (cfg.input.empty()) throw Error(ErrorKind::Usage, "give --input or --example");
    return build_path(read_document(cfg.input), cfg.grid);
}

Mat random_unitary(int dim, unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    Mat z(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) z(i, j) = cplx(N(rng), N(rng));
    Eigen::HouseholderQR<Mat> qr(z);
    Mat q = qr.householderQ();
    // fix the phases of R's diagonal so the draw is Haar
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < dim; ++k) q.col(k) *= r(k, k) / std::abs(r(k, k));
    return q;
}

OperatorPath load_second(const RunConfig& cfg, const OperatorPath& a) {
    if (!cfg.other.empty()) return build_path(read_document(cfg.other), cfg.grid);
    if (!cfg.conjugate) throw Error(ErrorKind::Usage, "give --other FILE or --conjugate");
    Mat v = random_unitary(a.dim(), cfg.seed);
    std::vector<Mat> mats;
    for (int g = 0; g <= a.grid_size; ++g) mats.push_back(v * a.at(g) * v.adjoint());
    return make_path(std::move(mats), a.is_loop, a.tail_bound);
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

int cmd_validate(const RunConfig& cfg, json& rep) {
    OperatorPath p = load_primary(cfg);
    double worst = 0.0;
    for (const auto& s : p.samples) worst = std::max(worst, s.normality_residual);
    double gap = 0.0;
    for (double d : p.gaps) gap = std::max(gap, d);
    rep["dim"] = p.dim();
    rep["grid"] = p.grid_size;
    rep["max_normality_residual"] = worst;
    rep["loop"] = p.is_loop;
    rep["closure"] = op_norm(p.at(0) - p.at(p.grid_size));
    rep["tail_bound"] = p.tail_bound;
    rep["max_norm"] = p.max_norm();
    rep["max_gap"] = gap;
    rep["status"] = "pass";
    return 0;
}

int cmd_braid(const RunConfig& cfg, json& rep) {
    OperatorPath p = load_primary(cfg);
    EigenBraid br = trace_braid(p, cfg.threshold);
    {
        std::ofstream csv(out_file(cfg, "braid.csv"));
        write_braid_csv(csv, br);
    }
    rep["threshold"] = cfg.threshold;
    rep["grid"] = br.grid_size;
    rep["tracks"] = br.tracks.size();
    json tracks = json::array();
    for (size_t t = 0; t < br.tracks.size(); ++t) {
        const Track& tr = br.tracks[t];
        tracks.push_back({{"id", t},
                          {"birth", tr.birth},
                          {"last", tr.last()},
                          {"died", tr.died},
                          {"start", cplx_json(tr.values.front())},
                          {"end", cplx_json(tr.values.back())}});
    }
    rep["track_list"] = tracks;
    if (p.is_loop && br.full_tracks().size() == br.tracks.size()) {
        auto sigma = monodromy(br);
        rep["monodromy"] = sigma;
        rep["monodromy_cycles"] = cycles(sigma);
    }
    return 0;
}

int cmd_cond1(const RunConfig& cfg, json& rep) {
    OperatorPath p = load_primary(cfg);
    EigenBraid br = trace_braid(p, cfg.threshold);
    Condition1Report c = check_condition1(br, p);
    rep["satisfied"] = c.satisfied;
    json fails = json::array();
    for (const auto& f : c.failures)
        fails.push_back({{"track", f.track},
                         {"grid_index", f.grid_index},
                         {"x", p.x(f.grid_index)},
                         {"end", f.end},
                         {"reason", f.reason},
                         {"limit_zero", f.limit_zero}});
    rep["failures"] = fails;
    return c.satisfied ? 0 : exit_code(ErrorKind::Condition1Missing);
}

int cmd_equivalence(const RunConfig& cfg, json& rep) {
    OperatorPath a = load_primary(cfg);
    OperatorPath b = load_second(cfg, a);
    PipelineResult r = run_equivalence(a, b, cfg.n, cfg.threshold);
    const auto& R = r.result.report;
    const auto& P = r.result.path;
    {
        std::ofstream csv(out_file(cfg, "residuals.csv"));
        write_residuals_csv(csv, R.residuals);
    }
    rep["n"] = R.n;
    rep["s_n"] = R.s_n;
    rep["m_n"] = R.m_n;
    rep["alpha"] = r.plan.alpha;
    rep["moved_pairs"] = r.plan.moved.size();
    rep["approximant_deviation"] = {r.an_report.max_deviation, r.bn_report.max_deviation};
    rep["approximant_bound"] = r.an_report.bound;
    rep["max_chart_distance"] = r.max_chart_distance;
    rep["lift_intertwining"] = r.lift.max_intertwining;
    json phases = json::array();
    for (cplx z : r.lift.closure_phases) phases.push_back(cplx_json(z));
    rep["closure_phases"] = phases;
    rep["truncation"] = {{"measured", r.truncation.measured}, {"targets", r.truncation.targets}, {"slack", r.truncation.slack}};
    rep["block_rank"] = P.block_rank;
    rep["max_residual"] = R.max_residual;
    rep["target"] = P.target;
    rep["unitarity"] = P.max_unitarity;
    rep["closure"] = P.closure;
    rep["success"] = R.success;
    return R.success ? 0 : exit_code(ErrorKind::BoundViolated);
}

int cmd_strong(const RunConfig& cfg, json& rep) {
    OperatorPath a = load_primary(cfg);
    OperatorPath b = load_second(cfg, a);
    StrongLift s = strong_lift_path(a, b, cfg.threshold);
    double unit = 0.0;
    for (const auto& u : s.u) unit = std::max(unit, unitarity_defect(u));
    const double tol = std::max(1e-7, 10.0 * tol_rel()) + a.tail_bound + b.tail_bound;
    rep["max_residual"] = s.max_residual;
    rep["unitarity"] = unit;
    rep["tolerance"] = tol;
    rep["success"] = s.max_residual <= tol;
    return s.max_residual <= tol ? 0 : exit_code(ErrorKind::BoundViolated);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral analysis and approximate unitary equivalence of normal operator loops"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "path file (JSON)");
        sub->add_option("--example", cfg.example, "builtin: shift-loop or halving-cascade");
        sub->add_option("--window", cfg.window, "shift-loop window half-width k")->check(CLI::PositiveNumber);
        sub->add_option("--depth", cfg.depth, "halving-cascade depth k")->check(CLI::PositiveNumber);
        sub->add_flag("--repair", cfg.repair, "halving-cascade with continuous rescaling segments");
        sub->add_option("--grid", cfg.grid, "grid size G for generators")->check(CLI::Range(2, 1 << 22));
        sub->add_option("--threshold", cfg.threshold, "frame threshold")->check(CLI::PositiveNumber);
        sub->add_option("--out", cfg.out, "output directory");
    };
    auto add_pair = [&](CLI::App* sub) {
        sub->add_option("--other", cfg.other, "second path file");
        sub->add_flag("--conjugate", cfg.conjugate, "second path = V A V* for a seeded random unitary V");
        sub->add_option("--seed", cfg.seed, "seed for --conjugate");
    };

    auto* validate = app.add_subcommand("validate", "check normality, closure and tail bound");
    auto* braid = app.add_subcommand("braid", "trace eigenvalue tracks; writes braid.csv");
    auto* cond1 = app.add_subcommand("cond1", "check that every eigenvalue continues over the whole path");
    auto* equiv = app.add_subcommand("equivalence", "certify approximate unitary equivalence of two loops");
    auto* strong = app.add_subcommand("strong", "lift a pointwise equivalence of two paths");
    for (auto* s : {validate, braid, cond1, equiv, strong}) add_common(s);
    for (auto* s : {equiv, strong}) add_pair(s);
    equiv->add_option("--n", cfg.n, "approximation index n")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code(ErrorKind::Usage);
    }
    cfg.command = app.get_subcommands().front()->get_name();

    json rep;
    rep["command"] = cfg.command;
    int rc = 0;
    try {
        if (cfg.command == "validate") rc = cmd_validate(cfg, rep);
        else if (cfg.command == "braid") rc = cmd_braid(cfg, rep);
        else if (cfg.command == "cond1") rc = cmd_cond1(cfg, rep);
        else if (cfg.command == "equivalence") rc = cmd_equivalence(cfg, rep);
        else rc = cmd_strong(cfg, rep);
    } catch (const Error& e) {
        rep["error"] = {{"kind", kind_name(e.kind())}, {"message", e.what()}};
        if (e.index()) rep["error"]["index"] = *e.index();
        if (e.value()) rep["error"]["value"] = *e.value();
        rc = exit_code(e.kind());
        std::cerr << "spectralloop: " << kind_name(e.kind()) << ": " << e.what() << '\n';
    } catch (const std::exception& e) {
        rep["error"] = {{"kind", "Internal"}, {"message", e.what()}};
        rc = 13;
        std::cerr << "spectralloop: " << e.what() << '\n';
    }
    rep["exit_code"] = rc;
    try {
        write_json(out_file(cfg, "report.json").string(), rep);
    } catch (const std::exception& e) {
        std::cerr << "spectralloop: " << e.what() << '\n';
    }
    std::cout << rep.dump(2) << '\n';
    return rc;
}
