#include "lgv/pipeline.hpp"
#include "lgv/assemble.hpp"
#include "lgv/background.hpp"
#include "lgv/bosonmap.hpp"
#include "lgv/log.hpp"
#include "lgv/profile.hpp"
#include "lgv/spectral.hpp"
#include "lgv/susy.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace fs = std::filesystem;
using nlohmann::json;

namespace lgv {

namespace {

const std::vector<std::string> kAllStages = {"profile", "background", "spectrum",
                                             "index",   "algebra",    "bosonmap"};
constexpr const char* kArtifactVersion = "1.0.0";

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

} // namespace

uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex_of_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot read " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data.data(), data.size())));
    return buf;
}

bool RunConfig::wants(const std::string& stage) const {
    return std::find(pipeline.begin(), pipeline.end(), stage) != pipeline.end();
}

std::string RunConfig::to_json() const {
    json j;
    j["vortex"] = {{"n", vortex.n},
                   {"e", vortex.e},
                   {"v", vortex.v},
                   {"r_max", vortex.r_max},
                   {"m_r", vortex.m_r}};
    j["grid"] = {{"m_xy", m_xy}, {"scheme", scheme == 4 ? "central4" : "central2"}};
    j["spectral"] = {{"k", k}, {"tol_zero", tol_zero}, {"seed", seed}};
    j["pipeline"] = pipeline;
    j["output_dir"] = output_dir;
    j["format_version"] = format_version;
    j["dump_operator"] = dump_operator;
    return j.dump(2);
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& ex) {
        throw ParseError(std::string("config: ") + ex.what());
    }
    std::vector<std::string> bad;
    RunConfig c;
    bool have_e = false, have_v = false, have_rmax = false, have_tol = false;

    auto get_num = [&](const json& o, const char* key, auto& dst, bool& seen) {
        if (!o.contains(key)) return;
        seen = true;
        if (!o[key].is_number()) {
            bad.push_back(std::string(key) + ": expected a number");
            return;
        }
        dst = o[key].get<std::decay_t<decltype(dst)>>();
    };

    static const std::set<std::string> top_keys = {"vortex",     "grid",          "spectral",
                                                   "pipeline",   "output_dir",    "format_version",
                                                   "n",          "e",             "v",
                                                   "dump_operator"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!top_keys.count(it.key())) bad.push_back("unknown key: " + it.key());

    bool dummy = false;
    get_num(j, "n", c.vortex.n, dummy);
    get_num(j, "e", c.vortex.e, have_e);
    get_num(j, "v", c.vortex.v, have_v);

    if (j.contains("vortex")) {
        const json& o = j["vortex"];
        static const std::set<std::string> keys = {"n", "e", "v", "r_max", "m_r"};
        for (auto it = o.begin(); it != o.end(); ++it)
            if (!keys.count(it.key())) bad.push_back("unknown key: vortex." + it.key());
        get_num(o, "n", c.vortex.n, dummy);
        get_num(o, "e", c.vortex.e, have_e);
        get_num(o, "v", c.vortex.v, have_v);
        get_num(o, "r_max", c.vortex.r_max, have_rmax);
        get_num(o, "m_r", c.vortex.m_r, dummy);
    }
    if (j.contains("grid")) {
        const json& o = j["grid"];
        static const std::set<std::string> keys = {"m_xy", "scheme"};
        for (auto it = o.begin(); it != o.end(); ++it)
            if (!keys.count(it.key())) bad.push_back("unknown key: grid." + it.key());
        get_num(o, "m_xy", c.m_xy, dummy);
        if (o.contains("scheme")) {
            std::string s = o["scheme"].is_string() ? o["scheme"].get<std::string>() : "";
            if (s == "central2") c.scheme = 2;
            else if (s == "central4") c.scheme = 4;
            else bad.push_back("grid.scheme: expected \"central2\" or \"central4\"");
        }
    }
    if (j.contains("spectral")) {
        const json& o = j["spectral"];
        static const std::set<std::string> keys = {"k", "tol_zero", "seed"};
        for (auto it = o.begin(); it != o.end(); ++it)
            if (!keys.count(it.key())) bad.push_back("unknown key: spectral." + it.key());
        get_num(o, "k", c.k, dummy);
        get_num(o, "tol_zero", c.tol_zero, have_tol);
        get_num(o, "seed", c.seed, dummy);
    }
    if (j.contains("pipeline")) {
        std::vector<std::string> st;
        if (j["pipeline"].is_string()) st.push_back(j["pipeline"].get<std::string>());
        else if (j["pipeline"].is_array())
            for (const auto& x : j["pipeline"]) st.push_back(x.get<std::string>());
        else bad.push_back("pipeline: expected a string or an array of stage names");
        for (const auto& s : st) {
            if (s == "all") {
                c.pipeline = kAllStages;
            } else if (std::find(kAllStages.begin(), kAllStages.end(), s) != kAllStages.end()) {
                if (!c.wants(s)) c.pipeline.push_back(s);
            } else {
                bad.push_back("pipeline: unknown stage '" + s + "'");
            }
        }
    }
    if (c.pipeline.empty()) c.pipeline = kAllStages;
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("format_version")) c.format_version = j["format_version"].get<int>();
    if (j.contains("dump_operator")) c.dump_operator = j["dump_operator"].get<bool>();

    // defaults that depend on (e, v)
    if (!have_rmax) c.vortex.r_max = 12.0 / (c.vortex.e * c.vortex.v);
    if (!have_tol) c.tol_zero = 1e-3 * c.vortex.e * c.vortex.v;

    // aggregate precondition checks
    if (c.vortex.n < 0) bad.push_back("vortex.n: must be >= 0");
    if (c.vortex.e <= 0) bad.push_back("vortex.e: must be > 0");
    if (c.vortex.v <= 0) bad.push_back("vortex.v: must be > 0");
    if (c.vortex.r_max <= 0) bad.push_back("vortex.r_max: must be > 0");
    if (c.vortex.m_r < 64) bad.push_back("vortex.m_r: must be >= 64");
    if (c.m_xy < 64) bad.push_back("grid.m_xy: must be >= 64");
    if (c.k < 1) bad.push_back("spectral.k: must be >= 1");
    if (c.tol_zero <= 0) bad.push_back("spectral.tol_zero: must be > 0");
    if (c.format_version != 1) bad.push_back("format_version: must be 1");
    if (!bad.empty()) throw ValidationError(bad);
    return c;
}

namespace {

struct FileSink {
    fs::path dir;
    std::vector<FileRecord>* records;
    void add(const std::string& rel) {
        records->push_back({rel, fnv1a64_hex_of_file((dir / rel).string())});
    }
    void write_text(const std::string& rel, const std::string& text) {
        std::ofstream out(dir / rel, std::ios::binary);
        if (!out) throw IOError("cannot write " + (dir / rel).string());
        out << text;
        out.close();
        add(rel);
    }
};

} // namespace

RunManifest run(const RunConfig& config) {
    const auto& P = config.vortex;
    const int n = P.n;
    const double evs = P.scale();

    RunManifest man;
    man.artifact_version = kArtifactVersion;
    man.format_version = config.format_version;
    man.output_dir = config.output_dir;
    {
        std::string cfg = config.to_json();
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(cfg.data(), cfg.size())));
        man.config_hash = buf;
    }

    fs::create_directories(config.output_dir);
    FileSink sink{fs::path(config.output_dir), &man.files};
    sink.write_text("effective_config.json", config.to_json());

    // dependency closure
    std::set<std::string> need;
    auto require = [&](const std::string& s) { need.insert(s); };
    for (const auto& s : config.pipeline) {
        require(s);
        if (s != "profile") require("profile");
        if (s == "spectrum" || s == "index" || s == "algebra" || s == "bosonmap")
            require("background");
        if (s == "index" || s == "bosonmap") require("spectrum");
        if (s == "algebra") require("spectrum");
        if (s == "bosonmap") require("index");
    }
    if (need.count("background")) require("profile");

    json summary;
    summary["vorticity"] = n;
    summary["e"] = P.e;
    summary["v"] = P.v;
    json checks;

    RadialProfile prof;
    Background2D bg;
    SparseOperator D, Dt;
    SpectralReport rm, rp;
    IndexReport idx;

    auto stage = [&](const std::string& name, auto&& body) {
        if (!need.count(name)) {
            man.stages.push_back({name, "skipped", 0.0});
            return;
        }
        double t0 = now_ms();
        try {
            body();
            man.stages.push_back({name, "ok", now_ms() - t0});
        } catch (const NonConvergence& ex) {
            man.stages.push_back({name, std::string("failed: ") + ex.what(), now_ms() - t0});
            throw StageFailure(name, ex.what(), true);
        } catch (const NoConvergence& ex) {
            man.stages.push_back({name, std::string("failed: ") + ex.what(), now_ms() - t0});
            throw StageFailure(name, ex.what(), true);
        } catch (const std::exception& ex) {
            man.stages.push_back({name, std::string("failed: ") + ex.what(), now_ms() - t0});
            throw StageFailure(name, ex.what());
        }
    };

    stage("profile", [&] {
        prof = solve_profile(P, ProfileMethod::shooting);
        summary["profile"] = {{"residual_norm", prof.residual_norm},
                              {"core_coefficient", prof.core_coefficient},
                              {"f_at_rmax", prof.f.back()},
                              {"a_at_rmax", prof.a.back()}};
        checks["profile_residual"] = prof.residual_norm <= 1e-8;
        if (n >= 1) {
            RadialProfile relax = solve_profile(P, ProfileMethod::relaxation);
            double agree = 0.0;
            for (std::size_t i = 0; i < prof.f.size(); ++i) {
                agree = std::max(agree, std::abs(prof.f[i] - relax.f[i]));
                agree = std::max(agree, std::abs(prof.a[i] - relax.a[i]));
            }
            summary["profile"]["solver_agreement"] = agree;
            checks["solver_agreement"] = agree <= 1e-6;
        }
        if (config.wants("profile")) {
            export_profile_csv(prof, (sink.dir / "profile.csv").string());
            sink.add("profile.csv");
        }
    });

    stage("background", [&] {
        bg = sample_background(prof, config.m_xy);
        double F = flux(bg), E = energy(bg);
        int W = boundary_winding(bg);
        summary["background"] = {{"flux", F}, {"energy", E}, {"winding", W}};
        if (n >= 1) {
            double rel = std::abs(F * P.e / (2.0 * M_PI * n) - 1.0);
            double ratio = E / (P.e * P.v * P.v * std::abs(F));
            summary["background"]["flux_rel_err"] = rel;
            summary["background"]["energy_ratio"] = ratio;
            checks["flux_quantization"] = rel < 1e-3;
            checks["energy_saturation"] = ratio >= 0.99 && ratio <= 1.01;
            checks["winding"] = (W == n);
        } else {
            checks["vacuum_flux_zero"] = std::abs(F) < 1e-12;
            checks["vacuum_energy_zero"] = std::abs(E) < 1e-12;
        }
        if (config.wants("background")) {
            export_background_csv(bg, (sink.dir / "background.csv").string());
            sink.add("background.csv");
        }
    });

    stage("spectrum", [&] {
        D = assemble_D(bg, config.scheme);
        Dt = assemble_D_adjoint(bg, config.scheme);
        SparseOperator Db = assemble_D_boson(bg, config.scheme);
        bool equal = D.same_entries(Db);
        summary["operator_equality"] = equal;
        checks["operator_equality"] = equal;

        const int k_use = std::max(config.k, 2 * n + 6);
        TwinReports tw = solve_both_branches(D, k_use, config.tol_zero, config.seed);
        rm = std::move(tw.minus);
        rp = std::move(tw.plus);
        summary["spectrum"] = {{"kernel_count", rm.kernel_count},
                               {"gap_ratio", rm.gap_ratio},
                               {"adjoint_kernel_count", rp.kernel_count},
                               {"adjoint_sigma_min", rp.sigma.empty() ? 0.0 : rp.sigma[0]},
                               {"resolved", rm.resolved && rp.resolved},
                               {"excluded_artifacts_D", rm.excluded.size()},
                               {"excluded_artifacts_adjoint", rp.excluded.size()}};
        checks["kernel_count"] = rm.resolved && rm.kernel_count == 2 * n;
        checks["adjoint_kernel_empty"] =
            rp.resolved && rp.kernel_count == 0 &&
            (!rp.sigma.empty() && rp.sigma[0] >= 0.1 * evs);
        if (config.wants("spectrum")) {
            sink.write_text("spectral_D.json", spectral_report_json(rm));
            sink.write_text("spectral_D_adjoint.json", spectral_report_json(rp));
            for (int m = 0; m < rm.kernel_count && m < 16; ++m) {
                char name[32];
                std::snprintf(name, sizeof name, "mode_%02d.csv", m);
                export_mode_csv(rm, *D.layout, m, (sink.dir / name).string());
                sink.add(name);
            }
            if (config.dump_operator) {
                export_operator(D, (sink.dir / "operator_D.coo").string());
                sink.add("operator_D.coo");
            }
        }
    });

    stage("index", [&] {
        idx = make_index(rm, rp, n);
        summary["index"] = {{"n_minus", idx.n_minus},
                            {"n_plus", idx.n_plus},
                            {"witten_index", idx.witten_index},
                            {"fredholm_index", idx.fredholm_index},
                            {"resolved", idx.resolved},
                            {"sign_note", idx.sign_note}};
        checks["witten_index_magnitude"] =
            idx.resolved && std::abs(idx.witten_index) == 2 * n;
        checks["witten_equals_fredholm"] = idx.witten_index == idx.fredholm_index;
        if (config.wants("index")) sink.write_text("index.json", index_report_json(idx));
    });

    stage("algebra", [&] {
        SusyBlocks blocks(D);
        AlgebraReport alg = verify_algebra(blocks, 100, config.seed);
        SusyStatus st = verify_unbroken(idx);
        summary["algebra"] = {{"anticommutator", alg.anticommutator},
                              {"q_squared", alg.q_squared},
                              {"w_relations",
                               std::max({alg.w_squared, alg.w_q_anticommute,
                                         alg.w_qdag_anticommute, alg.w_h_commute})},
                              {"min_rayleigh", alg.min_rayleigh},
                              {"unbroken", to_string(st)}};
        checks["algebra_structural"] = alg.q_squared == 0.0 && alg.qdag_squared == 0.0 &&
                                       alg.w_squared == 0.0 && alg.w_q_anticommute == 0.0 &&
                                       alg.w_qdag_anticommute == 0.0 && alg.w_h_commute == 0.0;
        checks["algebra_product"] = alg.anticommutator <= 1e-12;
        checks["h_positive"] = alg.min_rayleigh >= -1e-10;
        checks["susy_unbroken"] =
            (n >= 1) ? st == SusyStatus::unbroken : st == SusyStatus::broken;
        if (config.wants("algebra")) sink.write_text("algebra.json", algebra_report_json(alg, st));
    });

    stage("bosonmap", [&] {
        SparseOperator Db = assemble_D_boson(bg, config.scheme);
        const int k_use = std::max(config.k, 2 * n + 6);
        TwinReports tb = solve_both_branches(Db, k_use, config.tol_zero, config.seed,
                                             OperatorTag::D_boson);
        const SpectralReport& rbm = tb.minus;
        IndexReport bidx = make_index(tb.minus, tb.plus, n);

        double max_resid = 0.0;
        json modes = json::array();
        for (int m = 0; m < rm.kernel_count; ++m) {
            FluctuationPair pair = fermion_to_boson(rm.vectors[m], D.layout);
            double res = bosonic_residual(pair, bg, config.scheme) / pair.norm_l2();
            max_resid = std::max(max_resid, res);
            modes.push_back({{"mode", m}, {"relative_residual", res}});
            if (config.wants("bosonmap") && m < 16) {
                char name[32];
                std::snprintf(name, sizeof name, "fluctuation_%02d.csv", m);
                export_fluctuation_csv(pair, (sink.dir / name).string());
                sink.add(name);
            }
        }
        summary["bosonmap"] = {{"max_relative_residual", max_resid},
                               {"boson_kernel_count", rbm.kernel_count},
                               {"boson_witten_index", bidx.witten_index},
                               {"modes", modes}};
        if (n >= 1) {
            checks["bosonic_residual"] = rm.kernel_count > 0 && max_resid <= config.tol_zero;
            checks["boson_kernel_count"] = rbm.resolved && rbm.kernel_count == 2 * n;
            checks["boson_witten_magnitude"] =
                bidx.resolved && std::abs(bidx.witten_index) == 2 * n;
        }
        if (n == 1 && rm.kernel_count == 2) {
            std::vector<StateVector> kern(rm.vectors.begin(), rm.vectors.begin() + 2);
            double ov = translation_mode_overlap(bg, prof, kern);
            summary["bosonmap"]["translation_overlap"] = ov;
            checks["translation_overlap"] = ov >= 0.99;
        }
        if (config.wants("bosonmap"))
            sink.write_text("bosonmap.json", summary["bosonmap"].dump(2));
    });

    bool all = true;
    for (auto it = checks.begin(); it != checks.end(); ++it) all = all && it.value().get<bool>();
    man.all_checks_passed = all;
    summary["checks"] = checks;
    summary["all_checks_passed"] = all;
    sink.write_text("summary.json", summary.dump(2));

    json jm;
    jm["artifact_version"] = man.artifact_version;
    jm["format_version"] = man.format_version;
    jm["config_hash"] = man.config_hash;
    auto& js = jm["stages"] = json::array();
    for (const auto& s : man.stages)
        js.push_back({{"name", s.name}, {"status", s.status}, {"wall_ms", s.wall_ms}});
    auto& jf = jm["files"] = json::array();
    for (const auto& f : man.files) jf.push_back({{"path", f.path}, {"fnv64", f.fnv64}});
    jm["all_checks_passed"] = all;
    std::ofstream out(fs::path(config.output_dir) / "manifest.json", std::ios::binary);
    out << jm.dump(2);
    return man;
}

std::vector<std::string> emit_plot_data(const std::string& output_dir, const std::string& which) {
    fs::path dir(output_dir);
    if (!fs::exists(dir / "manifest.json"))
        throw MissingStage("emit_plot_data: no manifest.json in " + output_dir);
    std::vector<std::string> written;

    auto read_lines = [&](const fs::path& p) {
        std::ifstream in(p);
        if (!in) throw MissingStage("emit_plot_data: missing " + p.string());
        std::vector<std::string> lines;
        std::string l;
        while (std::getline(in, l)) lines.push_back(l);
        return lines;
    };

    if (which == "profiles") {
        auto lines = read_lines(dir / "profile.csv");
        std::ofstream out(dir / "plot_profiles.csv", std::ios::binary);
        out << "r,f,a\n";
        for (std::size_t i = 1; i < lines.size(); ++i) {
            double r, f, a, res;
            if (std::sscanf(lines[i].c_str(), "%lg,%lg,%lg,%lg", &r, &f, &a, &res) == 4)
                out << lines[i].substr(0, lines[i].rfind(',')) << "\n";
        }
        written.push_back("plot_profiles.csv");
    } else if (which == "mode_density") {
        for (int m = 0; m < 64; ++m) {
            char name[32], oname[40];
            std::snprintf(name, sizeof name, "mode_%02d.csv", m);
            if (!fs::exists(dir / name)) break;
            auto lines = read_lines(dir / name);
            std::snprintf(oname, sizeof oname, "plot_mode_density_%02d.csv", m);
            std::ofstream out(dir / oname, std::ios::binary);
            out << "x,y,density\n";
            for (std::size_t i = 1; i < lines.size(); ++i) {
                double x, y, r0, i0, r1, i1;
                if (std::sscanf(lines[i].c_str(), "%lg,%lg,%lg,%lg,%lg,%lg", &x, &y, &r0, &i0,
                                &r1, &i1) == 6) {
                    char buf[128];
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, y,
                                  r0 * r0 + i0 * i0 + r1 * r1 + i1 * i1);
                    out << buf;
                }
            }
            written.push_back(oname);
        }
        if (written.empty()) throw MissingStage("emit_plot_data: no mode CSVs found");
    } else if (which == "spectrum") {
        std::ifstream in(dir / "spectral_D.json");
        if (!in) throw MissingStage("emit_plot_data: missing spectral_D.json");
        json j = json::parse(in);
        std::ofstream out(dir / "plot_spectrum.csv", std::ios::binary);
        out << "index,sigma\n";
        int i = 0;
        for (const auto& s : j["sigma"]) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%d,%.17g\n", i++, s.get<double>());
            out << buf;
        }
        written.push_back("plot_spectrum.csv");
    } else {
        throw InvalidParams("emit_plot_data: unknown selector '" + which + "'");
    }

    // fold the new files into the manifest
    std::ifstream min(dir / "manifest.json");
    json jm = json::parse(min);
    min.close();
    for (const auto& w : written)
        jm["files"].push_back({{"path", w}, {"fnv64", fnv1a64_hex_of_file((dir / w).string())}});
    std::ofstream mout(dir / "manifest.json", std::ios::binary);
    mout << jm.dump(2);
    return written;
}

} // namespace lgv
