#include "lgv/pipeline.hpp"
#include "lgv/types.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace {

struct CliOpts {
    std::string config_path;
    int n = -1;
    double e = -1, v = -1, r_max = -1, tol_zero = -1;
    int m_r = -1, m_xy = -1, k = -1;
    long long seed = -1;
    std::string scheme, out;
    bool dump_operator = false;
};

void add_common(CLI::App* cmd, CliOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON configuration file");
    cmd->add_option("--n", o.n, "vorticity (0 = vacuum)");
    cmd->add_option("--e", o.e, "gauge coupling");
    cmd->add_option("--v", o.v, "vacuum expectation value");
    cmd->add_option("--r-max", o.r_max, "disk radius (default 12/(e v))");
    cmd->add_option("--m-r", o.m_r, "radial grid points");
    cmd->add_option("--grid", o.m_xy, "2D grid points per side");
    cmd->add_option("--scheme", o.scheme, "central2 or central4");
    cmd->add_option("--k", o.k, "number of singular values");
    cmd->add_option("--tol-zero", o.tol_zero, "zero-mode threshold (default 1e-3 e v)");
    cmd->add_option("--seed", o.seed, "solver seed");
    cmd->add_option("--out", o.out, "output directory");
}

lgv::RunConfig build_config(const CliOpts& o, const std::string& pipeline) {
    std::string text = "{}";
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw lgv::IOError("cannot read config " + o.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    lgv::RunConfig c = lgv::parse_config(text);
    if (o.n >= 0) c.vortex.n = o.n;
    if (o.e > 0) c.vortex.e = o.e;
    if (o.v > 0) c.vortex.v = o.v;
    if (o.r_max > 0) c.vortex.r_max = o.r_max;
    else if (o.e > 0 || o.v > 0) c.vortex.r_max = 12.0 / (c.vortex.e * c.vortex.v);
    if (o.m_r > 0) c.vortex.m_r = o.m_r;
    if (o.m_xy > 0) c.m_xy = o.m_xy;
    if (!o.scheme.empty()) {
        if (o.scheme == "central2") c.scheme = 2;
        else if (o.scheme == "central4") c.scheme = 4;
        else throw lgv::ValidationError({"--scheme: expected central2 or central4"});
    }
    if (o.k > 0) c.k = o.k;
    if (o.tol_zero > 0) c.tol_zero = o.tol_zero;
    else if (o.e > 0 || o.v > 0) c.tol_zero = 1e-3 * c.vortex.e * c.vortex.v;
    if (o.seed >= 0) c.seed = static_cast<uint64_t>(o.seed);
    if (!o.out.empty()) c.output_dir = o.out;
    c.dump_operator = o.dump_operator;
    if (pipeline == "all") {
        c.pipeline = {"profile", "background", "spectrum", "index", "algebra", "bosonmap"};
    } else {
        c.pipeline.clear();
        std::stringstream ss(pipeline);
        std::string s;
        while (std::getline(ss, s, ',')) c.pipeline.push_back(s);
    }
    return c;
}

int execute(const CliOpts& o, const std::string& pipeline, bool plots) {
    lgv::RunConfig cfg = build_config(o, pipeline);
    lgv::RunManifest man = lgv::run(cfg);
    if (plots) {
        lgv::emit_plot_data(cfg.output_dir, "profiles");
        if (cfg.wants("spectrum")) {
            lgv::emit_plot_data(cfg.output_dir, "spectrum");
            lgv::emit_plot_data(cfg.output_dir, "mode_density");
        }
    }
    std::printf("output: %s\n", cfg.output_dir.c_str());
    for (const auto& s : man.stages)
        if (s.status != "skipped")
            std::printf("  %-10s %-8s %8.1f ms\n", s.name.c_str(), s.status.c_str(), s.wall_ms);
    std::printf("checks: %s\n", man.all_checks_passed ? "PASS" : "FAIL");
    return man.all_checks_passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-dual vortex backgrounds and zero-mode spectra of the critical "
                 "abelian Higgs model"};
    app.require_subcommand(1);
    CliOpts o;

    auto* solve = app.add_subcommand("solve", "radial profile and 2D background");
    auto* spectrum = app.add_subcommand("spectrum", "assemble D and compute smallest singulars");
    spectrum->add_flag("--dump-operator", o.dump_operator, "export the operator in COO form");
    auto* index = app.add_subcommand("index", "Witten/Fredholm index report");
    auto* algebra = app.add_subcommand("verify-algebra", "N=2 SUSY QM algebra relations");
    auto* bosonmap = app.add_subcommand("boson-map", "fermion->boson zero-mode correspondence");
    auto* report = app.add_subcommand("report", "full pipeline with summary and plot data");
    for (auto* c : {solve, spectrum, index, algebra, bosonmap, report}) add_common(c, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage errors -> 2, --help -> 0
    }

    try {
        if (solve->parsed()) return execute(o, "profile,background", false);
        if (spectrum->parsed()) return execute(o, "profile,background,spectrum", false);
        if (index->parsed()) return execute(o, "profile,background,spectrum,index", false);
        if (algebra->parsed())
            return execute(o, "profile,background,spectrum,index,algebra", false);
        if (bosonmap->parsed())
            return execute(o, "profile,background,spectrum,index,bosonmap", false);
        if (report->parsed()) return execute(o, "all", true);
    } catch (const lgv::StageFailure& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return ex.numerical ? 3 : 1;
    } catch (const lgv::NonConvergence& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 3;
    } catch (const lgv::NoConvergence& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 3;
    } catch (const lgv::ValidationError& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    } catch (const lgv::ParseError& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 2;
}
