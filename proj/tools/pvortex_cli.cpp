// pvortex command-line tool. Talks to the library only through pvortex.h.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pvortex/pvortex.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct CliFailure {
    int code;
    std::string message;
};

int exit_code_for(pv_status s) {
    switch (s) {
        case PV_OK: return kExitOk;
        case PV_ERR_USAGE:
        case PV_ERR_DOMAIN:
        case PV_ERR_SCHEMA:
        case PV_ERR_IO: return kExitUsage;
        default: return kExitNumerical;
    }
}

void check(pv_status s, const std::string& what) {
    if (s != PV_OK) throw CliFailure{exit_code_for(s), what + ": " + pv_last_error()};
}

[[noreturn]] void usage(const std::string& msg) { throw CliFailure{kExitUsage, msg}; }

double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        usage(what + ": '" + text + "' is not a number");
    }
    if (used != text.size()) usage(what + ": '" + text + "' is not a number");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t at = s.find(sep, start);
        out.push_back(s.substr(start, at - start));
        if (at == std::string::npos) return out;
        start = at + 1;
    }
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& f : split(s, ',')) out.push_back(parse_number(f, what));
    return out;
}

// "x:y,x:y,..." -> x1, y1, x2, y2, ...
std::vector<double> parse_positions(const std::string& s) {
    std::vector<double> xy;
    for (const auto& pair : split(s, ',')) {
        const auto f = split(pair, ':');
        if (f.size() != 2) usage("--pos: expected x:y, got '" + pair + "'");
        xy.push_back(parse_number(f[0], "--pos"));
        xy.push_back(parse_number(f[1], "--pos"));
    }
    return xy;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct System {
    pv_system* p = nullptr;
    ~System() { pv_system_destroy(p); }
};
struct Traj {
    pv_trajectory* p = nullptr;
    ~Traj() { pv_trajectory_destroy(p); }
};
struct Run {
    pv_run* p = nullptr;
    ~Run() { pv_run_destroy(p); }
};

// ---- simulate ----

struct SimulateArgs {
    std::string domain = "plane";
    std::string gamma;
    std::string pos;
    std::string config;
    std::string out;
    std::string manifest;
    std::string svg;
    double t_end = NAN;
    pv_integrator_config cfg{};
    bool require_complete = false;
};

void print_drift(const pv_trajectory* traj, const pv_system* sys) {
    for (std::size_t k = 0;; ++k) {
        const char* name = nullptr;
        if (pv_invariant_name(sys, k, &name) != PV_OK) break;
        double d = 0.0;
        if (pv_trajectory_relative_drift(traj, name, &d) == PV_OK)
            std::printf("drift %s = %.3e\n", name, d);
    }
}

int cmd_simulate(const SimulateArgs& a, const std::string& command, CLI::App* sub) {
    Run run;
    if (!a.config.empty()) {
        for (const char* flag : {"--gamma", "--pos", "--t-end", "--domain"})
            if (sub->count(flag)) usage(std::string(flag) + " cannot be combined with --config");
        check(pv_run_read_config(a.config.c_str(), &run.p), "config");
    } else {
        if (a.gamma.empty() || a.pos.empty()) usage("simulate needs --gamma and --pos (or --config)");
        if (!sub->count("--t-end")) usage("simulate needs --t-end (or --config)");
        pv_domain domain;
        if (a.domain == "plane")
            domain = PV_PLANE;
        else if (a.domain == "half-plane" || a.domain == "halfplane")
            domain = PV_HALF_PLANE;
        else
            usage("--domain must be plane or half-plane");
        const auto gammas = parse_list(a.gamma, "--gamma");
        const auto xy = parse_positions(a.pos);
        if (xy.size() != 2 * gammas.size())
            usage("--pos has " + std::to_string(xy.size() / 2) + " points but --gamma has " +
                  std::to_string(gammas.size()) + " strengths");
        System sys;
        check(pv_system_create(domain, gammas.data(), gammas.size(), &sys.p), "system");
        pv_integrator_config cfg = a.cfg;
        cfg.t_end = a.t_end;
        check(pv_run_create(sys.p, xy.data(), &cfg, &run.p), "run");
    }

    Traj traj;
    double wall = 0.0;
    check(pv_run_execute(run.p, &traj.p, &wall), "integrate");
    if (!a.out.empty()) check(pv_trajectory_write_csv(traj.p, a.out.c_str()), "csv");
    if (!a.manifest.empty())
        check(pv_run_write_manifest(run.p, traj.p, command.c_str(), wall, a.manifest.c_str()), "manifest");
    if (!a.svg.empty()) check(pv_trajectory_plot_svg(traj.p, a.svg.c_str(), nullptr), "svg");

    const pv_termination term = pv_trajectory_termination(traj.p);
    std::printf("termination = %s\n", pv_termination_name(term));
    std::printf("samples = %zu\n", pv_trajectory_sample_count(traj.p));
    for (std::size_t k = 0; k < pv_trajectory_event_count(traj.p); ++k) {
        pv_event e;
        check(pv_trajectory_event(traj.p, k, &e, nullptr), "event");
        std::printf("event %s t = %s vortices %zu,%zu\n", pv_event_kind_name(e.kind), g17(e.time).c_str(), e.i + 1,
                    e.j + 1);
    }
    print_drift(traj.p, pv_run_system(run.p));
    if (a.require_complete && term != PV_TERM_TIME_END) {
        std::fprintf(stderr, "error: run ended early (%s)\n", pv_termination_name(term));
        return kExitNumerical;
    }
    return kExitOk;
}

// ---- bifurcate ----

struct BifurcateArgs {
    double lambda = NAN;
    std::string method = "algebraic";
    std::string bracket;
};

int cmd_bifurcate(const BifurcateArgs& a) {
    pv_bifurcation r;
    if (a.method == "algebraic") {
        check(pv_critical_w(a.lambda, &r), "bifurcate");
    } else if (a.method == "simulate") {
        double lo = a.lambda < 0 ? 0.1 : 3.0, hi = a.lambda < 0 ? 0.4 : 6.0;
        if (!a.bracket.empty()) {
            const auto b = parse_list(a.bracket, "--bracket");
            if (b.size() != 2) usage("--bracket: expected lo,hi");
            lo = b[0];
            hi = b[1];
        }
        check(pv_find_cusp(a.lambda, lo, hi, nullptr, &r), "bifurcate");
    } else {
        usage("--method must be algebraic or simulate");
    }
    std::printf("W* = %s\n", g17(r.critical_w).c_str());
    std::printf("stop ratio y1/y2 = %s\n", g17(r.stop_ratio).c_str());
    std::printf("cross ratio at stop = %s\n", g17(r.cross_ratio_at_stop).c_str());
    if (r.has_alignment) {
        std::printf("alignment t = %s\n", g17(r.alignment.time).c_str());
        std::printf("|xdot1| = %.3e  |ydot1| = %.3e  |ydot2| = %.3e\n", std::fabs(r.alignment.xdot_i),
                    std::fabs(r.alignment.ydot_i), std::fabs(r.alignment.ydot_j));
        std::printf("iterations = %d\n", r.iterations);
    }
    return kExitOk;
}

// ---- sweep ----

struct SweepArgs {
    double lambda = NAN;
    std::string w_grid;
    unsigned jobs = 0;
};

std::vector<double> parse_grid(const std::string& text) {
    const auto f = split(text, ':');
    if (f.size() != 3) usage("--w-grid: expected start:stop:count");
    const double a = parse_number(f[0], "--w-grid"), b = parse_number(f[1], "--w-grid");
    const double n = parse_number(f[2], "--w-grid");
    if (!(n >= 1) || n != std::floor(n) || n > 1e6) usage("--w-grid: count must be a positive integer");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t k = 0; k < count; ++k) out.push_back(count == 1 ? a : a + (b - a) * double(k) / double(count - 1));
    return out;
}

struct SweepRow {
    double w;
    pv_status status;
    pv_regime regime;
    std::string error;
};

SweepRow sweep_point(double lambda, double w) {
    SweepRow row{w, PV_OK, PV_REGIME_SMOOTH_PASS, {}};
    Traj traj;
    row.status = pv_encounter_run(lambda, w, nullptr, &traj.p);
    if (row.status == PV_OK) row.status = pv_classify_regime(traj.p, lambda, &row.regime);
    if (row.status != PV_OK) row.error = pv_last_error();
    return row;
}

int cmd_sweep(const SweepArgs& a) {
    const auto grid = parse_grid(a.w_grid);
    const unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepRow> rows(grid.size());
    for (std::size_t start = 0; start < grid.size(); start += jobs) {
        std::vector<std::future<SweepRow>> batch;
        for (std::size_t k = start; k < std::min(grid.size(), start + jobs); ++k)
            batch.push_back(std::async(std::launch::async, sweep_point, a.lambda, grid[k]));
        for (std::size_t k = 0; k < batch.size(); ++k) rows[start + k] = batch[k].get();
    }
    pv_bifurcation crit;
    if (pv_critical_w(a.lambda, &crit) == PV_OK) std::printf("# W* = %s\n", g17(crit.critical_w).c_str());
    std::printf("W,regime\n");
    int code = kExitOk;
    for (const auto& r : rows) {
        if (r.status == PV_OK) {
            std::printf("%s,%s\n", g17(r.w).c_str(), pv_regime_name(r.regime));
        } else {
            std::printf("%s,error\n", g17(r.w).c_str());
            std::fprintf(stderr, "W = %s: %s\n", g17(r.w).c_str(), r.error.c_str());
            code = std::max(code, exit_code_for(r.status));
        }
    }
    return code;
}

// ---- verify ----

void report_line(const char* name, int passed, const char* summary, void*) {
    if (passed)
        std::printf("PASS %s\n", name);
    else
        std::printf("FAIL %s\n", summary);
    std::fflush(stdout);
}

int cmd_verify(const std::string& suite) {
    int all = 0;
    check(pv_verify(suite.c_str(), report_line, nullptr, &all), "verify");
    std::printf("%s\n", all ? "all checks passed" : "some checks FAILED");
    return all ? kExitOk : kExitNumerical;
}

// ---- plot / cross-ratio ----

int cmd_plot(const std::string& csv, const std::string& out, double width) {
    pv_plot_options opts{width, 1.5, 1};
    check(pv_plot_csv(csv.c_str(), out.c_str(), &opts), "plot");
    return kExitOk;
}

int cmd_cross_ratio(const std::vector<std::string>& args) {
    if (args.size() != 4) usage("cross-ratio needs exactly four numbers a b c d");
    double v[4];
    for (int k = 0; k < 4; ++k) v[k] = parse_number(args[k], "cross-ratio");
    double cr = 0.0;
    check(pv_cross_ratio(v[0], v[1], v[2], v[3], &cr), "cross-ratio");
    std::printf("%s\n", g17(cr).c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-vortex dynamics in the plane and the half-plane"};
    app.set_version_flag("--version", pv_version());
    app.require_subcommand(1);

    std::string command;
    for (int k = 0; k < argc; ++k) command += (k ? " " : "") + std::string(argv[k]);

    SimulateArgs sim;
    pv_integrator_config_default(&sim.cfg);
    auto* s = app.add_subcommand("simulate", "Integrate a vortex system");
    s->add_option("--domain", sim.domain, "plane or half-plane")->capture_default_str();
    s->add_option("--gamma", sim.gamma, "Strengths, comma separated (use --gamma=-1,1 for a leading minus)");
    s->add_option("--pos", sim.pos, "Positions x:y,x:y,...");
    s->add_option("--t-end", sim.t_end, "End time");
    s->add_option("--config", sim.config, "Run from a config or manifest JSON file");
    s->add_option("--rel-tol", sim.cfg.rel_tol)->capture_default_str();
    s->add_option("--abs-tol", sim.cfg.abs_tol)->capture_default_str();
    s->add_option("--max-step", sim.cfg.max_step)->capture_default_str();
    s->add_option("--output-interval", sim.cfg.output_interval)->capture_default_str();
    s->add_option("--collision-guard", sim.cfg.collision_guard)->capture_default_str();
    s->add_option("--event-refine-tol", sim.cfg.event_refine_tol)->capture_default_str();
    s->add_option("--stop-threshold", sim.cfg.stop_threshold)->capture_default_str();
    s->add_option("--out", sim.out, "Trajectory CSV path");
    s->add_option("--manifest", sim.manifest, "Run manifest JSON path");
    s->add_option("--svg", sim.svg, "SVG plot path");
    s->add_flag("--require-complete", sim.require_complete, "Exit 2 unless the run reaches t_end");

    BifurcateArgs bif;
    auto* b = app.add_subcommand("bifurcate", "Critical interaction parameter W* for strengths (1, lambda)");
    b->add_option("--lambda", bif.lambda, "Strength ratio, -1 or 1")->required();
    b->add_option("--method", bif.method, "algebraic or simulate")->capture_default_str();
    b->add_option("--bracket", bif.bracket, "Alignment height-ratio bracket lo,hi for --method simulate");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "Classify encounters over a grid of W");
    w->add_option("--lambda", sw.lambda, "Strength ratio, -1 or 1")->required();
    w->add_option("--w-grid", sw.w_grid, "start:stop:count")->required();
    w->add_option("--jobs", sw.jobs, "Parallel simulations (default: hardware threads)");

    std::string suite = "all";
    auto* v = app.add_subcommand("verify", "Run built-in verification suites");
    v->add_option("--suite", suite, "scenarios, bifurcation, conservation, grobli or all")->capture_default_str();

    std::string csv, svg_out;
    double width = 800.0;
    auto* p = app.add_subcommand("plot", "Render a trajectory CSV as SVG");
    p->add_option("--csv", csv, "Trajectory CSV")->required();
    p->add_option("--out", svg_out, "SVG path")->required();
    p->add_option("--width", width, "Width of the longer side in pixels")->capture_default_str();

    std::vector<std::string> cr_args;
    auto* c = app.add_subcommand("cross-ratio", "(a-d)(b-c)/((a-b)(c-d))");
    c->add_option("values", cr_args, "a b c d")->expected(4)->allow_extra_args(false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*s) return cmd_simulate(sim, command, s);
        if (*b) return cmd_bifurcate(bif);
        if (*w) return cmd_sweep(sw);
        if (*v) return cmd_verify(suite);
        if (*p) return cmd_plot(csv, svg_out, width);
        if (*c) return cmd_cross_ratio(cr_args);
    } catch (const CliFailure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
        if (f.code == kExitUsage) std::fprintf(stderr, "run with --help for usage\n");
        return f.code;
    }
    return kExitUsage;
}
