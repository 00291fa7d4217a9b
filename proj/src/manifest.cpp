#include <cerrno>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "pvortex/error.hpp"
#include "pvortex/io.hpp"

namespace pvortex {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

namespace {

ojson points_json(const VortexState& s) {
    ojson a = ojson::array();
    for (const Point& p : s.positions) a.push_back({p.x, p.y});
    return a;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || item.key() == a;
        if (!ok) fail(path.empty() ? item.key() : path + "." + item.key(), "unknown field");
    }
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::size_t index1(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 1) fail(path, "expected a positive integer");
    return static_cast<std::size_t>(v.get<long long>());
}

VortexState parse_points(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of [x, y] pairs");
    VortexState s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != 2) fail(p, "expected [x, y]");
        s.positions.push_back({number(v[i][0], p + "[0]"), number(v[i][1], p + "[1]")});
    }
    return s;
}

IntegratorConfig parse_integrator(const json& v) {
    only_keys(v, "integrator",
              {"rel_tol", "abs_tol", "max_step", "t_end", "output_interval", "collision_guard", "event_refine_tol",
               "stop_threshold", "alignment_pairs"});
    IntegratorConfig cfg;
    cfg.t_end = number(need(v, "t_end", "integrator"), "integrator.t_end");
    const auto opt = [&](const char* key, double& field) {
        if (v.contains(key)) field = number(v.at(key), std::string("integrator.") + key);
    };
    opt("rel_tol", cfg.rel_tol);
    opt("abs_tol", cfg.abs_tol);
    opt("max_step", cfg.max_step);
    opt("output_interval", cfg.output_interval);
    opt("collision_guard", cfg.collision_guard);
    opt("event_refine_tol", cfg.event_refine_tol);
    opt("stop_threshold", cfg.stop_threshold);
    if (v.contains("alignment_pairs")) {
        const json& a = v.at("alignment_pairs");
        if (!a.is_array()) fail("integrator.alignment_pairs", "expected an array of [i, j] pairs");
        for (std::size_t k = 0; k < a.size(); ++k) {
            const std::string p = "integrator.alignment_pairs[" + std::to_string(k) + "]";
            if (!a[k].is_array() || a[k].size() != 2) fail(p, "expected [i, j]");
            cfg.alignment_pairs.emplace_back(index1(a[k][0], p + "[0]") - 1, index1(a[k][1], p + "[1]") - 1);
        }
    }
    try {
        validate(cfg);
    } catch (const UsageError& e) {
        throw SchemaError(e.what());
    }
    return cfg;
}

}  // namespace

std::string_view tool_version() { return PVORTEX_VERSION_STRING; }

RunManifest make_manifest(const RunInputs& inputs, const Trajectory& traj, std::string command, double wall_time_s) {
    return RunManifest{std::string(tool_version()), std::move(command), inputs, traj.invariant_drift,
                       traj.events,                  traj.terminated_by, wall_time_s};
}

std::string manifest_to_json(const RunManifest& m) {
    const IntegratorConfig& c = m.inputs.config;
    ojson pairs = ojson::array();
    for (const auto& [i, j] : c.alignment_pairs) pairs.push_back({i + 1, j + 1});

    ojson events = ojson::array();
    for (const Event& e : m.events) {
        ojson diag = ojson::object();
        for (const auto& [k, v] : e.diagnostics) diag[k] = v;
        events.push_back({{"kind", to_string(e.kind)},
                          {"time", e.time},
                          {"vortices", {e.vortex_indices.first + 1, e.vortex_indices.second + 1}},
                          {"state", points_json(e.state)},
                          {"diagnostics", diag}});
    }
    ojson drift = ojson::object();
    for (const auto& [k, v] : m.invariant_drift) drift[k] = v;

    ojson doc = {
        {"tool_version", m.tool_version},
        {"command", m.command},
        {"system",
         {{"domain", to_string(m.inputs.system.domain())},
          {"strengths", std::vector<double>(m.inputs.system.strengths().begin(), m.inputs.system.strengths().end())}}},
        {"initial_state", points_json(m.inputs.initial)},
        {"integrator",
         {{"rel_tol", c.rel_tol},
          {"abs_tol", c.abs_tol},
          {"max_step", c.max_step},
          {"t_end", c.t_end},
          {"output_interval", c.output_interval},
          {"collision_guard", c.collision_guard},
          {"event_refine_tol", c.event_refine_tol},
          {"stop_threshold", c.stop_threshold},
          {"alignment_pairs", pairs}}},
        {"invariant_drift", drift},
        {"events", events},
        {"termination", to_string(m.termination)},
        {"wall_time_s", m.wall_time_s},
    };
    return doc.dump(2) + "\n";
}

void write_manifest_json(const RunManifest& manifest, const std::filesystem::path& path) {
    const std::string text = manifest_to_json(manifest);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
    f << text;
    f.flush();
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

RunInputs parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("<root>: invalid JSON: ") + e.what());
    }
    only_keys(doc, "",
              {"tool_version", "command", "system", "initial_state", "integrator", "invariant_drift", "events",
               "termination", "wall_time_s"});

    const json& sys = need(doc, "system", "");
    only_keys(sys, "system", {"domain", "strengths"});
    const json& dom = need(sys, "domain", "system");
    if (!dom.is_string()) fail("system.domain", "expected a string");
    Domain domain;
    try {
        domain = parse_domain(dom.get<std::string>());
    } catch (const Error& e) {
        fail("system.domain", e.what());
    }
    const json& str = need(sys, "strengths", "system");
    if (!str.is_array() || str.empty()) fail("system.strengths", "expected a non-empty array of numbers");
    std::vector<double> gammas;
    for (std::size_t i = 0; i < str.size(); ++i)
        gammas.push_back(number(str[i], "system.strengths[" + std::to_string(i) + "]"));

    VortexState initial = parse_points(need(doc, "initial_state", ""), "initial_state");
    if (initial.size() != gammas.size())
        fail("initial_state", "expected " + std::to_string(gammas.size()) + " points to match system.strengths, got " +
                                  std::to_string(initial.size()));
    IntegratorConfig cfg = parse_integrator(need(doc, "integrator", ""));
    for (std::size_t k = 0; k < cfg.alignment_pairs.size(); ++k) {
        const auto [i, j] = cfg.alignment_pairs[k];
        if (i >= gammas.size() || j >= gammas.size() || i == j)
            fail("integrator.alignment_pairs[" + std::to_string(k) + "]", "indices must name two distinct vortices");
    }

    std::optional<VortexSystem> system;
    try {
        system.emplace(domain, std::move(gammas));
    } catch (const Error& e) {
        fail("system.strengths", e.what());
    }
    validate(*system, initial);
    return RunInputs{std::move(*system), std::move(initial), std::move(cfg)};
}

RunInputs read_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

}  // namespace pvortex
