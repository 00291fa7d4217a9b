#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pvortex/integrate.hpp"
#include "pvortex/vortex.hpp"

namespace pvortex {

// ---------------------------------------------------------------------------
// Trajectory CSV
//
//   t,x1,y1,...,xN,yN,H,P[,Q,I][,W]
//   <one row per output sample, %.17g, comma separated, '\n'>
//   # event,<kind>,<t>,<i>,<j>          (1-based vortex indices)
// ---------------------------------------------------------------------------

struct EventRecord {
    EventKind kind = EventKind::VerticalAlignment;
    double time = 0.0;
    std::size_t i = 0;  // 0-based
    std::size_t j = 0;
};

// What a trajectory CSV holds. Strengths are not part of the format.
struct TrajectoryTable {
    Domain domain = Domain::Plane;
    std::vector<std::string> columns;
    std::vector<double> times;
    std::vector<VortexState> states;
    std::vector<std::vector<double>> invariants;  // H, P, ... per row
    std::vector<EventRecord> events;

    std::size_t vortex_count() const { return states.empty() ? 0 : states.front().size(); }
};

std::vector<std::string> csv_columns(const VortexSystem& sys);
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);
// IoError naming the path on failure.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

TrajectoryTable parse_trajectory_csv(std::istream& is);
TrajectoryTable read_trajectory_csv(const std::filesystem::path& path);
TrajectoryTable to_table(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Run manifest / config (JSON)
// ---------------------------------------------------------------------------

struct RunInputs {
    VortexSystem system;
    VortexState initial;
    IntegratorConfig config;
};

struct RunManifest {
    std::string tool_version;
    std::string command;
    RunInputs inputs;
    std::map<std::string, double> invariant_drift;
    std::vector<Event> events;
    Termination termination = Termination::TimeEnd;
    double wall_time_s = 0.0;
};

std::string_view tool_version();

RunManifest make_manifest(const RunInputs& inputs, const Trajectory& traj, std::string command, double wall_time_s);
std::string manifest_to_json(const RunManifest& manifest);
void write_manifest_json(const RunManifest& manifest, const std::filesystem::path& path);

// Accepts a manifest (or any document with the same schema). Output-only
// fields are allowed and ignored; unknown fields are rejected. Throws
// SchemaError whose message starts with the offending field path.
RunInputs parse_config(std::string_view json_text);
RunInputs read_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

struct PlotOptions {
    double width_px = 800.0;
    double stroke_width = 1.5;
    bool show_events = true;
    std::string title;
    // orange and aquamarine first, then the rest in rotation
    std::vector<std::string> palette = {"#FFA500", "#7FFFD4", "#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
};

std::string render_svg(const TrajectoryTable& table, const PlotOptions& opts = {});
void plot_svg(const TrajectoryTable& table, const std::filesystem::path& path, const PlotOptions& opts = {});
void plot_svg(const Trajectory& traj, const std::filesystem::path& path, const PlotOptions& opts = {});

}  // namespace pvortex
