#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "pvortex/error.hpp"
#include "pvortex/io.hpp"

namespace pvortex {

namespace {

struct Frame {
    double x0, y1, scale;
    double px(double x) const { return (x - x0) * scale; }
    double py(double y) const { return (y1 - y) * scale; }
};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

Point position_at(const TrajectoryTable& t, std::size_t vortex, double time) {
    const auto it = std::lower_bound(t.times.begin(), t.times.end(), time);
    if (it == t.times.begin()) return t.states.front()[vortex];
    if (it == t.times.end()) return t.states.back()[vortex];
    const std::size_t k = static_cast<std::size_t>(it - t.times.begin());
    const double ta = t.times[k - 1], tb = t.times[k];
    const double s = tb > ta ? (time - ta) / (tb - ta) : 0.0;
    const Point a = t.states[k - 1][vortex], b = t.states[k][vortex];
    return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
}

}  // namespace

std::string render_svg(const TrajectoryTable& table, const PlotOptions& opts) {
    if (table.times.empty() || table.states.empty()) throw UsageError("plot: trajectory is empty");
    if (opts.palette.empty()) throw UsageError("plot: palette is empty");
    if (!(opts.width_px > 0.0)) throw UsageError("plot: width must be > 0");
    const std::size_t n = table.vortex_count();

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : table.states)
        for (const Point& p : s.positions) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    if (table.domain == Domain::HalfPlane) ymin = std::min(ymin, 0.0);
    double xr = xmax - xmin, yr = ymax - ymin;
    const double span = std::max({xr, yr, 1e-9});
    if (xr < 1e-3 * span) {
        xmin -= 0.5 * span;
        xr = span;
    }
    if (yr < 1e-3 * span) {
        ymin -= 0.5 * span;
        yr = span;
    }
    xmin -= 0.05 * xr;
    ymin -= 0.05 * yr;
    xr *= 1.1;
    yr *= 1.1;

    // equal aspect; the longer side gets width_px
    const double scale = opts.width_px / std::max(xr, yr);
    const Frame f{xmin, ymin + yr, scale};
    const double w = xr * scale, h = yr * scale;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n";
    if (!opts.title.empty()) out += "<title>" + escape(opts.title) + "</title>\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (table.domain == Domain::HalfPlane)
        out += "<line class=\"wall\" x1=\"0\" y1=\"" + num(f.py(0.0)) + "\" x2=\"" + num(w) + "\" y2=\"" +
               num(f.py(0.0)) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (std::size_t i = 0; i < n; ++i) {
        const std::string& colour = opts.palette[i % opts.palette.size()];
        out += "<polyline class=\"vortex\" data-vortex=\"" + std::to_string(i + 1) + "\" fill=\"none\" stroke=\"" +
               colour + "\" stroke-width=\"" + num(opts.stroke_width) + "\" points=\"";
        for (std::size_t k = 0; k < table.states.size(); ++k) {
            if (k) out += ' ';
            const Point& p = table.states[k][i];
            out += num(f.px(p.x)) + "," + num(f.py(p.y));
        }
        out += "\"/>\n";
    }

    if (opts.show_events) {
        const double r = std::max(3.0, 2.0 * opts.stroke_width);
        for (const EventRecord& e : table.events) {
            if (e.i >= n || e.j >= n) continue;
            const Point a = position_at(table, e.i, e.time);
            const Point b = position_at(table, e.j, e.time);
            switch (e.kind) {
                case EventKind::VerticalAlignment:
                    out += "<line class=\"event alignment\" x1=\"" + num(f.px(a.x)) + "\" y1=\"" + num(f.py(a.y)) +
                           "\" x2=\"" + num(f.px(b.x)) + "\" y2=\"" + num(f.py(b.y)) +
                           "\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
                    for (const Point& p : {a, b})
                        out += "<circle class=\"event alignment\" cx=\"" + num(f.px(p.x)) + "\" cy=\"" + num(f.py(p.y)) +
                               "\" r=\"" + num(r) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
                    break;
                case EventKind::InstantaneousStop:
                    out += "<circle class=\"event stop\" cx=\"" + num(f.px(a.x)) + "\" cy=\"" + num(f.py(a.y)) +
                           "\" r=\"" + num(r) + "\" fill=\"black\"/>\n";
                    break;
                case EventKind::NearCollision: {
                    const double cx = f.px(a.x), cy = f.py(a.y);
                    out += "<path class=\"event collision\" d=\"M" + num(cx - r) + "," + num(cy - r) + " L" +
                           num(cx + r) + "," + num(cy + r) + " M" + num(cx - r) + "," + num(cy + r) + " L" +
                           num(cx + r) + "," + num(cy - r) + "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
                    break;
                }
            }
        }
    }
    out += "</svg>\n";
    return out;
}

void plot_svg(const TrajectoryTable& table, const std::filesystem::path& path, const PlotOptions& opts) {
    const std::string text = render_svg(table, opts);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
    f << text;
    f.flush();
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

void plot_svg(const Trajectory& traj, const std::filesystem::path& path, const PlotOptions& opts) {
    if (traj.empty()) throw UsageError("plot: trajectory is empty");
    plot_svg(to_table(traj), path, opts);
}

}  // namespace pvortex
