#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pvortex/error.hpp"
#include "pvortex/io.hpp"

namespace pvortex {

namespace {

void put(std::string& out, double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(n));
}

double to_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw IoError("csv line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = s.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

std::vector<std::string> csv_columns(const VortexSystem& sys) {
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 1; i <= sys.size(); ++i) {
        cols.push_back("x" + std::to_string(i));
        cols.push_back("y" + std::to_string(i));
    }
    for (auto& name : invariant_names(sys)) cols.push_back(name);
    return cols;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    const auto cols = csv_columns(traj.system);
    std::string out;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out += ',';
        out += cols[c];
    }
    out += '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        put(out, traj.times[k]);
        for (const Point& p : traj.states[k].positions) {
            out += ',';
            put(out, p.x);
            out += ',';
            put(out, p.y);
        }
        for (double v : invariant_values(traj.system, traj.states[k])) {
            out += ',';
            put(out, v);
        }
        out += '\n';
    }
    for (const Event& e : traj.events) {
        out += "# event,";
        out += to_string(e.kind);
        out += ',';
        put(out, e.time);
        out += ',' + std::to_string(e.vortex_indices.first + 1) + ',' + std::to_string(e.vortex_indices.second + 1);
        out += '\n';
    }
    os << out;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
    write_trajectory_csv(traj, f);
    f.flush();
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

TrajectoryTable parse_trajectory_csv(std::istream& is) {
    TrajectoryTable table;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) throw IoError("csv: empty input");
    ++lineno;
    for (auto f : split(line)) table.columns.emplace_back(f);

    const auto& cols = table.columns;
    if (cols.empty() || cols[0] != "t") throw IoError("csv line 1: first column must be 't'");
    std::size_t n = 0;
    while (1 + 2 * n + 1 < cols.size() && cols[1 + 2 * n] == "x" + std::to_string(n + 1) &&
           cols[2 + 2 * n] == "y" + std::to_string(n + 1))
        ++n;
    if (n == 0) throw IoError("csv line 1: no position columns");
    const std::size_t n_inv = cols.size() - 1 - 2 * n;
    if (n_inv < 2 || cols[1 + 2 * n] != "H" || cols[2 + 2 * n] != "P")
        throw IoError("csv line 1: expected H,P after the position columns");
    table.domain = Domain::HalfPlane;
    for (std::size_t c = 3 + 2 * n; c < cols.size(); ++c)
        if (cols[c] == "Q") table.domain = Domain::Plane;

    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::string_view body = std::string_view(line).substr(1);
            const auto start = body.find_first_not_of(' ');
            if (start == std::string_view::npos) continue;
            const auto f = split(body.substr(start));
            if (f.size() != 5 || f[0] != "event") continue;
            EventRecord ev;
            try {
                ev.kind = parse_event_kind(f[1]);
            } catch (const Error&) {
                throw IoError("csv line " + std::to_string(lineno) + ": unknown event kind '" + std::string(f[1]) + "'");
            }
            ev.time = to_double(f[2], lineno);
            const double i = to_double(f[3], lineno);
            const double j = to_double(f[4], lineno);
            if (i < 1 || j < 1 || i > double(n) || j > double(n))
                throw IoError("csv line " + std::to_string(lineno) + ": event vortex index out of range");
            ev.i = static_cast<std::size_t>(i) - 1;
            ev.j = static_cast<std::size_t>(j) - 1;
            table.events.push_back(ev);
            continue;
        }
        const auto f = split(line);
        if (f.size() != cols.size())
            throw IoError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                          " fields, got " + std::to_string(f.size()));
        table.times.push_back(to_double(f[0], lineno));
        VortexState st;
        st.positions.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            st.positions[i] = {to_double(f[1 + 2 * i], lineno), to_double(f[2 + 2 * i], lineno)};
        table.states.push_back(std::move(st));
        std::vector<double> inv;
        for (std::size_t c = 1 + 2 * n; c < f.size(); ++c) inv.push_back(to_double(f[c], lineno));
        table.invariants.push_back(std::move(inv));
    }
    return table;
}

TrajectoryTable read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
    try {
        return parse_trajectory_csv(f);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

TrajectoryTable to_table(const Trajectory& traj) {
    TrajectoryTable t;
    t.domain = traj.system.domain();
    t.columns = csv_columns(traj.system);
    t.times = traj.times;
    t.states = traj.states;
    for (const auto& s : traj.states) t.invariants.push_back(invariant_values(traj.system, s));
    for (const Event& e : traj.events) t.events.push_back({e.kind, e.time, e.vortex_indices.first, e.vortex_indices.second});
    return t;
}

}  // namespace pvortex
