#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;  // stdout and stderr together
};

Result run(const std::string& args) {
    const std::string cmd = std::string(PVORTEX_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        char tmpl[] = "/tmp/pvortex-cli-XXXXXX";
        path = mkdtemp(tmpl);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("bifurcate prints the golden ratio values") {
    const Result d = run("bifurcate --lambda -1 --method algebraic");
    CHECK(d.code == 0);
    CHECK(d.out.find("W* = 1.6180339887498949\n") != std::string::npos);
    const Result p = run("bifurcate --lambda 1 --method algebraic");
    CHECK(p.code == 0);
    CHECK(p.out.find("W* = 0.61803398874989479\n") != std::string::npos);
}

TEST_CASE("bifurcate by simulation") {
    const Result r = run("bifurcate --lambda -1 --method simulate");
    CHECK(r.code == 0);
    CHECK(r.out.find("W* = 1.61803") != std::string::npos);
    CHECK(run("bifurcate --lambda -1 --method simulate --bracket 0.3,0.35").code == 1);
    CHECK(run("bifurcate --lambda -1 --method guess").code == 1);
    CHECK(run("bifurcate").code == 1);
}

TEST_CASE("simulate writes csv, manifest and svg, and replays") {
    TempDir dir;
    const Result r = run("simulate --domain half-plane --gamma 1,-1 --pos 0:0.5,0:1 --t-end 50 --out " + (dir / "traj.csv") +
                         " --manifest " + (dir / "run.json") + " --svg " + (dir / "traj.svg"));
    CHECK(r.code == 0);
    CHECK(r.out.find("termination = TimeEnd") != std::string::npos);
    REQUIRE(fs::exists(dir / "traj.csv"));
    REQUIRE(fs::exists(dir / "run.json"));
    REQUIRE(fs::exists(dir / "traj.svg"));
    CHECK(slurp(dir / "traj.csv").starts_with("t,x1,y1,x2,y2,H,P,W\n"));
    CHECK(slurp(dir / "run.json").find("\"command\"") != std::string::npos);

    const Result replay = run("simulate --config " + (dir / "run.json") + " --out " + (dir / "replay.csv"));
    CHECK(replay.code == 0);
    CHECK(slurp(dir / "traj.csv") == slurp(dir / "replay.csv"));

    CHECK(run("simulate --config " + (dir / "run.json") + " --t-end 3").code == 1);
}

TEST_CASE("simulate argument errors exit 1") {
    CHECK(run("simulate --gamma 1,1 --pos 0:0 --t-end 1").code == 1);
    CHECK(run("simulate --gamma 1,1 --pos 0:0,1:1").code == 1);
    CHECK(run("simulate --gamma 1,x --pos 0:0,1:1 --t-end 1").code == 1);
    CHECK(run("simulate --gamma 1 --pos 0-0 --t-end 1").code == 1);
    CHECK(run("simulate --domain sphere --gamma 1 --pos 0:0 --t-end 1").code == 1);
    CHECK(run("simulate --domain half-plane --gamma 1 --pos 0:-1 --t-end 1").code == 1);
    CHECK(run("simulate --gamma 1 --pos 0:0 --t-end 1 --rel-tol 0").code == 1);
    const Result unknown = run("simulate --bogus");
    CHECK(unknown.code == 1);
    CHECK(unknown.out.find("--bogus") != std::string::npos);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("").code == 1);
    CHECK(run("--help").code == 0);
}

TEST_CASE("config schema errors exit 1 with the field path") {
    TempDir dir;
    std::ofstream(dir / "bad.json") << R"({"system": {"domain": "plane", "strengths": [1]}, "initial_state": [[0, 0]],
        "integrator": {"t_end": 1, "reltol": 1e-9}})";
    const Result r = run("simulate --config " + (dir / "bad.json"));
    CHECK(r.code == 1);
    CHECK(r.out.find("integrator.reltol") != std::string::npos);

    std::ofstream(dir / "nostr.json") << R"({"system": {"domain": "plane"}, "initial_state": [[0, 0]],
        "integrator": {"t_end": 1}})";
    const Result m = run("simulate --config " + (dir / "nostr.json"));
    CHECK(m.code == 1);
    CHECK(m.out.find("system.strengths") != std::string::npos);
}

TEST_CASE("near collision with --require-complete exits 2") {
    const std::string base = "simulate --domain half-plane --gamma -1,1 --pos 0:1,0.5:1 --t-end 10 --collision-guard 0.4";
    const Result lax = run(base);
    CHECK(lax.code == 0);
    CHECK(lax.out.find("termination = NearCollision") != std::string::npos);
    CHECK(run(base + " --require-complete").code == 2);
}

TEST_CASE("negative strengths via the equals form") {
    const Result r = run("simulate --gamma=-1,1 --pos 0:0,1:0 --t-end 1");
    CHECK(r.code == 0);
}

TEST_CASE("sweep, plot, cross-ratio, verify") {
    const Result s = run("sweep --lambda -1 --w-grid 1.5:1.7:3");
    CHECK(s.code == 0);
    CHECK(s.out.find("1.5,KinkOrLeapfrog") != std::string::npos);
    CHECK(s.out.find("1.7,SmoothPass") != std::string::npos);
    CHECK(run("sweep --lambda -1 --w-grid 1:2").code == 1);
    CHECK(run("sweep --lambda 0.5 --w-grid 1:2:2").code == 1);

    TempDir dir;
    REQUIRE(run("simulate --gamma 1,2 --pos 0:0,1:0 --t-end 5 --out " + (dir / "a.csv")).code == 0);
    CHECK(run("plot --csv " + (dir / "a.csv") + " --out " + (dir / "a.svg")).code == 0);
    CHECK(slurp(dir / "a.svg").find("<polyline") != std::string::npos);
    CHECK(run("plot --csv " + (dir / "missing.csv") + " --out " + (dir / "b.svg")).code == 1);

    const Result cr = run("cross-ratio 3 1 -1 -3");
    CHECK(cr.code == 0);
    CHECK(cr.out == "3\n");
    CHECK(run("cross-ratio 1 1 2 3").code == 1);
    CHECK(run("cross-ratio 1 2 3").code == 1);

    const Result v = run("verify --suite scenarios");
    CHECK(v.code == 0);
    CHECK(v.out.find("FAIL") == std::string::npos);
    CHECK(v.out.find("PASS pair_rotation") != std::string::npos);
    CHECK(run("verify --suite nonsense").code == 1);
}

TEST_CASE("verify all") {
    const Result v = run("verify --suite all");
    CHECK(v.code == 0);
    CHECK(v.out.find("all checks passed") != std::string::npos);
    CHECK(v.out.find("critical_W_simulation") != std::string::npos);
    CHECK(v.out.find("grobli") != std::string::npos);
}
