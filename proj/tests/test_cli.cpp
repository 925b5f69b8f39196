#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr discarded; captures stdout and the exit status.
Result run(const std::string& args) {
    const std::string cmd = std::string(AONKIT_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

// Drops the trailing wall-time column from every CSV line.
std::string strip_wall_time(const std::string& csv) {
    std::string out;
    for (const auto& l : lines(csv)) out += l.substr(0, l.rfind(',')) + "\n";
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    return {std::istreambuf_iterator<char>(is), {}};
}

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("aonkit_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const std::string kSmall = "--epochs 2 --arch mlp:8 --per-class 20 --val-per-class 10";

} // namespace

TEST_CASE("train writes a header and one row per epoch") {
    const Result r = run("train " + kSmall);
    CHECK(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 3);
    CHECK(ls[0].starts_with("run_id,seed,epoch,"));
    CHECK(ls[1].starts_with("aon-q2,1,0,"));
    CHECK(ls[2].starts_with("aon-q2,1,1,"));
}

TEST_CASE("sn and aon with q = 0 produce the same csv apart from wall time") {
    const Result a = run("train --mode sn " + kSmall);
    const Result b = run("train --mode aon --q 0 " + kSmall);
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(strip_wall_time(a.out) == strip_wall_time(b.out));
}

TEST_CASE("config files and flag precedence") {
    const fs::path dir = temp_dir("cfg");
    {
        std::ofstream os(dir / "run.ini");
        os << "mode = plain\nepochs = 1\narch = mlp:4\nper-class = 10\nval-per-class = 5\n";
    }
    const Result a = run("--config " + (dir / "run.ini").string() + " train");
    CHECK(a.code == 0);
    CHECK(lines(a.out).size() == 2);
    CHECK(lines(a.out)[1].starts_with("plain,"));

    const Result b = run("--config " + (dir / "run.ini").string() + " --epochs 3 train");
    CHECK(lines(b.out).size() == 4);

    {
        std::ofstream os(dir / "bad.ini");
        os << "bogus_key = 1\n";
    }
    CHECK(run("--config " + (dir / "bad.ini").string() + " train").code != 0);
    CHECK(run("--config " + (dir / "missing.ini").string() + " train").code != 0);
    fs::remove_all(dir);
}

TEST_CASE("train with --out writes the csv and per-seed checkpoints") {
    const fs::path dir = temp_dir("out");
    const fs::path csv = dir / "run.csv";
    const Result r = run("train --seeds 2 --out " + csv.string() + " " + kSmall);
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(lines(slurp(csv)).size() == 5);
    CHECK(fs::exists(dir / "run.seed1.aonk"));
    CHECK(fs::exists(dir / "run.seed2.aonk"));

    const fs::path frozen = dir / "frozen.aonk";
    CHECK(run("freeze --checkpoint " + (dir / "run.seed1.aonk").string() + " --out " + frozen.string()).code == 0);
    CHECK(fs::exists(frozen));
    CHECK(run("freeze --checkpoint " + (dir / "nope.aonk").string() + " --out " + frozen.string()).code != 0);
    fs::remove_all(dir);
}

TEST_CASE("gradcheck exit codes") {
    CHECK(run("gradcheck").code == 0);
    CHECK(run("gradcheck --q 4 --rows 6 --cols 4").code == 0);
    CHECK(run("gradcheck --corrupt").code != 0);
}

TEST_CASE("ortho-sweep") {
    const Result r = run("ortho-sweep --qs 0,2,4 --trials 10");
    CHECK(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 4);
    CHECK(ls[0] == "q,mean_err,max_err");
    CHECK(ls[1].starts_with("0,"));
    CHECK(ls[3].starts_with("4,"));
}

TEST_CASE("compare prints one csv row per mode") {
    const Result r = run("compare --modes aon:2,plain " + kSmall);
    CHECK(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() >= 3);
    CHECK(ls[0].starts_with("mode,seeds,"));
    CHECK(ls[1].starts_with("aon-q2,1,"));
    CHECK(ls[2].starts_with("plain,1,"));
}

TEST_CASE("invalid input exits nonzero") {
    CHECK(run("train --mode batchnorm").code != 0);
    CHECK(run("train --q -1 " + kSmall).code != 0);
    CHECK(run("train --dataset idx:/nonexistent " + kSmall).code != 0);
    CHECK(run("").code != 0);
    CHECK(run("train --simd bogus").code != 0);
}
