#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Workdir {
    fs::path path;
    Workdir() {
        path = fs::temp_directory_path() / ("botwin_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(BOTWIN_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("synth, extract, train, eval, importance pipeline") {
    Workdir dir;
    const std::string trace = dir / "trace.binetflow";
    REQUIRE(run("synth --out " + trace + " --seconds 300 --background-flows 600 --bursts 4 --flows-per-burst 10 --decoys 4 --seed 3") == 0);

    const std::string features = dir / "features.csv";
    REQUIRE(run("extract --in " + trace + " --window 1 --out " + features) == 0);
    std::ifstream csv(features);
    std::string header;
    std::getline(csv, header);
    CHECK(std::count(header.begin(), header.end(), ',') == 46);
    CHECK(header.rfind("window_index,", 0) == 0);
    CHECK(fs::exists(features + ".config.toml"));

    const std::string model = dir / "model.json";
    REQUIRE(run("train --in " + features + " --out " + model + " --estimators 10 --seed 1") == 0);
    const std::string report = dir / "report.csv";
    REQUIRE(run("eval --model " + model + " --in " + features + " --out " + report) == 0);
    CHECK(slurp(report).rfind("name,threshold,tp,fp,fn,tn,", 0) == 0);
    REQUIRE(run("importance --model " + model + " --top-k 5 --out " + (dir / "imp.csv")) == 0);
    CHECK(slurp(dir / "imp.csv").rfind("rank,feature_id,name,score\n", 0) == 0);

    // Identical invocations give identical bytes.
    const std::string model2 = dir / "model2.json";
    REQUIRE(run("train --in " + features + " --out " + model2 + " --estimators 10 --seed 1 --jobs 2") == 0);
    CHECK(slurp(model) == slurp(model2));
    const std::string mlp = dir / "mlp.json", mlp2 = dir / "mlp2.json";
    REQUIRE(run("train --model mlp --epochs 3 --in " + features + " --out " + mlp) == 0);
    REQUIRE(run("train --model mlp --epochs 3 --in " + features + " --out " + mlp2) == 0);
    CHECK(slurp(mlp) == slurp(mlp2));
    REQUIRE(run("eval --model " + mlp + " --in " + features + " --out " + (dir / "mlp_report.csv")) == 0);

    REQUIRE(run("kfold --in " + features + " --k 3 --estimators 5 --out " + (dir / "kfold.csv")) == 0);
    const std::string kf = slurp(dir / "kfold.csv");
    CHECK(kf.find("\nfold3,") != std::string::npos);
    CHECK(kf.find("\nmean,") != std::string::npos);
}

TEST_CASE("exit codes") {
    Workdir dir;
    CHECK(run("") == 1);
    CHECK(run("train --bogus") == 1);
    CHECK(run("extract --in x --window -1 --out y") == 1);
    CHECK(run("extract --in " + (dir / "absent.binetflow") + " --out " + (dir / "f.csv")) == 2);
    std::ofstream(dir / "junk.binetflow") << "this is not a netflow file\n";
    CHECK(run("extract --in " + (dir / "junk.binetflow") + " --out " + (dir / "f.csv")) == 2);
    std::ofstream(dir / "bad.cfg") << "colour = blue\n";
    CHECK(run("sweep --config " + (dir / "bad.cfg") + " --in " + (dir / "junk.binetflow") + " --out " + (dir / "sweep")) == 1);
}
