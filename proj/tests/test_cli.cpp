#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

// End-to-end checks of the installed binary; the harness passes its path via
// the CFAUDIT_BIN environment variable.

namespace {

namespace fs = std::filesystem;

std::string binary() {
    const char* bin = std::getenv("CFAUDIT_BIN");
    REQUIRE(bin != nullptr);
    return bin;
}

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "cfaudit_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("cli usage errors exit with code 2") {
    CHECK(run("--no-such-flag") == 2);
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("synth") == 2);                      // missing required --out
    CHECK(run("audit --cohort x --format bogus") == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("synth, validate, audit, report pipeline") {
    TempDir dir;
    const std::string cohort = dir.file("cohort.csv");
    const std::string cfg_path = dir.file("synth.json");
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"n_patients": 250, "seed": 5})";
    }
    CHECK(run("synth --config " + cfg_path + " --out " + cohort) == 0);
    CHECK(fs::exists(cohort));

    CHECK(run("validate --cohort " + cohort) == 0);
    CHECK(run("validate --cohort " + cohort + " --strict") == 0);

    // seed flag overrides the config seed deterministically
    const std::string cohort_b = dir.file("cohort_b.csv");
    const std::string cohort_c = dir.file("cohort_c.csv");
    CHECK(run("synth --config " + cfg_path + " --seed 6 --out " + cohort_b) == 0);
    CHECK(run("synth --config " + cfg_path + " --seed 6 --out " + cohort_c) == 0);
    {
        std::ifstream b(cohort_b), c(cohort_c), a(cohort);
        const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        const std::string sc((std::istreambuf_iterator<char>(c)), std::istreambuf_iterator<char>());
        const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        CHECK(sb == sc);
        CHECK(sb != sa);
    }

    const std::string out = dir.file("audit_out");
    CHECK(run("audit --cohort " + cohort + " --out " + out +
              " --tasks mortality --models logistic --k 3 --format both") == 0);
    CHECK(fs::exists(out + "/report.json"));
    CHECK(fs::exists(out + "/records.csv"));
    CHECK(fs::exists(out + "/tests.csv"));
    CHECK(fs::exists(out + "/plot_table.csv"));
    CHECK(fs::exists(out + "/folds_mortality.csv"));

    const std::string out2 = dir.file("report_out");
    CHECK(run("report --in " + out + "/report.json --out " + out2 + " --summary") == 0);
    CHECK(fs::exists(out2 + "/records.csv"));
}

TEST_CASE("validation failures exit with code 1") {
    TempDir dir;
    const std::string bad = dir.file("bad.csv");
    {
        std::ofstream out(bad);
        out << "not,a,cohort\n1,2,3\n";
    }
    CHECK(run("validate --cohort " + bad) == 1);
    CHECK(run("audit --cohort " + bad + " --out " + dir.file("o")) == 1);
    CHECK(run("audit --cohort " + dir.file("missing.csv") + " --out " + dir.file("o")) == 1);
    CHECK(run("report --in " + dir.file("missing.json")) == 1);
}

TEST_CASE("corrupted rows skip by default and fail strict validation") {
    TempDir dir;
    const std::string cohort = dir.file("cohort.csv");
    {
        std::ofstream cfg(dir.file("s.json"));
        cfg << R"({"n_patients": 60})";
    }
    REQUIRE(run("synth --config " + dir.file("s.json") + " --out " + cohort) == 0);
    {
        std::ofstream out(cohort, std::ios::app);
        out << "x1,p1,95,69,,White,Male,50,1,,,,,,,,,,,,,,,,,,,,5,1,0,1,1,1,1,5,1,0\n";
    }
    CHECK(run("validate --cohort " + cohort) == 1);
    CHECK(run("validate --cohort " + cohort + " --strict") == 1);
}

TEST_CASE("CFAUDIT_OUT provides the default output directory") {
    TempDir dir;
    const std::string cohort = dir.file("cohort.csv");
    {
        std::ofstream cfg(dir.file("s.json"));
        cfg << R"({"n_patients": 200})";
    }
    REQUIRE(run("synth --config " + dir.file("s.json") + " --out " + cohort) == 0);
    const std::string env_out = dir.file("env_out");
    const std::string cmd = "CFAUDIT_OUT=" + env_out + " " + binary() + " audit --cohort " + cohort +
                            " --tasks mortality --models logistic --k 2 >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(env_out + "/report.json"));
}
