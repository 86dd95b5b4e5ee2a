#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "lpool/io.hpp"
#include "testutil.hpp"

#ifndef LPOOL_CLI_PATH
#error "LPOOL_CLI_PATH must point at the built CLI binary"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "lpool_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    const fs::path out_path = work_dir() / "stdout.txt";
    const fs::path err_path = work_dir() / "stderr.txt";
    const std::string cmd = std::string(LPOOL_CLI_PATH) + " " + args + " > " +
                            out_path.string() + " 2> " + err_path.string();
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

// Value of the last `key=...` occurrence in a key=value report.
std::string report_value(const std::string& text, const std::string& key) {
    std::string value;
    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ' ')) {
            if (field.rfind(key + "=", 0) == 0)
                value = field.substr(key.size() + 1);
        }
    }
    return value;
}

fs::path planted_file(std::uint64_t seed, bool shuffle_labels = false) {
    auto data = testutil::planted_dataset(seed, 8, 8, 2, 120, 19, 2.5);
    if (shuffle_labels) {
        testutil::Rng rng(seed + 999);
        std::shuffle(data.labels.begin(), data.labels.end(), rng);
    }
    const fs::path path =
        work_dir() / ("data_" + std::to_string(seed) +
                      (shuffle_labels ? "_shuffled.fmp" : ".fmp"));
    lpool::write_dataset(data, path.string());
    return path;
}

} // namespace

TEST_CASE("fit writes an operator and a parseable summary") {
    const fs::path data = planted_file(1);
    const fs::path op = work_dir() / "fit1.pool";
    const RunResult r = run_cli("fit --input " + data.string() + " --output " +
                                op.string() +
                                " --alpha 0 --scale 2 --norm l2 --eigvecs 1");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(op));
    CHECK(report_value(r.out, "locations") == "16");
    CHECK(!report_value(r.out, "residual_max").empty());
    CHECK(report_value(r.out, "output") == op.string());

    // Residuals in the summary are tiny for a healthy fit.
    CHECK(std::stod(report_value(r.out, "residual_max")) < 1e-6);
}

TEST_CASE("fitting twice produces byte-identical operator files") {
    const fs::path data = planted_file(2);
    const fs::path op1 = work_dir() / "det1.pool";
    const fs::path op2 = work_dir() / "det2.pool";
    const std::string flags =
        " --alpha 5 --scale 2 --norm l1 --eigvecs 2 --max-per-class 50";
    CHECK(run_cli("fit --input " + data.string() + " --output " + op1.string() +
                  flags)
              .exit_code == 0);
    CHECK(run_cli("fit --input " + data.string() + " --output " + op2.string() +
                  flags)
              .exit_code == 0);
    CHECK(slurp(op1) == slurp(op2));
    CHECK(!slurp(op1).empty());
}

TEST_CASE("usage errors exit with code 1") {
    const fs::path data = planted_file(3);
    const fs::path op = work_dir() / "usage.pool";
    CHECK(run_cli("fit --input " + data.string() + " --output " + op.string() +
                  " --alpha 0 --scale 2 --norm l2 --eigvecs 3")
              .exit_code == 1);
    CHECK(run_cli("fit --input " + data.string() + " --output " + op.string() +
                  " --alpha 0 --scale 2 --norm l3 --eigvecs 1")
              .exit_code == 1);
    CHECK(run_cli("eval --input " + data.string()).exit_code == 1);
    CHECK(run_cli("nonsense").exit_code == 1);
}

TEST_CASE("malformed input exits with code 2") {
    const fs::path garbage = work_dir() / "garbage.fmp";
    std::ofstream(garbage) << "this is not a dataset";
    const fs::path op = work_dir() / "never.pool";
    const RunResult r =
        run_cli("fit --input " + garbage.string() + " --output " + op.string() +
                " --alpha 0 --scale 2 --norm l2 --eigvecs 1");
    CHECK(r.exit_code == 2);
    CHECK(!r.err.empty());
}

TEST_CASE("shape mismatches exit with code 3") {
    const fs::path data = planted_file(4);
    const fs::path op = work_dir() / "shape.pool";
    CHECK(run_cli("fit --input " + data.string() + " --output " + op.string() +
                  " --alpha 0 --scale 3 --norm l2 --eigvecs 1")
              .exit_code == 3);
}

TEST_CASE("numerical failures exit with code 4") {
    // All-zero data leaves nothing positive definite to factor.
    lpool::LabeledDataset zeros;
    zeros.num_classes = 2;
    for (int k = 0; k < 8; ++k) {
        lpool::FeatureMap fm;
        fm.shape = {4, 4};
        fm.values = lpool::Matrix::Zero(16, 1);
        zeros.samples.push_back(fm);
        zeros.labels.push_back(k % 2 + 1);
    }
    const fs::path path = work_dir() / "zeros.fmp";
    lpool::write_dataset(zeros, path.string());
    const RunResult r =
        run_cli("fit --input " + path.string() + " --output " +
                (work_dir() / "zeros.pool").string() +
                " --alpha 0 --scale 2 --norm l2 --eigvecs 1");
    CHECK(r.exit_code == 4);
    CHECK(!r.err.empty());
}

TEST_CASE("table-style hyperparameters are accepted") {
    const fs::path data = planted_file(5);
    const fs::path op = work_dir() / "table.pool";
    CHECK(run_cli("fit --input " + data.string() + " --output " + op.string() +
                  " --alpha 5 --scale 2 --norm l1 --eigvecs 1")
              .exit_code == 0);
}

TEST_CASE("grand mean convention flag") {
    const fs::path data = planted_file(50);
    const fs::path op = work_dir() / "gm.pool";
    CHECK(run_cli("fit --input " + data.string() + " --output " + op.string() +
                  " --alpha 0 --scale 2 --norm l2 --eigvecs 1"
                  " --grand-mean weighted")
              .exit_code == 0);
    CHECK(run_cli("fit --input " + data.string() + " --output " + op.string() +
                  " --alpha 0 --scale 2 --norm l2 --eigvecs 1"
                  " --grand-mean sometimes")
              .exit_code == 1);
}

TEST_CASE("apply produces the pooled dataset file") {
    const fs::path data = planted_file(6);
    const fs::path op = work_dir() / "apply.pool";
    REQUIRE(run_cli("fit --input " + data.string() + " --output " + op.string() +
                    " --alpha 0 --scale 2 --norm l2 --eigvecs 2")
                .exit_code == 0);
    const fs::path pooled = work_dir() / "pooled.fmp";
    const RunResult r = run_cli("apply --input " + data.string() +
                                " --operator " + op.string() + " --output " +
                                pooled.string());
    CHECK(r.exit_code == 0);

    const lpool::LabeledDataset out = lpool::read_dataset(pooled.string());
    CHECK(out.shape().rows == 4);
    CHECK(out.shape().cols == 4);
    CHECK(out.channels() == 4); // 2 channels x 2 eigvecs
    CHECK(out.num_samples() == 120);

    // Round trip: the written file decodes to exactly what a fresh read gives.
    CHECK(lpool::encode_dataset(out) == slurp(pooled));

    // Mismatched operator/dataset pairs are shape errors.
    const fs::path small = work_dir() / "small.fmp";
    auto small_data = testutil::planted_dataset(7, 4, 4, 2, 20, 6, 1.0);
    lpool::write_dataset(small_data, small.string());
    CHECK(run_cli("apply --input " + small.string() + " --operator " +
                  op.string() + " --output " + (work_dir() / "x.fmp").string())
              .exit_code == 3);
}

TEST_CASE("eval reports the learned operator ahead of the average baseline") {
    const fs::path data = planted_file(8);
    const fs::path op = work_dir() / "eval.pool";
    REQUIRE(run_cli("fit --input " + data.string() + " --output " + op.string() +
                    " --alpha 0 --scale 2 --norm l2 --eigvecs 1")
                .exit_code == 0);

    const RunResult learned =
        run_cli("eval --input " + data.string() + " --operator " + op.string());
    CHECK(learned.exit_code == 0);
    CHECK(report_value(learned.out, "locations") == "16");
    const RunResult average = run_cli("eval --input " + data.string() +
                                      " --baseline average --scale 2");
    CHECK(average.exit_code == 0);

    const double learned_aggregate =
        std::stod(report_value(learned.out, "aggregate"));
    const double average_aggregate =
        std::stod(report_value(average.out, "aggregate"));
    CHECK(learned_aggregate >= average_aggregate * (1.0 - 1e-9));

    // Shuffled labels leave almost nothing to separate.
    const fs::path shuffled = planted_file(8, true);
    const fs::path op_shuffled = work_dir() / "eval_shuffled.pool";
    REQUIRE(run_cli("fit --input " + shuffled.string() + " --output " +
                    op_shuffled.string() +
                    " --alpha 0 --scale 2 --norm l2 --eigvecs 1")
                .exit_code == 0);
    const RunResult noise = run_cli("eval --input " + shuffled.string() +
                                    " --operator " + op_shuffled.string());
    CHECK(noise.exit_code == 0);
    const double noise_aggregate = std::stod(report_value(noise.out, "aggregate"));
    CHECK(noise_aggregate <= 0.2 * learned_aggregate);
}

TEST_CASE("heatmap exports csv and pgm and range-checks the location") {
    const fs::path data = planted_file(9);
    const fs::path op = work_dir() / "heat.pool";
    REQUIRE(run_cli("fit --input " + data.string() + " --output " + op.string() +
                    " --alpha 5 --scale 2 --norm l2 --eigvecs 1")
                .exit_code == 0);

    const fs::path csv = work_dir() / "heat.csv";
    CHECK(run_cli("heatmap --operator " + op.string() +
                  " --location 1 --eigvec 1 --output " + csv.string())
              .exit_code == 0);
    std::uint32_t lines = 0;
    std::stringstream ss(slurp(csv));
    std::string line;
    while (std::getline(ss, line)) ++lines;
    CHECK(lines == 8);

    const fs::path pgm = work_dir() / "heat.pgm";
    CHECK(run_cli("heatmap --operator " + op.string() +
                  " --location 16 --eigvec 1 --format pgm --output " +
                  pgm.string())
              .exit_code == 0);
    CHECK(slurp(pgm).substr(0, 3) == "P5\n");

    CHECK(run_cli("heatmap --operator " + op.string() +
                  " --location 17 --eigvec 1 --output " + csv.string())
              .exit_code == 3);
    CHECK(run_cli("heatmap --operator " + op.string() +
                  " --location 1 --eigvec 2 --output " + csv.string())
              .exit_code == 3);

    // Heatmap output is deterministic.
    const fs::path csv2 = work_dir() / "heat2.csv";
    CHECK(run_cli("heatmap --operator " + op.string() +
                  " --location 1 --eigvec 1 --output " + csv2.string())
              .exit_code == 0);
    CHECK(slurp(csv) == slurp(csv2));
}
