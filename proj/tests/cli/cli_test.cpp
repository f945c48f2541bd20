// Runs the dspose binary end to end on tiny synthetic datasets.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dspose/checkpoint.hpp"
#include "dspose/config.hpp"
#include "dspose/dataset.hpp"
#include "temp_dir.hpp"

using namespace dspose;
namespace fs = std::filesystem;

namespace {

// Runs `dspose <args>` with stderr captured to `err` (if given); returns the
// exit code.
int run(const std::string& args, const fs::path& err = {}) {
  std::string cmd = std::string(DSPOSE_CLI) + " " + args;
  cmd += err.empty() ? " 2>/dev/null" : " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Rows of a CSV file without the header, split on commas.
std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

void synth(const test::TempDir& dir, const std::string& name, int count, int first = 0) {
  REQUIRE(run("synth --seed 3 --count " + std::to_string(count) + " --first " + std::to_string(first) +
              " --out " + q(dir / name)) == 0);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth writes the requested number of records") {
  test::TempDir dir;
  synth(dir, "data", 10);
  const Dataset ds = load_dataset(dir / "data" / "manifest.json");
  CHECK(ds.manifest.records.size() == 10);
  CHECK(ds.images.size() == 10);
  CHECK(ds.manifest.torso_ratio > 0.0);
}

TEST_CASE("synth is deterministic") {
  test::TempDir dir;
  synth(dir, "a", 4);
  synth(dir, "b", 4);
  CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));
  for (const auto& e : fs::directory_iterator(dir / "a" / "images")) {
    CHECK(slurp(e.path()) == slurp(dir / "b" / "images" / e.path().filename()));
  }
}

TEST_CASE("invalid configuration exits 1 and names the key") {
  test::TempDir dir;
  std::ofstream(dir / "bad.cfg") << "epochs = 2\nlearnin_rate = 0.1\n";
  CHECK(run("synth --config " + q(dir / "bad.cfg") + " --out " + q(dir / "o"), dir / "err.txt") == 1);
  CHECK(slurp(dir / "err.txt").find("learnin_rate") != std::string::npos);
  CHECK(run("synth --set k=0 --out " + q(dir / "o")) == 1);
  CHECK(run("train --out " + q(dir / "o")) == 1);
  CHECK(run("bogus") == 1);
}

TEST_CASE("runtime failures exit 2") {
  test::TempDir dir;
  synth(dir, "data", 1);
  std::ofstream(dir / "junk.bin") << "not a checkpoint";
  CHECK(run("estimate --data " + q(dir / "data" / "manifest.json") + " --checkpoint " + q(dir / "junk.bin") +
            " --out " + q(dir / "o")) == 2);
}

TEST_CASE("missing images exit 1 naming the file") {
  test::TempDir dir;
  synth(dir, "data", 2);
  fs::remove(dir / "data" / "images" / "000001.ppm");
  CHECK(run("estimate --oracle --data " + q(dir / "data" / "manifest.json") + " --out " + q(dir / "o"),
            dir / "err.txt") == 1);
  CHECK(slurp(dir / "err.txt").find("000001.ppm") != std::string::npos);
}

TEST_CASE("zero learning rate leaves the initial parameters") {
  test::TempDir dir;
  synth(dir, "data", 2);
  REQUIRE(run("train --seed 9 --set epochs=1 --set learning_rate=0 --data " + q(dir / "data" / "manifest.json") +
              " --out " + q(dir / "run")) == 0);
  const Checkpoint ck = load_checkpoint(dir / "run" / "checkpoint.bin");
  RunConfig cfg;
  cfg.set_seed(9);
  CHECK(ck.params == init_params(cfg.network, cfg.train.seed));
  CHECK(csv_rows(dir / "run" / "loss.csv").size() == 1);
}

TEST_CASE("training overfits a single image") {
  test::TempDir dir;
  synth(dir, "data", 1);
  REQUIRE(run("train --set epochs=30 --set decay_every=1000 --set batch_size=4 --data " +
              q(dir / "data" / "manifest.json") + " --out " + q(dir / "run")) == 0);
  const auto rows = csv_rows(dir / "run" / "loss.csv");
  REQUIRE(rows.size() == 30);
  CHECK(std::stod(rows.back()[2]) < 0.1 * std::stod(rows.front()[2]));
}

TEST_CASE("resuming reproduces an uninterrupted run bit for bit") {
  test::TempDir dir;
  synth(dir, "data", 3);
  const std::string common = " --set momentum=0.9 --set decay_every=2 --set checkpoint_every=2 --data " +
                             q(dir / "data" / "manifest.json");
  REQUIRE(run("train --set epochs=4" + common + " --out " + q(dir / "full")) == 0);
  REQUIRE(fs::exists(dir / "full" / "checkpoint-epoch0002.bin"));
  REQUIRE(run("train --set epochs=4 --resume " + q(dir / "full" / "checkpoint-epoch0002.bin") + common +
              " --out " + q(dir / "resumed")) == 0);
  CHECK(slurp(dir / "full" / "checkpoint.bin") == slurp(dir / "resumed" / "checkpoint.bin"));
  CHECK(csv_rows(dir / "resumed" / "loss.csv").size() == 2);
}

TEST_CASE("oracle estimation recovers the true poses") {
  test::TempDir dir;
  synth(dir, "data", 3);
  REQUIRE(run("estimate --oracle --heatmaps --data " + q(dir / "data" / "manifest.json") + " --out " +
              q(dir / "est")) == 0);
  const Dataset ds = load_dataset(dir / "data" / "manifest.json");
  const auto est = pose_records_from_json(slurp(dir / "est" / "poses.json"));
  REQUIRE(est.size() == 3);
  for (std::size_t i = 0; i < est.size(); ++i) {
    CHECK(est[i].image == ds.manifest.records[i].image);
    CHECK(est[i].selected.size() == 14);
    for (std::size_t j = 0; j < 14; ++j) {
      CHECK(distance(est[i].pose[j], ds.manifest.records[i].pose[j]) <= 1e-9);
    }
  }
  std::size_t pgm = 0;
  for (const auto& e : fs::directory_iterator(dir / "est" / "heatmaps")) pgm += e.path().extension() == ".pgm";
  CHECK(pgm == 3 * 14);
  CHECK(fs::exists(dir / "est" / "heatmaps" / "000000_scale.csv"));
}

TEST_CASE("network estimation is deterministic and evaluation reports every metric") {
  test::TempDir dir;
  synth(dir, "data", 3);
  synth(dir, "test", 2, 3);
  REQUIRE(run("train --set epochs=1 --data " + q(dir / "data" / "manifest.json") + " --out " + q(dir / "run")) == 0);
  const std::string est = "estimate --checkpoint " + q(dir / "run" / "checkpoint.bin") + " --data " +
                          q(dir / "test" / "manifest.json") + " --out ";
  REQUIRE(run(est + q(dir / "e1")) == 0);
  REQUIRE(run(est + q(dir / "e2")) == 0);
  CHECK(slurp(dir / "e1" / "poses.json") == slurp(dir / "e2" / "poses.json"));

  REQUIRE(run("eval --estimates " + q(dir / "e1" / "poses.json") + " --data " + q(dir / "test" / "manifest.json") +
              " --checkpoint " + q(dir / "run" / "checkpoint.bin") + " --out " + q(dir / "eval")) == 0);
  CHECK(csv_rows(dir / "eval" / "pdj.csv").size() == 51);
  CHECK(csv_rows(dir / "eval" / "ap.csv").size() == 1);
  CHECK(slurp(dir / "eval" / "pdj.svg").find("<svg") == 0);
}

TEST_CASE("evaluating the truth scores 1 everywhere") {
  test::TempDir dir;
  synth(dir, "data", 3);
  const Dataset ds = load_dataset(dir / "data" / "manifest.json");
  std::vector<PoseRecord> truth;
  for (const auto& r : ds.manifest.records) truth.push_back(PoseRecord{r.image, r.pose, {}});
  std::ofstream(dir / "truth.json") << pose_records_to_json(truth, ds.manifest.joint_names);
  REQUIRE(run("eval --estimates " + q(dir / "truth.json") + " --data " + q(dir / "data" / "manifest.json") +
              " --step 0.1 --out " + q(dir / "eval")) == 0);
  const auto pcp = csv_rows(dir / "eval" / "pcp.csv");
  REQUIRE(pcp.size() == ds.manifest.limbs.size() + 1);
  for (const auto& row : pcp) CHECK(std::stod(row[3]) == 1.0);
  const auto pdj = csv_rows(dir / "eval" / "pdj.csv");
  CHECK(pdj.size() == 6);
  for (std::size_t i = 1; i < pdj.size(); ++i) CHECK(std::stod(pdj[i][1]) == 1.0);
}

TEST_CASE("ablation writes one row per input type") {
  test::TempDir dir;
  synth(dir, "data", 2);
  synth(dir, "test", 2, 2);
  REQUIRE(run("ablate --set epochs=1 --data " + q(dir / "data" / "manifest.json") + " --test " +
              q(dir / "test" / "manifest.json") + " --out " + q(dir / "abl")) == 0);
  const auto rows = csv_rows(dir / "abl" / "ablation.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][0] == "part");
  CHECK(rows[1][0] == "body");
  CHECK(rows[2][0] == "dual");
  CHECK(rows[0].size() == 16);
}

TEST_CASE("training with an ablation stores the tower mode") {
  test::TempDir dir;
  synth(dir, "data", 1);
  REQUIRE(run("train --ablation body --set epochs=1 --data " + q(dir / "data" / "manifest.json") + " --out " +
              q(dir / "run")) == 0);
  CHECK(load_checkpoint(dir / "run" / "checkpoint.bin").params.spec().towers == TowerMode::body_only);
}

}
