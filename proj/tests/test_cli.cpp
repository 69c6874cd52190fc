#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "tactile/calib.hpp"
#include "tactile/cli.hpp"
#include "tactile/eval.hpp"
#include "tactile/sim.hpp"
#include "tactile/textio.hpp"
#include "test_util.hpp"

using namespace tactile;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string path_str(const fs::path& p) { return p.string(); }

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("simulate") {
  const auto dir = testing::scratch_dir("cli_sim");
  const auto r = run({"simulate", "--pair", "toothbrush_vs_counter", "--seed", "7", "--out", path_str(dir / "a")});
  CHECK(r.code == 0);
  CHECK(r.out.find("20 trials") != std::string::npos);
  std::size_t csv = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) csv += e.path().extension() == ".csv";
  CHECK(csv == 20);

  // same flags into another directory give byte-identical files
  CHECK(run({"simulate", "--pair", "toothbrush_vs_counter", "--seed", "7", "--out", path_str(dir / "b")}).code == 0);
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    CHECK(textio::read_file(e.path()) == textio::read_file(dir / "b" / e.path().filename()));
  }

  const auto bogus = run({"simulate", "--pair", "bogus", "--out", path_str(dir / "c")});
  CHECK(bogus.code == 1);
  CHECK(bogus.err.find("toothbrush_vs_counter") != std::string::npos);
  CHECK(bogus.err.find("toilet_seat_vs_toilet_tank") != std::string::npos);

  CHECK(run({"simulate", "--pair", "towel_vs_towel_rack", "--trials", "2", "--out", path_str(dir / "d")}).code == 0);
  CHECK(dataset::read_dataset(dir / "d").trials.size() == 4);
}

TEST_CASE("simulate with a profiles file") {
  const auto dir = testing::scratch_dir("cli_profiles");
  auto profiles = sim::builtin_profiles();
  auto sponge = profiles.at("towel");
  sponge.name = "sponge";
  profiles.emplace("sponge", sponge);
  textio::write_file(dir / "profiles.json", sim::profiles_to_json(profiles));
  const auto r = run({"simulate", "--pair", "sponge_vs_counter", "--profiles", path_str(dir / "profiles.json"),
                      "--trials", "3", "--out", path_str(dir / "out")});
  CHECK(r.code == 0);
  CHECK(dataset::read_dataset(dir / "out").pair_name == "sponge_vs_counter");

  textio::write_file(dir / "broken.json", "{not json");
  CHECK(run({"simulate", "--pair", "a_vs_b", "--profiles", path_str(dir / "broken.json"), "--out",
             path_str(dir / "x")})
            .code == 2);
}

TEST_CASE("calibrate") {
  const auto dir = testing::scratch_dir("cli_calib");
  textio::write_file(dir / "thermistor.csv", calib::fixture_to_csv(sim::thermistor_fixture(200, 0.5, 1)));
  const auto r = run({"calibrate", "--fixture", path_str(dir / "thermistor.csv"), "--out", path_str(dir / "calib_therm.json")});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("r2=0.99", 0) == 0);
  const auto file = calib::read_calibration(dir / "calib_therm.json");
  CHECK(file.model.degree == 3);
  CHECK(file.kind == "thermistor");

  calib::Fixture cubic;
  for (int c = 0; c <= 10; ++c) {
    cubic.counts.push_back(c);
    cubic.values.push_back(2.0 - c + 0.5 * c * c * c);
  }
  textio::write_file(dir / "cubic.csv", calib::fixture_to_csv(cubic));
  const auto exact = run({"calibrate", "--fixture", path_str(dir / "cubic.csv"), "--out", path_str(dir / "c.json")});
  CHECK(exact.code == 0);
  CHECK(exact.out == "r2=1.000000\n");

  textio::write_file(dir / "two.csv", "counts,value\n1,2\n3,4\n");
  CHECK(run({"calibrate", "--fixture", path_str(dir / "two.csv"), "--out", path_str(dir / "t.json")}).code == 2);
  CHECK(run({"calibrate", "--fixture", path_str(dir / "absent.csv"), "--out", path_str(dir / "t.json")}).code == 2);
}

TEST_CASE("evaluate, train, predict and report") {
  const auto dir = testing::scratch_dir("cli_eval");
  const auto data = path_str(dir / "data");
  REQUIRE(run({"simulate", "--pair", "toothbrush_vs_counter", "--seed", "3", "--out", data}).code == 0);

  const auto r = run({"evaluate", "--data", data, "--report", path_str(dir / "report.json"), "--model",
                      path_str(dir / "model.txt")});
  CHECK(r.code == 0);
  CHECK(r.out == "toothbrush_vs_counter accuracy=1.000 mode=leak_free\n");
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "model.txt"));

  const auto paper = run({"evaluate", "--data", data, "--paper-mode", "--report", path_str(dir / "paper.json")});
  CHECK(paper.code == 0);
  CHECK(paper.out.find("mode=paper_mode") != std::string::npos);

  CHECK(run({"evaluate", "--data", data, "--folds", "1"}).code == 1);
  CHECK(run({"evaluate", "--data", data, "--c", "-1"}).code == 1);
  const auto too_many = run({"evaluate", "--data", data, "--components", "200", "--report", path_str(dir / "x.json")});
  CHECK(too_many.code == 3);
  CHECK(too_many.err.find("KTooLarge") != std::string::npos);
  CHECK(run({"evaluate", "--data", path_str(dir / "nowhere")}).code == 2);

  const auto train = run({"train", "--data", data, "--out", path_str(dir / "full.txt")});
  CHECK(train.code == 0);
  CHECK(textio::read_file(dir / "full.txt") == textio::read_file(dir / "model.txt"));

  const auto predict = run({"predict", "--model", path_str(dir / "full.txt"), "--data", data});
  CHECK(predict.code == 0);
  CHECK(predict.out.find("accuracy=1.000") != std::string::npos);
  CHECK(count_lines(predict.out) == 21);

  const auto plots = dir / "plots";
  const auto rep = run({"report", "--report", path_str(dir / "report.json"), "--report", path_str(dir / "paper.json"),
                        "--plot-data", path_str(plots), "--data", data, "--trial", "counter_02"});
  CHECK(rep.code == 0);
  const auto table = textio::read_file(plots / "accuracy_table.csv");
  CHECK(count_lines(table) == 3);
  CHECK(table.find("toothbrush_vs_counter,toothbrush,counter,leak_free,1,") != std::string::npos);
  for (const char* m : {"force", "mic", "accel"}) {
    const auto trace = textio::read_file(plots / ("trace_counter_02_" + std::string(m) + ".csv"));
    CHECK(count_lines(trace) == 2101);
    CHECK(trace.rfind("t_rel_s,value\n-0.2,", 0) == 0);
    CHECK(trace.find("\n0,") != std::string::npos);
  }

  CHECK(run({"report", "--report", path_str(dir / "missing.json"), "--plot-data", path_str(plots)}).code == 2);
  textio::write_file(dir / "bad.json", "{}");
  CHECK(run({"report", "--report", path_str(dir / "bad.json"), "--plot-data", path_str(plots)}).code == 2);
  CHECK(run({"predict", "--model", path_str(dir / "bad.json"), "--data", data}).code == 2);
}

TEST_CASE("evaluate is byte-for-byte reproducible") {
  const auto dir = testing::scratch_dir("cli_repro");
  for (const char* sub : {"a", "b"}) {
    const auto d = dir / sub;
    REQUIRE(run({"simulate", "--pair", "towel_vs_towel_rack", "--seed", "11", "--out", path_str(d / "data")}).code == 0);
    REQUIRE(run({"evaluate", "--data", path_str(d / "data"), "--seed", "5", "--report", path_str(d / "report.json"),
                 "--model", path_str(d / "model.txt")})
                .code == 0);
  }
  CHECK(textio::read_file(dir / "a" / "report.json") == textio::read_file(dir / "b" / "report.json"));
  CHECK(textio::read_file(dir / "a" / "model.txt") == textio::read_file(dir / "b" / "model.txt"));
}

TEST_CASE("--help documents every flag with the pipeline defaults") {
  const auto top = run({"--help"});
  CHECK(top.code == 0);
  for (const char* sub : {"simulate", "calibrate", "evaluate", "train", "predict", "report"}) {
    CHECK(top.out.find(sub) != std::string::npos);
    CHECK(run({sub, "--help"}).code == 0);
  }
  const auto ev = run({"evaluate", "--help"}).out;
  const eval::PipelineConfig defaults;
  CHECK(ev.find("--components") != std::string::npos);
  CHECK(ev.find(std::to_string(defaults.k_components)) != std::string::npos);
  CHECK(ev.find("--folds") != std::string::npos);
  CHECK(ev.find(std::to_string(defaults.folds)) != std::string::npos);
  CHECK(ev.find("--paper-mode") != std::string::npos);
  CHECK(ev.find("divide_by_variance") != std::string::npos);
  CHECK(ev.find("--report") != std::string::npos);
  CHECK(ev.find("--seed") != std::string::npos);
  CHECK(ev.find("--c") != std::string::npos);

  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"simulate"}).code == 1);
}

TEST_CASE("executable propagates exit codes") {
  const std::string exe = TACTILE_PIPE_EXE;
  CHECK(std::system((exe + " --help > /dev/null").c_str()) == 0);
  const int status = std::system((exe + " simulate --pair bogus --out /tmp/tactile_never 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(status) == 1);
}
