#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "fedflow/io.hpp"

namespace fs = std::filesystem;
using fedflow::read_file;
using fedflow::write_file_atomic;

namespace {

const char* cli_path() { return FEDFLOW_CLI_PATH; }

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fedflow_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string synth_spec_json() {
  return R"({
  "dimension": 4,
  "entities": [
    {"name": "e0", "clusters": [
      {"center": [0,0,0,0], "sigma": 0.4, "count": 160, "label": 0},
      {"center": [4,0,0,0], "sigma": 0.4, "count": 160, "label": 1}]},
    {"name": "e1", "clusters": [
      {"center": [0,0,0,0], "sigma": 0.4, "count": 160, "label": 0},
      {"center": [0,4,0,0], "sigma": 0.4, "count": 160, "label": 1}]},
    {"name": "e2", "clusters": [
      {"center": [0,0,0,0], "sigma": 0.4, "count": 160, "label": 0},
      {"center": [0,0,4,0], "sigma": 0.4, "count": 160, "label": 1}]}
  ]
})";
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("synth + run: outputs, cardinality, determinism across threads") {
  const auto dir = fresh_dir("run_determinism");
  write_file_atomic(dir / "spec.json", synth_spec_json());
  REQUIRE(run_cli("synth --spec " + (dir / "spec.json").string() + " --out " +
                      (dir / "data").string() + " --seed 5",
                  dir / "synth.log") == 0);
  CHECK(fs::exists(dir / "data" / "dataset.json"));
  CHECK(fs::exists(dir / "data" / "preprocess.json"));
  CHECK(fs::exists(dir / "data" / "manifest.json"));

  const std::string base_args = " --data " + (dir / "data").string() +
                                " --scenario dfl_gossip --model dt --rounds 4 --batch-size 40"
                                " --pca-k 4 --seed 9 --grace-period 20";
  REQUIRE(run_cli("run" + base_args + " --threads 1 --out " + (dir / "out1").string(),
                  dir / "run1.log") == 0);
  REQUIRE(run_cli("run" + base_args + " --threads 1 --out " + (dir / "out2").string(),
                  dir / "run2.log") == 0);
  REQUIRE(run_cli("run" + base_args + " --threads 4 --out " + (dir / "out4").string(),
                  dir / "run4.log") == 0);

  const auto metrics = read_file(dir / "out1" / "metrics.jsonl");
  CHECK(count_lines(metrics) == 4 * 3 * 2);  // rounds x entities x scopes
  CHECK(metrics == read_file(dir / "out2" / "metrics.jsonl"));
  CHECK(metrics == read_file(dir / "out4" / "metrics.jsonl"));
  CHECK(read_file(dir / "out1" / "ledger.csv") == read_file(dir / "out2" / "ledger.csv"));
  CHECK(read_file(dir / "out1" / "ledger.csv") == read_file(dir / "out4" / "ledger.csv"));
  for (int e = 0; e < 3; ++e) {
    const std::string model = "models/entity_" + std::to_string(e) + ".json";
    CHECK(read_file(dir / "out1" / model) == read_file(dir / "out4" / model));
  }
}

TEST_CASE("nfl writes an empty ledger (header only)") {
  const auto dir = fresh_dir("nfl_ledger");
  write_file_atomic(dir / "spec.json", synth_spec_json());
  REQUIRE(run_cli("synth --spec " + (dir / "spec.json").string() + " --out " +
                      (dir / "data").string(),
                  dir / "synth.log") == 0);
  REQUIRE(run_cli("run --data " + (dir / "data").string() + " --out " + (dir / "out").string() +
                      " --scenario nfl --model svm --rounds 2 --batch-size 40 --pca-k 4",
                  dir / "run.log") == 0);
  CHECK(read_file(dir / "out" / "ledger.csv") == "round,sender,receiver,bytes\n");
}

TEST_CASE("config file keys are honored and overridable") {
  const auto dir = fresh_dir("config_file");
  write_file_atomic(dir / "spec.json", synth_spec_json());
  REQUIRE(run_cli("synth --spec " + (dir / "spec.json").string() + " --out " +
                      (dir / "data").string(),
                  dir / "synth.log") == 0);
  write_file_atomic(dir / "run.conf",
                    "# comment\n"
                    "scenario = dfl\n"
                    "model = svm\n"
                    "rounds = 3\n"
                    "batch_size = 40\n"
                    "pca_k = 4\n"
                    "data_dir = " + (dir / "data").string() + "\n"
                    "out_dir = " + (dir / "outconf").string() + "\n");
  REQUIRE(run_cli("run --config " + (dir / "run.conf").string(), dir / "runc.log") == 0);
  CHECK(count_lines(read_file(dir / "outconf" / "metrics.jsonl")) == 3 * 3 * 2);

  // flag beats file: 1 round instead of 3
  REQUIRE(run_cli("run --config " + (dir / "run.conf").string() + " --rounds 1 --out " +
                      (dir / "outflag").string(),
                  dir / "runf.log") == 0);
  CHECK(count_lines(read_file(dir / "outflag" / "metrics.jsonl")) == 1 * 3 * 2);

  write_file_atomic(dir / "bad.conf", "unknown_key = 3\n");
  CHECK(run_cli("run --config " + (dir / "bad.conf").string(), dir / "runbad.log") == 2);
}

TEST_CASE("error classes map to exit codes") {
  const auto dir = fresh_dir("exit_codes");
  // missing Label column -> data error (3)
  write_file_atomic(dir / "bad.csv", "a,b,SourceIP,DestinationIP\n1,2,x,y\n");
  write_file_atomic(dir / "partition.json",
                    R"({"schema": {"feature_columns": ["a","b"]},
                        "entities": [{"id":0,"name":"all","ips":["y"]}]})");
  CHECK(run_cli("prepare --csv " + (dir / "bad.csv").string() + " --partition " +
                    (dir / "partition.json").string() + " --out " + (dir / "out").string(),
                dir / "prep.log") == 3);

  // unknown scenario -> config error (2)
  write_file_atomic(dir / "spec.json", synth_spec_json());
  REQUIRE(run_cli("synth --spec " + (dir / "spec.json").string() + " --out " +
                      (dir / "data").string(),
                  dir / "synth.log") == 0);
  CHECK(run_cli("run --data " + (dir / "data").string() + " --out " + (dir / "o").string() +
                    " --scenario warp",
                dir / "runw.log") == 2);

  // missing required flag -> usage error (2)
  CHECK(run_cli("synth --out " + (dir / "d2").string(), dir / "usage.log") == 2);
}

TEST_CASE("prepare prints the per-entity count table") {
  const auto dir = fresh_dir("prepare_table");
  std::string csv = "a,b,SourceIP,DestinationIP,Label\n";
  for (int i = 0; i < 40; ++i) {
    const bool second = i % 4 == 0;
    csv += std::to_string(i) + "," + std::to_string(i % 7) + ",10.0.0.1," +
           (second ? "1.1.1.1" : "8.8.8.8") + "," + (i % 2 ? "Malicious" : "Benign") + "\n";
  }
  write_file_atomic(dir / "flows.csv", csv);
  write_file_atomic(dir / "partition.json",
                    R"({"schema": {"feature_columns": ["a","b"]},
                        "entities": [{"id":0,"name":"google","ips":["8.8.8.8"]},
                                     {"id":1,"name":"cloudflare","ips":["1.1.1.1"]}]})");
  REQUIRE(run_cli("prepare --csv " + (dir / "flows.csv").string() + " --partition " +
                      (dir / "partition.json").string() + " --out " + (dir / "out").string() +
                      " --global-frac 0.1 --local-frac 0.1",
                  dir / "prep.log") == 0);
  const auto log = read_file(dir / "prep.log");
  CHECK(log.find("google") != std::string::npos);
  CHECK(log.find("30") != std::string::npos);  // 30 flows to google
  CHECK(log.find("10") != std::string::npos);  // 10 to cloudflare
  CHECK(fs::exists(dir / "out" / "shards" / "entity_0_train.csv"));

  // rerun with the same seed reproduces identical artifacts
  REQUIRE(run_cli("prepare --csv " + (dir / "flows.csv").string() + " --partition " +
                      (dir / "partition.json").string() + " --out " + (dir / "out2").string() +
                      " --global-frac 0.1 --local-frac 0.1",
                  dir / "prep2.log") == 0);
  CHECK(read_file(dir / "out" / "dataset.json") == read_file(dir / "out2" / "dataset.json"));
  CHECK(read_file(dir / "out" / "preprocess.json") ==
        read_file(dir / "out2" / "preprocess.json"));
  CHECK(read_file(dir / "out" / "shards" / "entity_0_train.csv") ==
        read_file(dir / "out2" / "shards" / "entity_0_train.csv"));
}

TEST_CASE("shipped cira partition spec drives the dohlyzer pipeline") {
  const auto dir = fresh_dir("cira_shape");
  // surrogate export with the real column layout: 28 statistical features
  const std::vector<std::string> features = {
      "FlowBytesSent", "FlowSentRate", "FlowBytesReceived", "FlowReceivedRate",
      "PacketLengthVariance", "PacketLengthStandardDeviation", "PacketLengthMean",
      "PacketLengthMedian", "PacketLengthMode", "PacketLengthSkewFromMedian",
      "PacketLengthSkewFromMode", "PacketLengthCoefficientofVariation", "PacketTimeVariance",
      "PacketTimeStandardDeviation", "PacketTimeMean", "PacketTimeMedian", "PacketTimeMode",
      "PacketTimeSkewFromMedian", "PacketTimeSkewFromMode", "PacketTimeCoefficientofVariation",
      "ResponseTimeTimeVariance", "ResponseTimeTimeStandardDeviation", "ResponseTimeTimeMean",
      "ResponseTimeTimeMedian", "ResponseTimeTimeMode", "ResponseTimeTimeSkewFromMedian",
      "ResponseTimeTimeSkewFromMode", "ResponseTimeTimeCoefficientofVariation"};
  std::string csv = "SourceIP,DestinationIP,SourcePort,DestinationPort,TimeStamp,Duration";
  for (const auto& f : features) csv += "," + f;
  csv += ",Label\n";
  const std::vector<std::string> resolvers = {"8.8.8.8", "1.1.1.1", "176.103.130.130", "9.9.9.9",
                                              "208.67.222.222"};  // last one unmatched
  for (int i = 0; i < 400; ++i) {
    const bool malicious = i % 3 != 0;
    csv += "10.0.0.2," + resolvers[static_cast<size_t>(i % 5)] + ",443,443,t,0.5";
    for (size_t f = 0; f < features.size(); ++f) {
      const double v = (malicious ? 4.0 : 0.0) + 0.01 * static_cast<double>((i * 7 + f * 13) % 100);
      csv += "," + std::to_string(v);
    }
    csv += malicious ? ",Malicious\n" : ",Benign\n";
  }
  write_file_atomic(dir / "flows.csv", csv);

  const std::string partition = std::string(FEDFLOW_CONFIG_DIR) + "/cira_partition.json";
  REQUIRE(run_cli("prepare --csv " + (dir / "flows.csv").string() + " --partition " + partition +
                      " --out " + (dir / "data").string() + " --global-frac 0.1 --local-frac 0.1",
                  dir / "prep.log") == 0);
  const auto log = read_file(dir / "prep.log");
  for (const char* name : {"GoogleDNS", "Cloudflare", "AdGuard", "Quad9"})
    CHECK(log.find(name) != std::string::npos);
  CHECK(log.find("discarded (no matching rule): 80") != std::string::npos);

  REQUIRE(run_cli("run --data " + (dir / "data").string() + " --out " + (dir / "out").string() +
                      " --scenario cfl --model svm --rounds 3 --batch-size 15 --pca-k 22",
                  dir / "run.log") == 0);
  CHECK(count_lines(read_file(dir / "out" / "metrics.jsonl")) == 3 * 4 * 2);
}

TEST_CASE("sweep-pca and report run end to end") {
  const auto dir = fresh_dir("sweep_report");
  write_file_atomic(dir / "spec.json", synth_spec_json());
  REQUIRE(run_cli("synth --spec " + (dir / "spec.json").string() + " --out " +
                      (dir / "data").string(),
                  dir / "synth.log") == 0);

  REQUIRE(run_cli("sweep-pca --data " + (dir / "data").string() + " --out " +
                      (dir / "sweep").string() +
                      " --k-min 1 --k-max 2 --scenario dfl --rounds 2 --batch-size 40"
                      " --grace-period 20 --trees 3 --tree-cap 3",
                  dir / "sweep.log") == 0);
  const auto table = read_file(dir / "sweep" / "sweep_table.csv");
  CHECK(count_lines(table) == 1 + 2 * 4 * 3);  // header + k x algorithms x entities
  CHECK(fs::exists(dir / "sweep" / "sweep_stats.csv"));
  CHECK(run_cli("sweep-pca --data " + (dir / "data").string() + " --out " +
                    (dir / "sweep2").string() + " --k-min 2 --k-max 1",
                dir / "sweep2.log") == 2);

  for (const char* scenario : {"nfl", "dfl_gossip"}) {
    REQUIRE(run_cli("run --data " + (dir / "data").string() + " --out " +
                        (dir / ("out_" + std::string(scenario))).string() + " --scenario " +
                        scenario +
                        " --model dt --rounds 3 --batch-size 40 --pca-k 4 --grace-period 20",
                    dir / "runs.log") == 0);
  }
  REQUIRE(run_cli("report --in " + (dir / "out_nfl" / "metrics.jsonl").string() + " " +
                      (dir / "out_dfl_gossip" / "metrics.jsonl").string() + " --csv " +
                      (dir / "report.csv").string() + " --curves " + (dir / "curves.csv").string(),
                  dir / "report.log") == 0);
  const auto report_log = read_file(dir / "report.log");
  CHECK(report_log.find("nfl/dt") != std::string::npos);
  CHECK(report_log.find("dfl_gossip/dt") != std::string::npos);
  const auto report_csv = read_file(dir / "report.csv");
  CHECK(count_lines(report_csv) == 1 + 3);  // header + entities
  const auto curves = read_file(dir / "curves.csv");
  CHECK(curves.rfind("label,entity,round,scope,accuracy,f1\n", 0) == 0);
  CHECK(count_lines(curves) == 1 + 2 * (3 * 3 * 2));  // header + files x rows x entities x scopes

  write_file_atomic(dir / "broken.jsonl", "{\"round\":1\nnot json\n");
  CHECK(run_cli("report --in " + (dir / "broken.jsonl").string(), dir / "reportbad.log") == 3);
}
