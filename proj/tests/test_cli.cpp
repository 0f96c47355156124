#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("PCGSEG_BIN");
    REQUIRE_MESSAGE(b != nullptr, "PCGSEG_BIN must point at the pcgseg binary");
    return b;
}

int run(const std::string& args) {
    const std::string cmd = bin() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_capture(const std::string& args, int& exit_code) {
    const auto tmp = fs::temp_directory_path() / "pcgseg_cli_capture.txt";
    const std::string cmd = bin() + " " + args + " > " + tmp.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    exit_code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    std::ifstream in(tmp);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE_MESSAGE(in.good(), "missing file: ", p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "pcgseg_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// a config small enough for the end-to-end commands to finish in seconds
fs::path quick_config() {
    static fs::path path = [] {
        const auto p = work_dir() / "quick.json";
        std::ofstream(p) << R"({
  "seed": 3,
  "window_frames": 7,
  "train_stride": 2,
  "model": {"hidden_dim": 8},
  "train": {"batch_size": 16, "epochs_phase1": 3, "epochs_phase2": 2,
            "noise_snr_db": null},
  "split": {"train": 0.6, "val": 0.2, "test": 0.2}
})";
        return p;
    }();
    return path;
}

fs::path data_dir() {
    static fs::path dir = [] {
        const auto d = work_dir() / "data";
        const int rc = run("synth --out " + d.string() +
                           " --count 5 --duration 6 --bpm-lo 60 --bpm-hi 90 --seed 11");
        REQUIRE(rc == 0);
        return d;
    }();
    return dir;
}

// one shared trained run for eval/segment/explain
fs::path trained_run() {
    static fs::path dir = [] {
        const auto d = work_dir() / "run";
        const int rc = run("train --config " + quick_config().string() + " --data " +
                           data_dir().string() + " --out " + d.string());
        REQUIRE(rc == 0);
        return d;
    }();
    return dir;
}

int count_columns(const std::string& header) {
    return static_cast<int>(std::count(header.begin(), header.end(), ',')) + 1;
}

} // namespace

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("definitely-not-a-command") == 1);
    CHECK(run("train") == 1); // missing required options
    CHECK(run("") == 1);      // subcommand required
}

TEST_CASE("dump-config round trip is byte identical") {
    int rc = 0;
    const auto text = run_capture("dump-config", rc);
    CHECK(rc == 0);
    CHECK(!text.empty());
    const auto cfg_path = work_dir() / "defaults.json";
    std::ofstream(cfg_path) << text;
    const auto text2 = run_capture("dump-config --config " + cfg_path.string(), rc);
    CHECK(rc == 0);
    CHECK(text2 == text);

    SUBCASE("flag overrides surface in the dump") {
        const auto text3 = run_capture("dump-config --head relu --seed 9", rc);
        const auto j = nlohmann::json::parse(text3);
        CHECK(j["model"]["head"] == "relu");
        CHECK(j["seed"] == 9);
    }
}

TEST_CASE("synth writes paired wav/csv files deterministically") {
    const auto d = data_dir();
    int wavs = 0, csvs = 0;
    for (const auto& e : fs::directory_iterator(d)) {
        if (e.path().extension() == ".wav") ++wavs;
        if (e.path().extension() == ".csv") ++csvs;
    }
    CHECK(wavs == 5);
    CHECK(csvs == 5);

    const auto d2 = work_dir() / "data_again";
    CHECK(run("synth --out " + d2.string() +
              " --count 5 --duration 6 --bpm-lo 60 --bpm-hi 90 --seed 11") == 0);
    CHECK(slurp(d2 / "rec000.wav") == slurp(d / "rec000.wav"));
    CHECK(slurp(d2 / "rec003.csv") == slurp(d / "rec003.csv"));
}

TEST_CASE("extract") {
    SUBCASE("missing input dir fails with a data error") {
        CHECK(run("extract --in /nonexistent-dir --out " +
                  (work_dir() / "x").string()) == 2);
    }
    SUBCASE("default spec yields 18-column csvs, idempotently") {
        const auto out = work_dir() / "features";
        CHECK(run("extract --in " + data_dir().string() + " --out " + out.string()) == 0);
        const auto csv = slurp(out / "rec000.features.csv");
        std::istringstream ss(csv);
        std::string header;
        std::getline(ss, header);
        CHECK(count_columns(header) == 18);

        const auto out2 = work_dir() / "features2";
        CHECK(run("extract --in " + data_dir().string() + " --out " + out2.string()) == 0);
        CHECK(slurp(out2 / "rec000.features.csv") == csv);
        CHECK(slurp(out2 / "rec000.features.json") == slurp(out / "rec000.features.json"));
    }
}

TEST_CASE("train produces a complete, reproducible run directory") {
    const auto d = trained_run();
    for (const char* f : {"config.json", "checkpoint.json", "norm.json", "history.csv"})
        CHECK(fs::exists(d / f));
    std::istringstream hist(slurp(d / "history.csv"));
    std::string header;
    std::getline(hist, header);
    CHECK(header == "epoch,phase,lr,train_loss,val_acc");
    int lines = 0;
    for (std::string l; std::getline(hist, l);) ++lines;
    CHECK(lines == 5); // 3 + 2 epochs

    SUBCASE("same seed, same checkpoint bytes") {
        const auto d2 = work_dir() / "run_again";
        CHECK(run("train --config " + quick_config().string() + " --data " +
                  data_dir().string() + " --out " + d2.string()) == 0);
        CHECK(slurp(d2 / "checkpoint.json") == slurp(d / "checkpoint.json"));
    }
    SUBCASE("sweep mode writes one run per hidden size") {
        const auto d2 = work_dir() / "sweep";
        CHECK(run("train --config " + quick_config().string() + " --data " +
                  data_dir().string() + " --out " + d2.string() + " --hidden 4,8") == 0);
        CHECK(fs::exists(d2 / "h4" / "history.csv"));
        CHECK(fs::exists(d2 / "h8" / "history.csv"));
        CHECK(fs::exists(d2 / "h4" / "checkpoint.json"));
    }
}

TEST_CASE("eval emits a recomputable metric report") {
    const auto out = work_dir() / "eval";
    CHECK(run("eval --run " + trained_run().string() + " --data " + data_dir().string() +
              " --out " + out.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(out / "metrics.json"));
    const auto& c = j["counts"];
    const long long tp = c["tp"], fp = c["fp"], fn = c["fn"], tn = c["tn"];
    CHECK(tp + fp + fn + tn > 0);
    if (!j["acc"].is_null()) {
        const double acc = j["acc"];
        // double-penalty counting can exceed the window count; acc still
        // recomputes from the published counts
        CHECK(acc == doctest::Approx(static_cast<double>(tp + tn) /
                                     static_cast<double>(tp + fp + fn + tn)));
    }
    CHECK(fs::exists(out / "event_metrics.json"));
    const auto per_rec = slurp(out / "per_recording.csv");
    CHECK(per_rec.rfind("recording,", 0) == 0);

    SUBCASE("empty data dir fails") {
        const auto empty = work_dir() / "empty";
        fs::create_directories(empty);
        CHECK(run("eval --run " + trained_run().string() + " --data " + empty.string() +
                  " --out " + (work_dir() / "e2").string()) == 2);
    }
}

TEST_CASE("segment emits eta series, events, and an svg overlay") {
    const auto out = work_dir() / "segment";
    const auto svg = work_dir() / "overlay.svg";
    CHECK(run("segment --run " + trained_run().string() + " --wav " +
              (data_dir() / "rec000.wav").string() + " --out " + out.string() + " --svg " +
              svg.string()) == 0);

    std::istringstream eta(slurp(out / "eta.csv"));
    std::string header;
    std::getline(eta, header);
    CHECK(header == "window_index,center_sample,eta,label");
    int rows = 0;
    for (std::string l; std::getline(eta, l);) ++rows;
    // 6 s at 1600 Hz -> 297 frames -> 291 centered 7-frame windows
    CHECK(rows == 291);

    const auto events = slurp(out / "events.csv");
    CHECK(events.rfind("start_sample,end_sample,state", 0) == 0);

    const auto svg_text = slurp(svg);
    CHECK(svg_text.find("<svg") != std::string::npos);
    CHECK(svg_text.find("polyline") != std::string::npos);

    SUBCASE("unreadable wav fails") {
        CHECK(run("segment --run " + trained_run().string() +
                  " --wav /nonexistent.wav --out " + (work_dir() / "s2").string()) == 2);
    }
}

TEST_CASE("explain emits attention, occlusion, embedding, and pca csvs") {
    const auto out = work_dir() / "explain";
    CHECK(run("explain --run " + trained_run().string() + " --wav " +
              (data_dir() / "rec001.wav").string() + " --out " + out.string()) == 0);

    // attention rows sum to 1
    std::istringstream att(slurp(out / "attention.csv"));
    std::string line;
    std::getline(att, line);
    CHECK(count_columns(line) == 8); // window_index + 7 betas
    int checked = 0;
    while (std::getline(att, line) && checked < 50) {
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ','); // index
        double sum = 0.0;
        while (std::getline(row, cell, ',')) sum += std::stod(cell);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked > 0);

    // occlusion has one row per default group for the 18-dim spec
    const auto occ = slurp(out / "occlusion.csv");
    CHECK(occ.rfind("group,mean_importance,mean_abs_importance", 0) == 0);
    CHECK(occ.find("MFCC") != std::string::npos);
    CHECK(occ.find("DELTA2") != std::string::npos);

    // embeddings: 2H + 1 columns
    std::istringstream emb(slurp(out / "embeddings.csv"));
    std::getline(emb, line);
    CHECK(count_columns(line) == 17); // window_index + 16 (H=8)

    // pca: exactly 3 columns
    std::istringstream pca(slurp(out / "pca.csv"));
    std::getline(pca, line);
    CHECK(line == "x,y,label");
    while (std::getline(pca, line))
        if (!line.empty()) CHECK(count_columns(line) == 3);
}

TEST_CASE("feature-study emits one block per combination") {
    const auto out = work_dir() / "study.csv";
    // smallest possible study: 1 seed, tiny model; still covers all rows
    CHECK(run("feature-study --config " + quick_config().string() + " --data " +
              data_dir().string() + " --out " + out.string() + " --seeds 1") == 0);
    const auto text = slurp(out);
    std::istringstream ss(text);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "combination,seed,ppv,se,spe,acc,f1");
    int data_rows = 0, mean_rows = 0;
    for (std::string l; std::getline(ss, l);) {
        if (l.find(",mean,") != std::string::npos)
            ++mean_rows;
        else if (!l.empty())
            ++data_rows;
    }
    CHECK(mean_rows == 15);
    CHECK(data_rows == 15); // one seed per combination
    for (const char* name : {"HoE", "PSD", "MFCC+Delta+Delta2"})
        CHECK(text.find(name) != std::string::npos);
}
