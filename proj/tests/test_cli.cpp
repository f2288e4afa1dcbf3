#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef NUCLEO_CLI_PATH
#error "NUCLEO_CLI_PATH must point at the built tool"
#endif

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(NUCLEO_CLI_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct Workspace {
    fs::path root;

    Workspace() {
        root = fs::temp_directory_path() / "nucleo_cli_ws";
        fs::remove_all(root);
        fs::create_directories(root);

        REQUIRE(run("synth --out " + (root / "train").string() +
                    " --images 12 --seed 11 --size 96 --nuclei 3:5 --long 14:18 --short 11:14") ==
                0);
        REQUIRE(run("synth --out " + (root / "test").string() +
                    " --images 3 --seed 900 --size 96 --nuclei 3:5 --long 14:18 --short 11:14 "
                    "--touching 0.3") == 0);
        REQUIRE(run("train --images " + (root / "train/images").string() + " --annotations " +
                    (root / "train/annotations").string() + " --out " +
                    (root / "model.json").string() +
                    " --filters 12 --kernels 8 --mixtures 4 --max-feature-samples 40000 --seed 3 "
                    "--diagnostics " + (root / "diag").string()) == 0);
    }
};

Workspace& ws() {
    static Workspace w;
    return w;
}

} // namespace

TEST_CASE("synth + train produce the dataset layout and a loadable model") {
    Workspace& w = ws();
    CHECK(fs::exists(w.root / "train/images/img_00000.png"));
    CHECK(fs::exists(w.root / "train/annotations/img_00000.json"));
    CHECK(fs::exists(w.root / "train/masks/img_00000_mask.png"));
    CHECK(fs::exists(w.root / "model.json"));
    std::string model_text = slurp(w.root / "model.json");
    CHECK(model_text.find("NUCLEO-MODEL") != std::string::npos);
    // Diagnostics: one foreground-mask PNG per mixture component.
    int diag_count = 0;
    for (auto& e : fs::directory_iterator(w.root / "diag")) {
        (void)e;
        ++diag_count;
    }
    CHECK(diag_count == 4);
}

TEST_CASE("full loop: detect -> eval -> plot produces populated outputs") {
    Workspace& w = ws();
    REQUIRE(run("detect --model " + (w.root / "model.json").string() + " --image " +
                (w.root / "test/images").string() + " --out " + (w.root / "dets").string() +
                " --rotations 0") == 0);
    CHECK(fs::exists(w.root / "dets/img_00000.txt"));
    std::string table = slurp(w.root / "dets/img_00000.txt");
    CHECK(table.rfind("x y score component rotation", 0) == 0);

    REQUIRE(run("eval --mode detection --pred " + (w.root / "dets").string() + " --gt " +
                (w.root / "test/annotations").string() + " --radius 3 --report " +
                (w.root / "report.txt").string() + " --pr-table " + (w.root / "pr.txt").string()) ==
            0);
    std::string report = slurp(w.root / "report.txt");
    CHECK(report.find("mode: detection") != std::string::npos);
    CHECK(report.find("best_f1:") != std::string::npos);
    CHECK(report.find("precision:") != std::string::npos);
    CHECK(report.find("recall:") != std::string::npos);

    REQUIRE(run("plot --pr-table " + (w.root / "pr.txt").string() + " --out-image " +
                (w.root / "curve.png").string() + " --out-table " +
                (w.root / "pr101.txt").string()) == 0);
    CHECK(fs::exists(w.root / "curve.png"));
    std::string resampled = slurp(w.root / "pr101.txt");
    // Header plus exactly 101 rows.
    CHECK(std::count(resampled.begin(), resampled.end(), '\n') == 102);
}

TEST_CASE("segment writes a 16-bit label map; eval segmentation on identical maps is perfect") {
    Workspace& w = ws();
    REQUIRE(run("segment --model " + (w.root / "model.json").string() + " --image " +
                (w.root / "test/images").string() + " --out " + (w.root / "labels").string() +
                " --overlay " + (w.root / "overlays").string() + " --cut-overlay " +
                (w.root / "cuts").string()) == 0);
    CHECK(fs::exists(w.root / "labels/img_00000.png"));
    CHECK(fs::exists(w.root / "overlays/img_00000.png"));
    CHECK(fs::exists(w.root / "cuts/img_00000.png"));

    // Identical pred/gt: AJI = DSC = 1.
    REQUIRE(run("eval --mode segmentation --pred " + (w.root / "test/masks").string() +
                " --gt " + (w.root / "test/masks").string() + " --report " +
                (w.root / "seg_report.txt").string()) == 0);
    std::string report = slurp(w.root / "seg_report.txt");
    CHECK(report.find("mean_aji: 1.000000") != std::string::npos);
    CHECK(report.find("mean_dsc: 1.000000") != std::string::npos);

    // Real predictions against generator masks run and report sane values.
    REQUIRE(run("eval --mode segmentation --pred " + (w.root / "labels").string() + " --gt " +
                (w.root / "test/masks").string() + " --report " +
                (w.root / "seg_report2.txt").string()) == 0);
    CHECK(slurp(w.root / "seg_report2.txt").find("mean_dsc: 0.") != std::string::npos);
}

TEST_CASE("exit codes: missing model, corrupt magic, bad usage, no isolated nuclei") {
    Workspace& w = ws();
    CHECK(run("detect --model " + (w.root / "nope.json").string() + " --image " +
              (w.root / "test/images/img_00000.png").string() + " --out " +
              (w.root / "x.txt").string()) == 2);
    CHECK_FALSE(fs::exists(w.root / "x.txt"));

    std::ofstream bad(w.root / "bad.json");
    bad << "{\"magic\": \"WRONG\", \"version\": 1}";
    bad.close();
    CHECK(run("detect --model " + (w.root / "bad.json").string() + " --image " +
              (w.root / "test/images/img_00000.png").string() + " --out " +
              (w.root / "x.txt").string()) == 2);

    CHECK(run("frobnicate") == 2);
    CHECK(run("detect") == 2);

    // Annotations with zero isolated nuclei: exit 2 with the shortfall named.
    fs::create_directories(w.root / "noniso/annotations");
    fs::create_directories(w.root / "noniso/images");
    fs::copy_file(w.root / "train/images/img_00000.png", w.root / "noniso/images/img_00000.png",
                  fs::copy_options::overwrite_existing);
    std::ofstream ann(w.root / "noniso/annotations/img_00000.json");
    ann << "{\"image\":\"img_00000.png\",\"nuclei\":[{\"center\":[10,10],\"box\":[5,5,15,15],"
           "\"isolated\":false}]}";
    ann.close();
    std::string cmd = std::string(NUCLEO_CLI_PATH) + " train --images " +
                      (w.root / "noniso/images").string() + " --annotations " +
                      (w.root / "noniso/annotations").string() + " --out " +
                      (w.root / "m2.json").string() + " 2> " + (w.root / "err.txt").string();
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 2);
    CHECK(slurp(w.root / "err.txt").find("isolated nuclei") != std::string::npos);
}

TEST_CASE("byte determinism: synth and train rerun to identical bytes") {
    Workspace& w = ws();
    REQUIRE(run("synth --out " + (w.root / "re").string() +
                " --images 2 --seed 11 --size 96 --nuclei 3:5 --long 14:18 --short 11:14") == 0);
    CHECK(slurp(w.root / "re/images/img_00000.png") ==
          slurp(w.root / "train/images/img_00000.png"));
    CHECK(slurp(w.root / "re/annotations/img_00001.json") ==
          slurp(w.root / "train/annotations/img_00001.json"));

    REQUIRE(run("train --images " + (w.root / "train/images").string() + " --annotations " +
                (w.root / "train/annotations").string() + " --out " +
                (w.root / "model2.json").string() +
                " --filters 12 --kernels 8 --mixtures 4 --max-feature-samples 40000 --seed 3") ==
            0);
    CHECK(slurp(w.root / "model2.json") == slurp(w.root / "model.json"));

    REQUIRE(run("detect --model " + (w.root / "model.json").string() + " --image " +
                (w.root / "test/images/img_00000.png").string() + " --out " +
                (w.root / "d1.txt").string() + " --rotations 0") == 0);
    REQUIRE(run("detect --model " + (w.root / "model.json").string() + " --image " +
                (w.root / "test/images/img_00000.png").string() + " --out " +
                (w.root / "d2.txt").string() + " --rotations 0") == 0);
    CHECK(slurp(w.root / "d1.txt") == slurp(w.root / "d2.txt"));
}
