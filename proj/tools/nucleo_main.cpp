// nucleo: train, detect, segment, evaluate and generate synthetic data for
// the vMF compositional nuclei pipeline.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "nucleo/annotations.hpp"
#include "nucleo/detect.hpp"
#include "nucleo/errors.hpp"
#include "nucleo/image_io.hpp"
#include "nucleo/metrics.hpp"
#include "nucleo/model.hpp"
#include "nucleo/pr_plot.hpp"
#include "nucleo/segment.hpp"
#include "nucleo/synth.hpp"
#include "nucleo/train.hpp"

namespace fs = std::filesystem;
using namespace nucleo;

namespace {

std::vector<double> parse_rotations(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

std::string stem_of(const fs::path& p) {
    std::string s = p.stem().string();
    const std::string suffix = "_mask";
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
        s = s.substr(0, s.size() - suffix.size());
    return s;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::vector<std::string>& exts) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (std::find(exts.begin(), exts.end(), ext) != exts.end()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PipelineError("cannot write " + path.string());
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

char name_buf[64];
std::string image_name(int index) {
    std::snprintf(name_buf, sizeof(name_buf), "img_%05d", index);
    return name_buf;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string out_dir;
    int images = 10;
    std::uint64_t seed = 1;
    int size = 128;
    std::string nuclei = "4:8";
    std::string long_axis = "14:20";
    std::string short_axis = "10:15";
    double touching = 0.0;
    double noise = 0.02;
    double texture = 0.12;
};

std::pair<double, double> parse_range(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) {
        double v = std::stod(s);
        return {v, v};
    }
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
}

int run_synth(const SynthArgs& args) {
    SynthConfig cfg;
    cfg.width = cfg.height = args.size;
    auto [cmin, cmax] = parse_range(args.nuclei);
    cfg.count_min = static_cast<int>(cmin);
    cfg.count_max = static_cast<int>(cmax);
    std::tie(cfg.long_axis_min, cfg.long_axis_max) = parse_range(args.long_axis);
    std::tie(cfg.short_axis_min, cfg.short_axis_max) = parse_range(args.short_axis);
    cfg.touching_prob = args.touching;
    cfg.noise_std = args.noise;
    cfg.texture_amplitude = args.texture;
    cfg.validate();

    fs::create_directories(fs::path(args.out_dir) / "images");
    fs::create_directories(fs::path(args.out_dir) / "annotations");
    fs::create_directories(fs::path(args.out_dir) / "masks");

    for (int i = 0; i < args.images; ++i) {
        cfg.seed = args.seed + static_cast<std::uint64_t>(i);
        SynthSample sample = generate(cfg);
        if (sample.truth.placement_warning)
            std::cerr << "warning: image " << i << " placed only "
                      << sample.truth.instances.size() << " nuclei\n";
        std::string name = image_name(i);
        save_png_gray16((fs::path(args.out_dir) / "images" / (name + ".png")).string(),
                        sample.image);
        save_label_png((fs::path(args.out_dir) / "masks" / (name + "_mask.png")).string(),
                       sample.truth.masks);
        ImageAnnotation ann;
        ann.image = name + ".png";
        ann.mask = name + "_mask.png";
        for (const auto& inst : sample.truth.instances) {
            NucleusAnnotation na;
            na.cx = inst.cx;
            na.cy = inst.cy;
            na.box = inst.box;
            na.isolated = inst.isolated;
            ann.nuclei.push_back(na);
        }
        save_annotation((fs::path(args.out_dir) / "annotations" / (name + ".json")).string(), ann);
    }
    std::cerr << "wrote " << args.images << " images to " << args.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string images_dir;
    std::string annotations_dir;
    std::string out_path;
    TrainConfig cfg;
    std::string rotations = "-90,-60,-30,30,60";
    std::string diagnostics_dir;
};

int run_train(const TrainArgs& args) {
    TrainConfig cfg = args.cfg;
    cfg.detection.rotations = parse_rotations(args.rotations);

    std::vector<fs::path> ann_files = list_files(args.annotations_dir, {".json"});
    if (ann_files.empty())
        throw ValidationError("no annotation files in " + args.annotations_dir);

    std::vector<TrainInput> data;
    for (const auto& af : ann_files) {
        ImageAnnotation ann = load_annotation(af.string());
        fs::path img_path = fs::path(args.images_dir) / ann.image;
        TrainInput ti;
        ti.image = load_gray_image(img_path.string());
        for (const auto& n : ann.nuclei) {
            if (n.box.x0 < 0 || n.box.y0 < 0 || n.box.x1 >= ti.image.width ||
                n.box.y1 >= ti.image.height)
                throw ValidationError("annotation box out of bounds in " + af.string());
            ti.nuclei.push_back(n);
        }
        data.push_back(std::move(ti));
    }

    NucleoModel model = train_model(data, cfg, &std::cerr);
    save_model(args.out_path, model);
    std::cerr << "model written to " << args.out_path << " (" << model.parameter_count()
              << " parameters)\n";

    if (!args.diagnostics_dir.empty()) {
        fs::create_directories(args.diagnostics_dir);
        // Per-component average foreground masks, scaled to 8 bits.
        int P = model.mixture.patch_size;
        for (int m = 0; m < model.mixture.M; ++m) {
            GrayImage img(P, P);
            for (int i = 0; i < P * P; ++i) img.values[i] = model.mixture.fg_masks[m][i];
            char nm[64];
            std::snprintf(nm, sizeof(nm), "component_%02d_fg.png", m);
            save_png_gray8((fs::path(args.diagnostics_dir) / nm).string(), img);
        }
        std::cerr << "wrote " << model.mixture.M << " component mask diagnostics\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// detect / segment shared bits
// ---------------------------------------------------------------------------

std::vector<fs::path> gather_images(const std::string& image_arg) {
    fs::path p(image_arg);
    if (fs::is_directory(p)) return list_files(p, {".png", ".tif", ".tiff"});
    if (!fs::exists(p)) throw ValidationError("no such image: " + image_arg);
    return {p};
}

PriorMap build_candidate_prior(const GrayImage& image, const NucleoModel& model,
                               const FeatureMap& fm) {
    std::vector<double> scores = foreground_score_map(fm, model.kernel_bank);
    auto components = threshold_components(scores, fm.width, fm.height, ThresholdMode::otsu());
    auto candidates =
        generate_candidates(components, model.decomposition.psi, model.decomposition.lambda);
    return candidate_prior(candidates, model.decomposition.prior_variance, image.height,
                           image.width, model.decomposition.prior_floor);
}

struct DetectArgs {
    std::string model_path;
    std::string image;
    std::string out;
    std::string rotations;  // empty = model defaults
    double nms = -1.0;      // <0 = model default
    double threshold = kNegInf;
    bool use_prior = false;
    std::string activations_dir;
};

int run_detect(const DetectArgs& args) {
    NucleoModel model = load_model(args.model_path);
    std::vector<fs::path> images = gather_images(args.image);
    bool dir_mode = images.size() > 1 || fs::is_directory(args.image);
    if (dir_mode) fs::create_directories(args.out);

    DetectOptions opts;
    opts.rotations = args.rotations.empty() ? model.detection.rotations
                                            : parse_rotations(args.rotations);
    opts.nms_radius = args.nms >= 0 ? args.nms : model.detection.nms_radius;
    opts.score_threshold = args.threshold;

    for (const auto& path : images) {
        GrayImage image = load_gray_image(path.string());
        const PriorMap* prior_ptr = nullptr;
        PriorMap prior;
        if (args.use_prior) {
            FeatureMap fm = convolve_extract(image, model.filter_bank);
            prior = build_candidate_prior(image, model, fm);
            prior_ptr = &prior;
        }
        DetectionSet set = detect(image, model.filter_bank, model.kernel_bank, model.mixture,
                                  prior_ptr, opts);
        set.image_id = stem_of(path);

        fs::path out_path = dir_mode ? fs::path(args.out) / (stem_of(path) + ".txt")
                                     : fs::path(args.out);
        write_text(out_path, detections_to_table(set));
        std::cerr << stem_of(path) << ": " << set.detections.size() << " detections\n";

        if (!args.activations_dir.empty()) {
            fs::create_directories(args.activations_dir);
            FeatureMap fm = convolve_extract(image, model.filter_bank);
            std::vector<double> maps = activation_maps(fm, model.kernel_bank);
            std::size_t plane = static_cast<std::size_t>(fm.height) * fm.width;
            for (int k = 0; k < model.kernel_bank.K; ++k) {
                GrayImage a(fm.width, fm.height);
                for (std::size_t i = 0; i < plane; ++i)
                    a.values[i] = 0.5 * (maps[k * plane + i] + 1.0);
                char nm[96];
                std::snprintf(nm, sizeof(nm), "%s_kernel_%02d.png", stem_of(path).c_str(), k);
                save_png_gray8((fs::path(args.activations_dir) / nm).string(), a);
            }
        }
    }
    return 0;
}

struct SegmentArgs {
    std::string model_path;
    std::string image;
    std::string out;
    double psi = -1.0;
    double lambda = -1.0;
    std::string threshold = "otsu";
    std::string overlay;
    std::string cut_overlay;
};

void draw_instance_overlay(const GrayImage& image, const InstanceLabelMap& labels,
                           const std::string& path) {
    int W = image.width, H = image.height;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(W) * H * 3);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            std::uint8_t v = static_cast<std::uint8_t>(std::lround(image.at(x, y) * 255.0));
            std::size_t i = (static_cast<std::size_t>(y) * W + x) * 3;
            rgb[i] = rgb[i + 1] = rgb[i + 2] = v;
        }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            std::uint32_t l = labels.at(x, y);
            if (l == 0) continue;
            bool edge = false;
            for (int k = 0; k < 4 && !edge; ++k) {
                int nx = x + (k == 0) - (k == 1), ny = y + (k == 2) - (k == 3);
                if (nx < 0 || ny < 0 || nx >= W || ny >= H || labels.at(nx, ny) != l) edge = true;
            }
            if (edge) {
                std::size_t i = (static_cast<std::size_t>(y) * W + x) * 3;
                rgb[i] = 255;
                rgb[i + 1] = 210;
                rgb[i + 2] = 40;
            }
        }
    save_png_rgb8(path, W, H, rgb);
}

void draw_cut_overlay(const GrayImage& image, const FeatureMap& fm, const NucleoModel& model,
                      double psi, double lambda, const ThresholdMode& mode,
                      const std::string& path) {
    int W = image.width, H = image.height;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(W) * H * 3);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            std::uint8_t v = static_cast<std::uint8_t>(std::lround(image.at(x, y) * 255.0));
            std::size_t i = (static_cast<std::size_t>(y) * W + x) * 3;
            rgb[i] = rgb[i + 1] = rgb[i + 2] = v;
        }
    auto put = [&](int x, int y, int r, int g, int b) {
        if (x < 0 || y < 0 || x >= W || y >= H) return;
        std::size_t i = (static_cast<std::size_t>(y) * W + x) * 3;
        rgb[i] = static_cast<std::uint8_t>(r);
        rgb[i + 1] = static_cast<std::uint8_t>(g);
        rgb[i + 2] = static_cast<std::uint8_t>(b);
    };
    std::vector<double> scores = foreground_score_map(fm, model.kernel_bank);
    auto components = threshold_components(scores, W, H, mode);
    for (const auto& comp : components) {
        DecomposedParts parts = decompose(comp, psi, lambda);
        for (auto [x, y] : parts.boundary.vertices) put(x, y, 250, 220, 40);  // boundary: yellow
        for (const Cut& c : parts.candidate_cuts) {
            auto [x0, y0] = parts.boundary.vertices[c.p_index];
            auto [x1, y1] = parts.boundary.vertices[c.q_index];
            int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
            for (int s = 0; s <= steps; ++s) {
                int x = x0 + (x1 - x0) * s / std::max(1, steps);
                int y = y0 + (y1 - y0) * s / std::max(1, steps);
                put(x, y, 150, 150, 150);  // candidates: gray
            }
        }
        for (const Cut& c : parts.selected_cuts) {
            auto [x0, y0] = parts.boundary.vertices[c.p_index];
            auto [x1, y1] = parts.boundary.vertices[c.q_index];
            int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
            for (int s = 0; s <= steps; ++s) {
                int x = x0 + (x1 - x0) * s / std::max(1, steps);
                int y = y0 + (y1 - y0) * s / std::max(1, steps);
                put(x, y, 60, 230, 60);  // selected: green
            }
        }
        for (int idx : parts.concave_indices) {
            auto [x, y] = parts.boundary.vertices[idx];
            put(x, y, 255, 40, 40);  // concave points: red
            put(x + 1, y, 255, 40, 40);
            put(x, y + 1, 255, 40, 40);
        }
    }
    save_png_rgb8(path, W, H, rgb);
}

int run_segment(const SegmentArgs& args) {
    NucleoModel model = load_model(args.model_path);
    std::vector<fs::path> images = gather_images(args.image);
    bool dir_mode = images.size() > 1 || fs::is_directory(args.image);
    if (dir_mode) fs::create_directories(args.out);

    double psi = args.psi > 0 ? args.psi : model.decomposition.psi;
    double lambda = args.lambda >= 0 ? args.lambda : model.decomposition.lambda;
    ThresholdMode mode = ThresholdMode::otsu();
    if (args.threshold.rfind("fixed:", 0) == 0)
        mode = ThresholdMode::fixed(std::stod(args.threshold.substr(6)));
    else if (args.threshold != "otsu")
        throw ValidationError("segment: --threshold must be 'otsu' or 'fixed:<value>'");

    for (const auto& path : images) {
        GrayImage image = load_gray_image(path.string());
        FeatureMap fm = convolve_extract(image, model.filter_bank);
        SegmentResult res = segment_image(fm, model.kernel_bank, psi, lambda, mode);
        if (res.infeasible_components > 0)
            std::cerr << "warning: " << stem_of(path) << ": " << res.infeasible_components
                      << " instance(s) from undecomposable components\n";

        fs::path out_path = dir_mode ? fs::path(args.out) / (stem_of(path) + ".png")
                                     : fs::path(args.out);
        save_label_png(out_path.string(), res.labels);
        std::cerr << stem_of(path) << ": " << res.labels.max_label() << " instances\n";

        if (!args.overlay.empty()) {
            fs::path ov = dir_mode ? fs::path(args.overlay) / (stem_of(path) + ".png")
                                   : fs::path(args.overlay);
            if (dir_mode) fs::create_directories(args.overlay);
            draw_instance_overlay(image, res.labels, ov.string());
        }
        if (!args.cut_overlay.empty()) {
            fs::path ov = dir_mode ? fs::path(args.cut_overlay) / (stem_of(path) + ".png")
                                   : fs::path(args.cut_overlay);
            if (dir_mode) fs::create_directories(args.cut_overlay);
            draw_cut_overlay(image, fm, model, psi, lambda, mode, ov.string());
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string mode;  // "detection" or "segmentation"
    std::string pred;
    std::string gt;
    double radius = 3.0;
    std::string report;
    std::string pr_table;
};

int run_eval_detection(const EvalArgs& args) {
    std::vector<fs::path> pred_files;
    if (fs::is_directory(args.pred))
        pred_files = list_files(args.pred, {".txt"});
    else
        pred_files = {fs::path(args.pred)};
    if (pred_files.empty()) throw ValidationError("no prediction tables in " + args.pred);

    struct ImageEval {
        std::vector<ScoredPoint> pred;
        std::vector<std::pair<double, double>> gt;
    };
    std::vector<ImageEval> images;
    long total_gt = 0;
    for (const auto& pf : pred_files) {
        ImageEval ie;
        DetectionSet set = detections_from_table(read_text(pf));
        for (const auto& d : set.detections)
            ie.pred.push_back({static_cast<double>(d.x), static_cast<double>(d.y), d.score});
        fs::path gt_path = fs::path(args.gt) / (stem_of(pf) + ".json");
        ImageAnnotation ann = load_annotation(gt_path.string());
        for (const auto& n : ann.nuclei) ie.gt.emplace_back(n.cx, n.cy);
        total_gt += static_cast<long>(ie.gt.size());
        images.push_back(std::move(ie));
    }
    if (total_gt == 0) throw ValidationError("eval: empty ground truth (recall undefined)");

    // Dataset-level curve: thresholds over all prediction scores, matching
    // per image, counts pooled.
    std::vector<double> thresholds;
    for (const auto& ie : images)
        for (const auto& p : ie.pred) thresholds.push_back(p.score);
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<PrPoint> curve;
    for (double t : thresholds) {
        long tp = 0, fp = 0;
        for (const auto& ie : images) {
            std::vector<ScoredPoint> surviving;
            for (const auto& p : ie.pred)
                if (p.score >= t) surviving.push_back(p);
            if (ie.gt.empty()) {
                fp += static_cast<long>(surviving.size());
                continue;
            }
            MatchResult m = match_points(surviving, ie.gt, args.radius);
            tp += m.true_positives;
            fp += m.false_positives;
        }
        PrPoint pt;
        pt.threshold = t;
        pt.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
        pt.recall = static_cast<double>(tp) / total_gt;
        curve.push_back(pt);
    }

    std::ostringstream report;
    report << "mode: detection\n";
    report << "images: " << images.size() << "\n";
    report << "ground_truth_points: " << total_gt << "\n";
    report << "match_radius_px: " << args.radius << "\n";
    if (!curve.empty()) {
        std::size_t bi = best_f1_index(curve);
        char line[160];
        std::snprintf(line, sizeof(line),
                      "best_f1: %.6f\nbest_f1_threshold: %.6f\nprecision: %.6f\nrecall: %.6f\n",
                      f1_of(curve[bi]), curve[bi].threshold, curve[bi].precision,
                      curve[bi].recall);
        report << line;
    } else {
        report << "best_f1: 0.000000\n(no predictions)\n";
    }
    write_text(args.report, report.str());
    if (!args.pr_table.empty()) write_text(args.pr_table, pr_table_to_text(curve));
    std::cerr << "report written to " << args.report << "\n";
    return 0;
}

int run_eval_segmentation(const EvalArgs& args) {
    std::vector<fs::path> pred_files;
    if (fs::is_directory(args.pred))
        pred_files = list_files(args.pred, {".png"});
    else
        pred_files = {fs::path(args.pred)};
    if (pred_files.empty()) throw ValidationError("no prediction label maps in " + args.pred);

    std::ostringstream per_image;
    double aji_sum = 0, dsc_sum = 0;
    for (const auto& pf : pred_files) {
        fs::path gt_path = fs::path(args.gt) / (stem_of(pf) + "_mask.png");
        if (!fs::exists(gt_path)) gt_path = fs::path(args.gt) / (stem_of(pf) + ".png");
        InstanceLabelMap pred = load_label_png(pf.string());
        InstanceLabelMap gt = load_label_png(gt_path.string());
        double a = aji(gt, pred);
        double d = dsc(gt, pred);
        aji_sum += a;
        dsc_sum += d;
        char line[160];
        std::snprintf(line, sizeof(line), "%s aji=%.6f dsc=%.6f\n", stem_of(pf).c_str(), a, d);
        per_image << line;
    }
    std::ostringstream report;
    report << "mode: segmentation\n";
    report << "images: " << pred_files.size() << "\n";
    char line[128];
    std::snprintf(line, sizeof(line), "mean_aji: %.6f\nmean_dsc: %.6f\n",
                  aji_sum / pred_files.size(), dsc_sum / pred_files.size());
    report << line << per_image.str();
    write_text(args.report, report.str());
    std::cerr << "report written to " << args.report << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

struct PlotArgs {
    std::string pr_table;
    std::string out_image;
    std::string out_table;
};

int run_plot(const PlotArgs& args) {
    std::vector<PrPoint> points = pr_table_from_text(read_text(args.pr_table));
    if (!args.out_image.empty()) render_pr_curve_png(args.out_image, points);
    if (!args.out_table.empty()) write_text(args.out_table, pr_table_to_text(resample_pr(points)));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nucleo: interpretable vMF compositional nuclei detection and segmentation"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with ground truth");
    synth->add_option("--out", synth_args.out_dir, "output dataset directory")->required();
    synth->add_option("--images", synth_args.images, "number of images");
    synth->add_option("--seed", synth_args.seed, "base seed (image i uses seed+i)");
    synth->add_option("--size", synth_args.size, "image side length");
    synth->add_option("--nuclei", synth_args.nuclei, "nucleus count range lo:hi");
    synth->add_option("--long", synth_args.long_axis, "long axis range lo:hi (px)");
    synth->add_option("--short", synth_args.short_axis, "short axis range lo:hi (px)");
    synth->add_option("--touching", synth_args.touching, "touching-pair probability");
    synth->add_option("--noise", synth_args.noise, "additive Gaussian noise std");
    synth->add_option("--texture", synth_args.texture, "interior texture amplitude");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a model from images and annotations");
    train->add_option("--images", train_args.images_dir, "image directory")->required();
    train->add_option("--annotations", train_args.annotations_dir, "annotation directory")
        ->required();
    train->add_option("--out", train_args.out_path, "output model path")->required();
    train->add_option("--filters", train_args.cfg.num_filters, "convolution filter count");
    train->add_option("--kernel", train_args.cfg.kernel_size, "convolution kernel size (odd)");
    train->add_option("--kernels", train_args.cfg.kernels, "vMF kernel count K");
    train->add_option("--sigma", train_args.cfg.sigma, "vMF concentration");
    train->add_option("--mixtures", train_args.cfg.mixtures, "mixture component count M");
    train->add_option("--patch", train_args.cfg.patch_size, "nucleus patch size P (odd)");
    train->add_option("--em-iters", train_args.cfg.em_iters, "outer EM iterations");
    train->add_option("--seed", train_args.cfg.seed, "training seed");
    train->add_option("--max-feature-samples", train_args.cfg.max_feature_samples,
                      "cap on vMF training vectors");
    train->add_option("--filter-bank", train_args.cfg.filter_bank_path,
                      "load a pre-trained filter bank instead of learning");
    train->add_option("--psi", train_args.cfg.decomposition.psi, "near-convex tolerance (px)");
    train->add_option("--lambda", train_args.cfg.decomposition.lambda, "cut length weight");
    train->add_option("--prior-variance", train_args.cfg.decomposition.prior_variance,
                      "candidate prior Gaussian variance");
    train->add_option("--rotations", train_args.rotations, "detection rotations (degrees, csv)");
    train->add_option("--nms", train_args.cfg.detection.nms_radius, "NMS radius (px)");
    train->add_option("--diagnostics", train_args.diagnostics_dir,
                      "write per-component foreground mask PNGs here");

    DetectArgs detect_args;
    auto* det = app.add_subcommand("detect", "detect nuclei in images");
    det->add_option("--model", detect_args.model_path, "model file")->required();
    det->add_option("--image", detect_args.image, "image file or directory")->required();
    det->add_option("--out", detect_args.out, "output table path (file or directory)")
        ->required();
    det->add_option("--rotations", detect_args.rotations,
                    "override rotation set (degrees, csv; empty = model default)");
    det->add_option("--nms", detect_args.nms, "override NMS radius");
    det->add_option("--threshold", detect_args.threshold, "score threshold (default: keep all)");
    det->add_flag("--prior", detect_args.use_prior, "apply the near-convex candidate prior");
    det->add_option("--activations", detect_args.activations_dir,
                    "write per-kernel activation PNGs here");

    SegmentArgs segment_args;
    auto* seg = app.add_subcommand("segment", "weakly-supervised instance segmentation");
    seg->add_option("--model", segment_args.model_path, "model file")->required();
    seg->add_option("--image", segment_args.image, "image file or directory")->required();
    seg->add_option("--out", segment_args.out, "output 16-bit label PNG (file or directory)")
        ->required();
    seg->add_option("--psi", segment_args.psi, "near-convex tolerance (px)");
    seg->add_option("--lambda", segment_args.lambda, "cut length weight");
    seg->add_option("--threshold", segment_args.threshold,
                    "foreground threshold: 'otsu' or 'fixed:<value>'");
    seg->add_option("--overlay", segment_args.overlay, "write instance boundary overlay PNG");
    seg->add_option("--cut-overlay", segment_args.cut_overlay,
                    "write decomposition audit overlay PNG");

    EvalArgs eval_args;
    auto* ev = app.add_subcommand("eval", "evaluate detections or segmentations");
    ev->add_option("--mode", eval_args.mode, "detection | segmentation")->required();
    ev->add_option("--pred", eval_args.pred, "prediction file or directory")->required();
    ev->add_option("--gt", eval_args.gt, "ground truth directory")->required();
    ev->add_option("--radius", eval_args.radius, "matching radius in px (detection mode)");
    ev->add_option("--report", eval_args.report, "output report path")->required();
    ev->add_option("--pr-table", eval_args.pr_table, "output P-R table path (detection mode)");

    PlotArgs plot_args;
    auto* plot = app.add_subcommand("plot", "render a P-R table");
    plot->add_option("--pr-table", plot_args.pr_table, "input P-R table")->required();
    plot->add_option("--out-image", plot_args.out_image, "rendered curve PNG");
    plot->add_option("--out-table", plot_args.out_table, "resampled 101-point table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) return run_synth(synth_args);
        if (*train) return run_train(train_args);
        if (*det) return run_detect(detect_args);
        if (*seg) return run_segment(segment_args);
        if (*ev) {
            if (eval_args.mode == "detection") return run_eval_detection(eval_args);
            if (eval_args.mode == "segmentation") return run_eval_segmentation(eval_args);
            throw ValidationError("eval: --mode must be 'detection' or 'segmentation'");
        }
        if (*plot) return run_plot(plot_args);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const PipelineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
