#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "textprop/adaboost.hpp"
#include "textprop/error.hpp"
#include "textprop/eval.hpp"
#include "textprop/pipeline.hpp"
#include "textprop/synth.hpp"
#include "textprop/training.hpp"

namespace fs = std::filesystem;
using namespace textprop;

namespace {

const std::vector<std::string> kImageExtensions{".jpg", ".jpeg", ".png", ".bmp", ".JPG", ".JPEG", ".PNG"};

bool is_image(const fs::path& p) {
  return std::find(kImageExtensions.begin(), kImageExtensions.end(), p.extension().string()) !=
         kImageExtensions.end();
}

std::optional<fs::path> find_image(const fs::path& dir, const std::string& id) {
  for (const auto& ext : kImageExtensions) {
    fs::path candidate = dir / (id + ext);
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image(entry.path())) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T value;
    if (!(is >> value) || !is.eof()) throw ArgumentError("bad list element '" + item + "'");
    out.push_back(value);
  }
  if (out.empty()) throw ArgumentError("empty list '" + text + "'");
  return out;
}

// Settings shared by propose, bench and train.
struct ConfigArgs {
  std::string preset_name = "full";
  std::string channels;
  std::string levels;
  std::string cues;
  std::string rank;
  std::string model_path;
  std::uint64_t seed = 0;
  std::size_t max_proposals = 0;
  double nms = 0.0;
  int threads = 1;

  void add(CLI::App* app) {
    app->add_option("--preset", preset_name, "Diversification preset")
        ->check(CLI::IsMember(preset_names()));
    app->add_option("--channels", channels, "Channel letters overriding the preset, e.g. RGBI");
    app->add_option("--levels", levels, "Pyramid levels overriding the preset, e.g. 1,2");
    app->add_option("--cues", cues, "Cue letters overriding the preset, e.g. DFBGS");
    app->add_option("--rank", rank, "Ranking strategy: pr, nfa, prnfa or cls")
        ->check(CLI::IsMember({"pr", "nfa", "prnfa", "cls"}));
    app->add_option("--model", model_path, "Stump model file (enables cls ranking)");
    app->add_option("--seed", seed, "Master seed for randomized ranking");
    app->add_option("--max-proposals", max_proposals, "Keep at most this many proposals (0 = all)");
    app->add_option("--nms", nms, "Suppress proposals with IoU above this against a better one (0 = off)");
    app->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  }

  DiversificationConfig config() const {
    DiversificationConfig c = preset(preset_name);
    if (!channels.empty()) {
      c.channels.clear();
      for (char ch : channels) c.channels.insert(channel_from_letter(ch));
    }
    if (!levels.empty()) {
      const auto parsed = parse_list<int>(levels);
      c.levels = {parsed.begin(), parsed.end()};
    }
    if (!cues.empty()) {
      c.cues.clear();
      for (char ch : cues) c.cues.insert(cue_from_letter(ch));
    }
    if (!rank.empty())
      c.strategy = strategy_from_name(rank);
    else
      c.strategy = model_path.empty() ? RankStrategy::PRNFA : RankStrategy::CLS;
    c.seed = seed;
    if (max_proposals > 0) c.max_proposals = max_proposals;
    if (nms > 0.0) c.nms_threshold = nms;
    c.threads = threads;
    c.validate();
    return c;
  }

  std::optional<StumpEnsemble> model() const {
    if (model_path.empty()) return std::nullopt;
    return StumpEnsemble::load(fs::path(model_path));
  }
};

void dump_regions(const RgbImage& image, const DiversificationConfig& config, const fs::path& dir,
                  const std::string& stem) {
  fs::create_directories(dir);
  const ChannelSet set = decompose(image, config.channels, config.levels);
  for (const Channel& channel : set.channels) {
    const Segmentation seg = segment(channel, set.width, set.height, config.mser);
    const Raster labels = region_label_raster(seg.regions, static_cast<int>(channel.raster.cols()),
                                              static_cast<int>(channel.raster.rows()));
    const fs::path out = dir / (stem + "_" + channel_letter(channel.id) + std::to_string(channel.level) + ".pgm");
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write " + out.string());
    f << "P5\n" << labels.cols() << ' ' << labels.rows() << "\n255\n";
    f.write(reinterpret_cast<const char*>(labels.data()), labels.size());
  }
}

int run_propose(const std::string& input, const ConfigArgs& args, const std::string& out, const std::string& format_name,
                const std::string& dump_dir) {
  const DiversificationConfig config = args.config();
  const auto model = args.model();
  const ProposalFormat format = proposal_format_from_name(format_name);
  const std::string ext = format == ProposalFormat::Csv ? ".csv" : ".json";

  const fs::path in(input);
  if (fs::is_directory(in)) {
    if (out.empty()) throw ArgumentError("--out must name a directory when the input is a directory");
    fs::create_directories(out);
    for (const fs::path& image_path : list_images(in)) {
      const RgbImage image = load_image(image_path);
      const ProposalList list = propose(image, config, model ? &*model : nullptr);
      write_proposals(list, fs::path(out) / (image_path.stem().string() + ext), format);
      if (!dump_dir.empty()) dump_regions(image, config, dump_dir, image_path.stem().string());
      std::cerr << image_path.filename().string() << ": " << list.proposals.size() << " proposals\n";
    }
    return 0;
  }

  const RgbImage image = load_image(in);
  const ProposalList list = propose(image, config, model ? &*model : nullptr);
  if (!dump_dir.empty()) dump_regions(image, config, dump_dir, in.stem().string());
  if (out.empty())
    write_proposals(list, std::cout, format);
  else
    write_proposals(list, fs::path(out), format);
  return 0;
}

ProposalSet load_proposals(const fs::path& path) {
  if (!fs::is_directory(path)) return ingest_external_proposals(path);
  ProposalSet set;
  for (const auto& entry : fs::directory_iterator(path)) {
    const fs::path& p = entry.path();
    if (p.extension() == ".csv" || p.extension() == ".json") set[p.stem().string()] = read_proposal_boxes(p);
  }
  return set;
}

int run_evaluate(const std::string& gt_dir, const std::string& gt_format, const std::string& proposals,
                 const std::string& iou_list, const std::string& topn_list, const std::string& out) {
  const GroundTruth gt = ingest_ground_truth(gt_dir, ground_truth_format_from_name(gt_format));
  const ProposalSet set = load_proposals(proposals);
  check_image_ids(gt, set);
  CurveOptions options;
  options.iou_grid = parse_list<double>(iou_list);
  options.n_grid = parse_list<std::size_t>(topn_list);
  options.n_grid.push_back(0);

  std::printf("%-6s %-8s %s\n", "iou", "topn", "recall");
  for (double t : options.iou_grid)
    for (std::size_t n : options.n_grid)
      if (n > 0) std::printf("%-6.2f %-8zu %.4f\n", t, n, recall_at(gt, set, n, t));
  const auto result = curves(gt, set, options);
  for (const RecallCurve& c : result)
    if (c.axis == CurveAxis::ProposalCount)
      std::printf("AUC recall-vs-n   iou=%g: %.4f\n", c.fixed, c.auc);
    else if (c.fixed > 0)
      std::printf("AUC recall-vs-iou n=%g: %.4f\n", c.fixed, c.auc);
    else
      std::printf("AUC recall-vs-iou n=all: %.4f\n", c.auc);
  write_curves_csv(result, out);
  return 0;
}

struct BenchRow {
  std::string label;
  double avg_proposals = 0;
  double recall[3] = {0, 0, 0};
  double seconds = 0;
};

int run_bench(const ConfigArgs& args, const std::vector<std::string>& presets, std::size_t synthetic,
              std::uint64_t synth_seed, const std::string& images_dir, const std::string& gt_dir,
              const std::string& gt_format) {
  std::vector<std::pair<std::string, RgbImage>> images;
  GroundTruth gt;
  if (!gt_dir.empty()) {
    gt = ingest_ground_truth(gt_dir, ground_truth_format_from_name(gt_format));
    const fs::path dir = images_dir.empty() ? fs::path(gt_dir) : fs::path(images_dir);
    for (const auto& [id, boxes] : gt.images) {
      const auto path = find_image(dir, id);
      if (!path) throw IoError("no image for ground-truth id '" + id + "' in " + dir.string());
      images.emplace_back(id, load_image(*path));
    }
  } else {
    auto scenes = make_dataset(synthetic, synth_seed);
    gt = ground_truth_of(scenes);
    for (auto& s : scenes) images.emplace_back(s.id, std::move(s.image));
  }
  const auto model = args.model();

  std::vector<BenchRow> rows;
  for (const std::string& name : presets) {
    ConfigArgs a = args;
    a.preset_name = name;
    const DiversificationConfig config = a.config();
    ProposalSet set;
    BenchRow row;
    row.label = config.label() + " " + strategy_name(config.strategy);
    std::size_t total = 0;
    for (const auto& [id, image] : images) {
      const auto t0 = std::chrono::steady_clock::now();
      const ProposalList list = propose(image, config, model ? &*model : nullptr);
      row.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      auto& boxes = set[id];
      for (const Proposal& p : list.proposals) boxes.push_back(p.bbox.cast<double>());
      total += list.proposals.size();
    }
    const double count = static_cast<double>(images.size());
    row.avg_proposals = static_cast<double>(total) / count;
    row.seconds /= count;
    const double ts[3] = {0.5, 0.7, 0.9};
    for (int k = 0; k < 3; ++k) row.recall[k] = recall_at(gt, set, std::max<std::size_t>(total, 1), ts[k]);
    rows.push_back(row);
  }

  std::printf("%-28s %10s %8s %8s %8s %8s\n", "configuration", "#prop", "R@0.5", "R@0.7", "R@0.9", "s/img");
  for (const BenchRow& r : rows)
    std::printf("%-28s %10.0f %8.3f %8.3f %8.3f %8.2f\n", r.label.c_str(), r.avg_proposals, r.recall[0],
                r.recall[1], r.recall[2], r.seconds);
  return 0;
}

int run_train(const ConfigArgs& args, int rounds, std::size_t synthetic, std::uint64_t synth_seed,
              const std::string& images_dir, const std::string& gt_dir, const std::string& gt_format,
              const std::string& out) {
  std::vector<LabeledImage> dataset;
  if (!gt_dir.empty()) {
    const GroundTruth gt = ingest_ground_truth(gt_dir, ground_truth_format_from_name(gt_format));
    const fs::path dir = images_dir.empty() ? fs::path(gt_dir) : fs::path(images_dir);
    for (const auto& [id, boxes] : gt.images) {
      const auto path = find_image(dir, id);
      if (!path) throw IoError("no image for ground-truth id '" + id + "' in " + dir.string());
      LabeledImage item{load_image(*path), {}};
      for (const auto& b : boxes)
        if (!b.ignore) item.words.push_back(b.box);
      dataset.push_back(std::move(item));
    }
  } else {
    for (auto& s : make_dataset(synthetic, synth_seed)) {
      LabeledImage item{std::move(s.image), {}};
      for (const auto& w : s.words) item.words.push_back(w.cast<double>());
      dataset.push_back(std::move(item));
    }
  }
  const TrainingSet data = harvest_training_data(dataset, args.config());
  std::cerr << "harvested " << data.positives() << " text and " << data.negatives() << " non-text nodes\n";
  TrainingTrace trace;
  const StumpEnsemble model = train(data, rounds, &trace);
  model.save(fs::path(out));
  std::cerr << "training error " << trace.training_error.back() << ", loss bound " << trace.loss_bound.back()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text region proposals from diversified MSER grouping hierarchies"};
  app.require_subcommand(1);

  ConfigArgs propose_args;
  std::string image, propose_out, format = "csv", dump_dir;
  auto* propose_cmd = app.add_subcommand("propose", "Generate ranked proposals for an image or directory");
  propose_cmd->add_option("image", image, "Image file or directory")->required();
  propose_args.add(propose_cmd);
  propose_cmd->add_option("--out", propose_out, "Output file (stdout when omitted) or directory");
  propose_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  propose_cmd->add_option("--dump-regions", dump_dir, "Write MSER label rasters (PGM) into this directory");

  std::string gt_dir, gt_format = "icdar2013", proposals, iou_list = "0.5,0.7,0.9",
                      topn_list = "10,100,1000,10000", eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "Recall of proposals against ground truth");
  eval_cmd->add_option("--gt", gt_dir, "Ground truth directory or file")->required();
  eval_cmd->add_option("--gt-format", gt_format, "icdar2013, svt-xml or plain-boxes");
  eval_cmd->add_option("--proposals", proposals, "Proposal directory (one file per image) or CSV")->required();
  eval_cmd->add_option("--iou", iou_list, "Comma-separated IoU thresholds");
  eval_cmd->add_option("--topn", topn_list, "Comma-separated proposal cutoffs");
  eval_cmd->add_option("--out", eval_out, "Recall curves and AUC summary CSV")->required();

  ConfigArgs bench_args;
  std::string bench_presets = "i-d,i-df,i-dfbgs,rgbi-dfbgs,full", bench_images, bench_gt,
              bench_gt_format = "icdar2013";
  std::size_t bench_synthetic = 20;
  std::uint64_t bench_synth_seed = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Recall and timing summary across presets");
  bench_args.add(bench_cmd);
  bench_cmd->add_option("--presets", bench_presets, "Comma-separated presets");
  bench_cmd->add_option("--synthetic", bench_synthetic, "Number of synthetic images when no --gt is given");
  bench_cmd->add_option("--synthetic-seed", bench_synth_seed, "First synthetic scene seed");
  bench_cmd->add_option("--images", bench_images, "Image directory (defaults to the --gt directory)");
  bench_cmd->add_option("--gt", bench_gt, "Ground truth directory or file");
  bench_cmd->add_option("--gt-format", bench_gt_format, "icdar2013, svt-xml or plain-boxes");

  ConfigArgs train_args;
  int rounds = 100;
  std::size_t train_synthetic = 40;
  std::uint64_t train_synth_seed = 1000;
  std::string train_images, train_gt, train_gt_format = "icdar2013", train_out;
  auto* train_cmd = app.add_subcommand("train", "Train the group classifier from labeled images");
  train_args.add(train_cmd);
  train_cmd->add_option("--rounds", rounds, "Boosting rounds")->check(CLI::PositiveNumber);
  train_cmd->add_option("--synthetic", train_synthetic, "Number of synthetic images when no --gt is given");
  train_cmd->add_option("--synthetic-seed", train_synth_seed, "First synthetic scene seed");
  train_cmd->add_option("--images", train_images, "Image directory (defaults to the --gt directory)");
  train_cmd->add_option("--gt", train_gt, "Ground truth directory or file");
  train_cmd->add_option("--gt-format", train_gt_format, "icdar2013, svt-xml or plain-boxes");
  train_cmd->add_option("--out", train_out, "Model file")->required();

  std::size_t synth_count = 20;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset with ICDAR-style ground truth");
  synth_cmd->add_option("--count", synth_count, "Number of images");
  synth_cmd->add_option("--seed", synth_seed, "First scene seed");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (propose_cmd->parsed()) return run_propose(image, propose_args, propose_out, format, dump_dir);
    if (eval_cmd->parsed())
      return run_evaluate(gt_dir, gt_format, proposals, iou_list, topn_list, eval_out);
    if (bench_cmd->parsed()) {
      std::vector<std::string> presets;
      std::stringstream ss(bench_presets);
      for (std::string p; std::getline(ss, p, ',');) presets.push_back(p);
      return run_bench(bench_args, presets, bench_synthetic, bench_synth_seed, bench_images, bench_gt,
                       bench_gt_format);
    }
    if (train_cmd->parsed())
      return run_train(train_args, rounds, train_synthetic, train_synth_seed, train_images, train_gt,
                       train_gt_format, train_out);
    if (synth_cmd->parsed()) {
      write_dataset(make_dataset(synth_count, synth_seed), synth_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "textprop: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
