#include "textprop/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "textprop/error.hpp"
#include "textprop/features.hpp"

namespace textprop {

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

constexpr std::uint64_t kPrNfaSalt = 0x5052'4e46'4100'0000ULL;

}  // namespace

void DiversificationConfig::validate() const {
  if (channels.empty()) throw ArgumentError("config: no channels");
  if (levels.empty()) throw ArgumentError("config: no pyramid levels");
  if (cues.empty()) throw ArgumentError("config: no cues");
  for (int level : levels)
    if (level != 1 && level != 2) throw ArgumentError("config: pyramid levels must be 1 or 2");
  mser.validate();
  if (!(nfa.p_min > 0.0 && nfa.p_min <= 1.0)) throw ArgumentError("config: p_min outside (0, 1]");
  if (threads < 1) throw ArgumentError("config: threads must be at least 1");
  if (max_proposals && *max_proposals == 0) throw ArgumentError("config: max_proposals must be positive");
  if (nms_threshold && !(*nms_threshold > 0.0 && *nms_threshold <= 1.0))
    throw ArgumentError("config: nms threshold outside (0, 1]");
}

std::string DiversificationConfig::label() const {
  std::string out;
  if (levels.count(2)) out += "P2+";
  for (ChannelId c : channels) out += channel_letter(c);
  out += '+';
  for (Cue c : cues) out += cue_letter(c);
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"i-d", "i-df", "i-dfbgs", "fast", "rgbi-dfbgs", "full"};
  return names;
}

DiversificationConfig preset(const std::string& name) {
  using C = ChannelId;
  DiversificationConfig config;
  const std::set<Cue> all_cues{Cue::D, Cue::F, Cue::B, Cue::G, Cue::S};
  if (name == "i-d") {
    config.channels = {C::I};
    config.cues = {Cue::D};
  } else if (name == "i-df") {
    config.channels = {C::I};
    config.cues = {Cue::D, Cue::F};
  } else if (name == "i-dfbgs") {
    config.channels = {C::I};
    config.cues = all_cues;
  } else if (name == "fast") {
    config.channels = {C::R, C::G, C::B};
    config.cues = {Cue::D, Cue::F};
  } else if (name == "rgbi-dfbgs") {
    config.channels = {C::R, C::G, C::B, C::I};
    config.cues = all_cues;
  } else if (name == "full") {
    config.channels = {C::R, C::G, C::B, C::I};
    config.levels = {1, 2};
    config.cues = all_cues;
  } else {
    throw ArgumentError("unknown preset '" + name + "'");
  }
  return config;
}

GroupItem make_group_item(const Region& region, const RegionFeatures& features, int scale,
                          int width, int height) {
  GroupItem item;
  item.features = features.vector();
  item.features[kMajorAxis] *= scale;
  item.features[kStrokeWidth] *= scale;
  item.center = region.centroid * scale + Eigen::Vector2d::Constant(0.5 * (scale - 1));
  item.bbox = to_level1(region.bbox, scale, width, height);
  return item;
}

Segmentation segment(const Channel& channel, int width, int height, const MserParams& params) {
  Segmentation seg{channel.id, channel.level, channel.scale, {}, {}, 1.0};
  seg.regions = extract_mser_both(channel.raster, params);
  const Image<float> gradient = gradient_magnitude(channel.raster);
  seg.gradient_p99 = gradient_percentile99(gradient);
  seg.items.reserve(seg.regions.size());
  for (Region& region : seg.regions) {
    region.channel = channel.id;
    region.pyramid_level = channel.level;
    const RegionFeatures f = compute_features(region, channel.raster, gradient);
    seg.items.push_back(make_group_item(region, f, channel.scale, width, height));
  }
  return seg;
}

namespace {

struct HierarchyTask {
  std::size_t segmentation;
  Cue cue;
};

std::vector<Segmentation> segment_all(const RgbImage& image, const DiversificationConfig& config) {
  const ChannelSet set = decompose(image, config.channels, config.levels);
  std::vector<Segmentation> segs(set.channels.size());
  parallel_for(segs.size(), config.threads, [&](std::size_t i) {
    segs[i] = segment(set.channels[i], set.width, set.height, config.mser);
  });
  return segs;
}

std::vector<Hierarchy> cluster_all(const std::vector<Segmentation>& segs, int width, int height,
                                   const DiversificationConfig& config) {
  const double diagonal = std::hypot(static_cast<double>(width), static_cast<double>(height));
  std::vector<HierarchyTask> tasks;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (segs[s].items.empty()) continue;
    for (Cue cue : config.cues) tasks.push_back({s, cue});
  }
  std::vector<Hierarchy> hierarchies(tasks.size());
  parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
    const Segmentation& seg = segs[tasks[i].segmentation];
    const CueScale scale = default_cue_scale(tasks[i].cue, diagonal, seg.gradient_p99);
    hierarchies[i] = slc_cluster(seg.items, tasks[i].cue, scale, {seg.channel, seg.level, tasks[i].cue});
  });
  return hierarchies;
}

}  // namespace

std::vector<Hierarchy> build_hierarchies(const RgbImage& image, const DiversificationConfig& config) {
  config.validate();
  return cluster_all(segment_all(image, config), image.width(), image.height(), config);
}

std::vector<double> score_hierarchy(const Hierarchy& h, const DiversificationConfig& config,
                                    const StumpEnsemble* model) {
  switch (config.strategy) {
    case RankStrategy::PR: {
      UniformStream stream(stream_seed(config.seed, h.source));
      return rank_pseudorandom(h, std::ref(stream));
    }
    case RankStrategy::NFA: return rank_nfa(h, config.nfa);
    case RankStrategy::PRNFA: {
      UniformStream stream(stream_seed(config.seed ^ kPrNfaSalt, h.source));
      const Uniform01 uniform = std::ref(stream);
      return rank_nfa(h, config.nfa, &uniform);
    }
    case RankStrategy::CLS:
      if (!model) throw ArgumentError("CLS ranking requires a model");
      return rank_classifier(h, *model);
  }
  return {};
}

ProposalList propose(const RgbImage& image, const DiversificationConfig& config,
                     const StumpEnsemble* model) {
  config.validate();
  if (config.strategy == RankStrategy::CLS && !model)
    throw ArgumentError("CLS ranking requires a model");
  const std::vector<Hierarchy> hierarchies = build_hierarchies(image, config);

  std::vector<std::vector<double>> scores(hierarchies.size());
  parallel_for(hierarchies.size(), config.threads,
               [&](std::size_t i) { scores[i] = score_hierarchy(hierarchies[i], config, model); });

  std::vector<Proposal> pooled;
  for (std::size_t i = 0; i < hierarchies.size(); ++i) {
    const Hierarchy& h = hierarchies[i];
    const std::string source = h.source.label();
    for (std::size_t n = 0; n < h.nodes.size(); ++n) {
      Proposal p;
      p.bbox = h.nodes[n].bbox;
      p.score = scores[i][n];
      p.strategy = config.strategy;
      p.provenance = {static_cast<int>(i), static_cast<int>(n)};
      p.source = source;
      pooled.push_back(std::move(p));
    }
  }
  ProposalList list = dedup_and_sort(std::move(pooled));
  if (config.nms_threshold) list = non_maximum_suppression(list, *config.nms_threshold);
  if (config.max_proposals && list.proposals.size() > *config.max_proposals)
    list.proposals.resize(*config.max_proposals);
  return list;
}

ProposalList propose(const std::filesystem::path& image, const DiversificationConfig& config,
                     const StumpEnsemble* model) {
  return propose(load_image(image), config, model);
}

ProposalFormat proposal_format_from_name(const std::string& name) {
  if (name == "csv") return ProposalFormat::Csv;
  if (name == "json") return ProposalFormat::Json;
  throw ArgumentError("unknown proposal format '" + name + "'");
}

void write_proposals(const ProposalList& list, std::ostream& out, ProposalFormat format) {
  if (format == ProposalFormat::Csv) {
    out << "xmin,ymin,xmax,ymax,score,strategy\n";
    char score[40];
    for (const Proposal& p : list.proposals) {
      std::snprintf(score, sizeof score, "%.17g", p.score);
      out << p.bbox.xmin << ',' << p.bbox.ymin << ',' << p.bbox.xmax << ',' << p.bbox.ymax << ','
          << score << ',' << strategy_name(p.strategy) << '\n';
    }
  } else {
    nlohmann::json doc;
    doc["dedup"] = "exact-bbox";
    doc["nms"] = list.nms_applied ? nlohmann::json(list.nms_threshold) : nlohmann::json(nullptr);
    auto& arr = doc["proposals"] = nlohmann::json::array();
    for (const Proposal& p : list.proposals) {
      arr.push_back({{"xmin", p.bbox.xmin},
                     {"ymin", p.bbox.ymin},
                     {"xmax", p.bbox.xmax},
                     {"ymax", p.bbox.ymax},
                     {"score", p.score},
                     {"strategy", strategy_name(p.strategy)},
                     {"provenance",
                      {{"hierarchy", p.provenance.hierarchy}, {"node", p.provenance.node}, {"source", p.source}}}});
    }
    out << doc.dump(1) << '\n';
  }
}

void write_proposals(const ProposalList& list, const std::filesystem::path& path, ProposalFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_proposals(list, out, format);
  if (!out) throw IoError("cannot write " + path.string());
}

ProposalList read_proposals_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ProposalList list;
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    if (doc.contains("nms") && !doc["nms"].is_null()) {
      list.nms_applied = true;
      list.nms_threshold = doc["nms"].get<double>();
    }
    for (const auto& item : doc.at("proposals")) {
      Proposal p;
      p.bbox = {item.at("xmin").get<int>(), item.at("ymin").get<int>(), item.at("xmax").get<int>(),
                item.at("ymax").get<int>()};
      p.score = item.at("score").get<double>();
      p.strategy = strategy_from_name(item.at("strategy").get<std::string>());
      const auto& prov = item.at("provenance");
      p.provenance = {prov.at("hierarchy").get<int>(), prov.at("node").get<int>()};
      p.source = prov.at("source").get<std::string>();
      list.proposals.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return list;
}

std::vector<Box> read_proposal_boxes(const std::filesystem::path& path) {
  std::vector<Box> boxes;
  if (path.extension() == ".json") {
    for (const Proposal& p : read_proposals_json(path).proposals) boxes.push_back(p.bbox.cast<double>());
    return boxes;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line_no == 1 || line.empty()) continue;  // header
    Box b;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &b.xmin, &b.ymin, &b.xmax, &b.ymax) != 4)
      throw ParseError(path.string(), line_no, "expected xmin,ymin,xmax,ymax,...");
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace textprop
