#include "textprop/eval.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "textprop/error.hpp"

namespace textprop {

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.width() * a.height() + b.width() * b.height() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::size_t GroundTruth::counted_boxes() const {
  std::size_t count = 0;
  for (const auto& [id, boxes] : images)
    for (const auto& b : boxes) count += b.ignore ? 0 : 1;
  return count;
}

GroundTruthFormat ground_truth_format_from_name(const std::string& name) {
  if (name == "icdar2013") return GroundTruthFormat::Icdar2013;
  if (name == "svt-xml") return GroundTruthFormat::SvtXml;
  if (name == "plain-boxes") return GroundTruthFormat::PlainBoxes;
  throw ArgumentError("unknown ground-truth format '" + name + "'");
}

namespace {

std::string clean_line(std::string line, std::size_t line_no) {
  if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t");
    const auto e = field.find_last_not_of(" \t");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

Box checked_box(double xmin, double ymin, double xmax, double ymax, const std::string& file,
                std::size_t line) {
  if (xmin > xmax || ymin > ymax) throw ParseError(file, line, "box with xmin > xmax or ymin > ymax");
  return {xmin, ymin, xmax, ymax};
}

GroundTruth ingest_icdar(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  static const std::regex line_re(
      R"(^\s*(-?[0-9.]+)\s*[,\s]\s*(-?[0-9.]+)\s*[,\s]\s*(-?[0-9.]+)\s*[,\s]\s*(-?[0-9.]+)\s*(?:[,\s]\s*(.*?))?\s*$)");
  GroundTruth gt;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::string id = file.stem().string();
    if (id.rfind("gt_", 0) == 0) id.erase(0, 3);
    auto& boxes = gt.images[id];
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::string raw;
    for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
      const std::string line = clean_line(raw, line_no);
      if (blank(line)) continue;
      std::smatch m;
      if (!std::regex_match(line, m, line_re))
        throw ParseError(file.string(), line_no, "expected x1,y1,x2,y2,\"transcription\"");
      double v[4];
      for (int i = 0; i < 4; ++i) {
        const auto num = parse_number(m[i + 1].str());
        if (!num) throw ParseError(file.string(), line_no, "bad coordinate '" + m[i + 1].str() + "'");
        v[i] = *num;
      }
      GroundTruthBox box;
      box.box = checked_box(v[0], v[1], v[2], v[3], file.string(), line_no);
      std::string text = m[5].matched ? m[5].str() : std::string();
      if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
      box.transcription = text;
      box.ignore = text == "###";
      boxes.push_back(std::move(box));
    }
  }
  return gt;
}

GroundTruth ingest_svt(std::filesystem::path path) {
  if (std::filesystem::is_directory(path)) path /= "test.xml";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(path.string(), e.line(), e.message());
  }
  GroundTruth gt;
  const auto tagset = tree.get_child_optional("tagset");
  if (!tagset) throw ParseError(path.string(), 1, "missing <tagset> root");
  for (const auto& [tag, image] : *tagset) {
    if (tag != "image") continue;
    const std::string name = image.get<std::string>("imageName", "");
    if (name.empty()) throw ParseError(path.string(), 0, "<image> without <imageName>");
    const std::string id = std::filesystem::path(name).stem().string();
    auto& boxes = gt.images[id];
    const auto rects = image.get_child_optional("taggedRectangles");
    if (!rects) continue;
    for (const auto& [rtag, rect] : *rects) {
      if (rtag != "taggedRectangle") continue;
      try {
        const double x = rect.get<double>("<xmlattr>.x");
        const double y = rect.get<double>("<xmlattr>.y");
        const double w = rect.get<double>("<xmlattr>.width");
        const double h = rect.get<double>("<xmlattr>.height");
        if (w < 0 || h < 0) throw ParseError(path.string(), 0, "negative rectangle size in " + id);
        GroundTruthBox box;
        box.box = {x, y, x + w, y + h};
        box.transcription = rect.get<std::string>("tag", "");
        boxes.push_back(std::move(box));
      } catch (const pt::ptree_error& e) {
        throw ParseError(path.string(), 0, std::string("bad taggedRectangle in ") + id + ": " + e.what());
      }
    }
  }
  return gt;
}

struct CsvRow {
  std::string id;
  Box box;
  std::optional<double> score;
};

std::vector<CsvRow> read_box_csv(const std::filesystem::path& path, bool allow_score) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<CsvRow> rows;
  std::string raw;
  for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
    const std::string line = clean_line(raw, line_no);
    if (blank(line)) continue;
    const auto fields = split_csv(line);
    if (line_no == 1 && fields.size() >= 2 && !parse_number(fields[1])) continue;  // header
    const std::size_t expected_max = allow_score ? 6 : 5;
    if (fields.size() < 5 || fields.size() > expected_max)
      throw ParseError(path.string(), line_no,
                       "expected image-id,xmin,ymin,xmax,ymax" + std::string(allow_score ? "[,score]" : ""));
    double v[4];
    for (int i = 0; i < 4; ++i) {
      const auto num = parse_number(fields[i + 1]);
      if (!num) throw ParseError(path.string(), line_no, "bad number '" + fields[i + 1] + "'");
      v[i] = *num;
    }
    CsvRow row{fields[0], checked_box(v[0], v[1], v[2], v[3], path.string(), line_no), std::nullopt};
    if (fields.size() == 6) {
      row.score = parse_number(fields[5]);
      if (!row.score) throw ParseError(path.string(), line_no, "bad score '" + fields[5] + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

GroundTruth ingest_ground_truth(const std::filesystem::path& path, GroundTruthFormat format) {
  switch (format) {
    case GroundTruthFormat::Icdar2013: return ingest_icdar(path);
    case GroundTruthFormat::SvtXml: return ingest_svt(path);
    case GroundTruthFormat::PlainBoxes: {
      const auto file = std::filesystem::is_directory(path) ? path / "gt.csv" : path;
      GroundTruth gt;
      for (auto& row : read_box_csv(file, false)) gt.images[row.id].push_back({row.box, "", false});
      return gt;
    }
  }
  throw ArgumentError("unknown ground-truth format");
}

ProposalSet ingest_external_proposals(const std::filesystem::path& path) {
  const auto rows = read_box_csv(path, true);
  std::map<std::string, std::vector<CsvRow>> grouped;
  bool scored = false;
  for (const auto& row : rows) {
    grouped[row.id].push_back(row);
    scored = scored || row.score.has_value();
  }
  ProposalSet out;
  for (auto& [id, list] : grouped) {
    if (scored) {
      std::stable_sort(list.begin(), list.end(), [](const CsvRow& a, const CsvRow& b) {
        return a.score.value_or(-INFINITY) > b.score.value_or(-INFINITY);
      });
    }
    auto& boxes = out[id];
    for (const auto& row : list) boxes.push_back(row.box);
  }
  return out;
}

void check_image_ids(const GroundTruth& gt, const ProposalSet& proposals) {
  std::string missing;
  for (const auto& [id, boxes] : proposals)
    if (!gt.images.count(id)) missing += (missing.empty() ? "" : ", ") + id;
  if (!missing.empty()) throw ArgumentError("proposal image ids without ground truth: " + missing);
}

std::vector<std::optional<std::size_t>> first_match_ranks(const GroundTruth& gt,
                                                          const ProposalSet& proposals, double t) {
  check_image_ids(gt, proposals);
  std::vector<std::optional<std::size_t>> ranks;
  for (const auto& [id, boxes] : gt.images) {
    const auto it = proposals.find(id);
    for (const auto& g : boxes) {
      if (g.ignore) continue;
      std::optional<std::size_t> rank;
      if (it != proposals.end()) {
        const auto& list = it->second;
        for (std::size_t r = 0; r < list.size(); ++r) {
          if (iou(g.box, list[r]) >= t) {
            rank = r;
            break;
          }
        }
      }
      ranks.push_back(rank);
    }
  }
  return ranks;
}

double recall_at(const GroundTruth& gt, const ProposalSet& proposals, std::size_t n, double t) {
  if (n < 1) throw ArgumentError("recall_at: n must be >= 1");
  if (!(t > 0.0 && t <= 1.0)) throw ArgumentError("recall_at: threshold outside (0, 1]");
  check_image_ids(gt, proposals);
  std::size_t total = 0;
  std::size_t hit = 0;
  for (const auto& [id, boxes] : gt.images) {
    const auto it = proposals.find(id);
    for (const auto& g : boxes) {
      if (g.ignore) continue;
      ++total;
      if (it == proposals.end()) continue;
      const auto& list = it->second;
      const std::size_t limit = std::min(n, list.size());
      for (std::size_t r = 0; r < limit; ++r) {
        if (iou(g.box, list[r]) >= t) {
          ++hit;
          break;
        }
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

namespace {

double recall_from_ranks(const std::vector<std::optional<std::size_t>>& ranks, std::size_t n) {
  if (ranks.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& r : ranks) hit += (r && *r < n) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(ranks.size());
}

double trapezoid(const std::vector<std::pair<double, double>>& xy) {
  double area = 0.0;
  for (std::size_t i = 1; i < xy.size(); ++i)
    area += 0.5 * (xy[i].second + xy[i - 1].second) * (xy[i].first - xy[i - 1].first);
  return area;
}

}  // namespace

std::vector<RecallCurve> curves(const GroundTruth& gt, const ProposalSet& proposals,
                                const CurveOptions& options) {
  check_image_ids(gt, proposals);
  std::size_t longest = 0;
  for (const auto& [id, list] : proposals) longest = std::max(longest, list.size());

  // Cutoffs at 20 per decade, always including 1 and the full list.
  std::set<std::size_t> cutoffs{1};
  if (longest > 1) {
    for (double e = 0.0; std::pow(10.0, e) < static_cast<double>(longest); e += 0.05)
      cutoffs.insert(static_cast<std::size_t>(std::llround(std::pow(10.0, e))));
    cutoffs.insert(longest);
  }

  std::vector<RecallCurve> out;
  for (double t : options.iou_grid) {
    const auto ranks = first_match_ranks(gt, proposals, t);
    RecallCurve curve{CurveAxis::ProposalCount, t, {}, 0.0};
    for (std::size_t n : cutoffs) curve.samples.emplace_back(static_cast<double>(n), recall_from_ranks(ranks, n));
    if (longest <= 1) {
      curve.auc = curve.samples.front().second;
    } else {
      std::vector<std::pair<double, double>> log_axis;
      const double span = std::log10(static_cast<double>(longest));
      for (const auto& [n, r] : curve.samples) log_axis.emplace_back(std::log10(n) / span, r);
      curve.auc = trapezoid(log_axis);
    }
    out.push_back(std::move(curve));
  }

  std::vector<double> thresholds;
  for (int i = 0; i <= 10; ++i) thresholds.push_back(0.5 + 0.05 * i);
  std::vector<std::vector<std::optional<std::size_t>>> ranks_per_t;
  for (double t : thresholds) ranks_per_t.push_back(first_match_ranks(gt, proposals, t));
  for (std::size_t n : options.n_grid) {
    const std::size_t cutoff = n == 0 ? std::max<std::size_t>(longest, 1) : n;
    RecallCurve curve{CurveAxis::IouThreshold, static_cast<double>(n), {}, 0.0};
    for (std::size_t i = 0; i < thresholds.size(); ++i)
      curve.samples.emplace_back(thresholds[i], recall_from_ranks(ranks_per_t[i], cutoff));
    curve.auc = trapezoid(curve.samples) / 0.5;
    out.push_back(std::move(curve));
  }
  return out;
}

void write_curves_csv(const std::vector<RecallCurve>& curves, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  auto name = [](const RecallCurve& c) {
    return c.axis == CurveAxis::ProposalCount ? "recall_vs_n" : "recall_vs_iou";
  };
  out << "curve,fixed,x,recall\n";
  for (const auto& c : curves)
    for (const auto& [x, r] : c.samples) out << name(c) << ',' << c.fixed << ',' << x << ',' << r << '\n';
  out << "\ncurve,fixed,auc\n";
  for (const auto& c : curves) out << name(c) << ',' << c.fixed << ',' << c.auc << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace textprop
