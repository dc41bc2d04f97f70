#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "textprop/box.hpp"

namespace textprop {

/// Intersection over union on continuous coordinates. Zero for disjoint boxes
/// and whenever the union has zero area.
double iou(const Box& a, const Box& b);

struct GroundTruthBox {
  Box box;
  std::string transcription;
  bool ignore = false;
};

/// Word boxes per image id (image file stem).
struct GroundTruth {
  std::map<std::string, std::vector<GroundTruthBox>> images;

  std::size_t counted_boxes() const;  // excluding ignore-flagged boxes
};

/// Ranked proposal boxes per image id, best first.
using ProposalSet = std::map<std::string, std::vector<Box>>;

enum class GroundTruthFormat { Icdar2013, SvtXml, PlainBoxes };

GroundTruthFormat ground_truth_format_from_name(const std::string& name);

/// icdar2013: directory of gt_<id>.txt files with `x1,y1,x2,y2,"text"` lines
///            (comma or whitespace separated); "###" marks an ignored word.
/// svt-xml:   the SVT XML file, or a directory holding test.xml.
/// plain-boxes: CSV `image-id,xmin,ymin,xmax,ymax`, or a directory holding gt.csv.
/// Malformed lines raise ParseError with file and line.
GroundTruth ingest_ground_truth(const std::filesystem::path& path, GroundTruthFormat format);

/// CSV `image-id,xmin,ymin,xmax,ymax[,score]` (optional header row). Lists are
/// sorted by descending score when a score column is present, file order otherwise.
ProposalSet ingest_external_proposals(const std::filesystem::path& path);

/// Throws ArgumentError listing proposal image ids missing from the ground truth.
void check_image_ids(const GroundTruth& gt, const ProposalSet& proposals);

/// Fraction of counted GT boxes covered (IoU >= t) by one of the first n
/// proposals of their image. Images without proposals count as uncovered.
double recall_at(const GroundTruth& gt, const ProposalSet& proposals, std::size_t n, double t);

/// Per counted GT box, the 0-based rank of the first proposal with IoU >= t,
/// or nullopt. Recall at any cutoff follows from these ranks.
std::vector<std::optional<std::size_t>> first_match_ranks(const GroundTruth& gt,
                                                          const ProposalSet& proposals, double t);

enum class CurveAxis { ProposalCount, IouThreshold };

struct RecallCurve {
  CurveAxis axis = CurveAxis::ProposalCount;
  double fixed = 0.0;  // the IoU threshold (count axis) or the proposal cutoff (IoU axis)
  std::vector<std::pair<double, double>> samples;  // (x, recall)
  double auc = 0.0;
};

struct CurveOptions {
  std::vector<double> iou_grid{0.5, 0.7, 0.9};
  /// Cutoffs for recall-vs-IoU curves; 0 means "all proposals".
  std::vector<std::size_t> n_grid{100, 1000, 10000, 0};
};

/// Recall-vs-N curves for each IoU in the grid (AUC over log10 N from 1 to
/// the longest list, normalized to [0, 1]) followed by recall-vs-IoU curves for
/// each cutoff (IoU 0.5 to 1.0 in steps of 0.05, AUC normalized over that range).
std::vector<RecallCurve> curves(const GroundTruth& gt, const ProposalSet& proposals,
                                const CurveOptions& options = {});

/// Writes curves as CSV: `curve,fixed,x,recall` rows, a blank line, then
/// `curve,fixed,auc` rows.
void write_curves_csv(const std::vector<RecallCurve>& curves, const std::filesystem::path& path);

}  // namespace textprop
