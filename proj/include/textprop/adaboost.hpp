#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "textprop/features.hpp"

namespace textprop {

/// One decision stump: F[feature] <= threshold ? left : right.
struct Stump {
  int feature = 0;
  double threshold = 0.0;
  double left = 0.0;
  double right = 0.0;

  double operator()(const FeatureVector& f) const { return f[feature] <= threshold ? left : right; }
};

struct TrainingRow {
  FeatureVector features;
  bool text = false;
  double weight = 1.0;
};

struct TrainingSet {
  std::vector<TrainingRow> rows;

  std::size_t positives() const;
  std::size_t negatives() const;
};

/// Per-round diagnostics of a training run.
struct TrainingTrace {
  std::vector<double> normalizer;       // Z_t of each round
  std::vector<double> loss_bound;       // prod_{s<=t} Z_s, bounds the weighted training error
  std::vector<double> training_error;   // weighted 0/1 error of the ensemble after each round
};

/// Real AdaBoost ensemble of decision stumps over coefficient-of-variation features.
class StumpEnsemble {
 public:
  StumpEnsemble() = default;
  explicit StumpEnsemble(std::vector<Stump> stumps);

  const std::vector<Stump>& stumps() const { return stumps_; }
  std::size_t rounds() const { return stumps_.size(); }

  /// Sum of leaf confidences; positive means text. Throws ArgumentError on non-finite input.
  double confidence(const FeatureVector& f) const;
  /// Same for a raw feature span, which must hold exactly five values.
  double confidence(std::span<const double> f) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static StumpEnsemble load(std::istream& in, const std::string& name = "<stream>");
  static StumpEnsemble load(const std::filesystem::path& path);

 private:
  std::vector<Stump> stumps_;
};

/// Real AdaBoost (Schapire & Singer) with confidence-rated stumps. Each round
/// picks the (feature, midpoint threshold) minimizing Z = 2 sum sqrt(W+ W-)
/// and sets leaf outputs to 1/2 ln((W+ + eps) / (W- + eps)), eps = 1 / (4N).
/// Rows are put in a canonical value order first, so row permutations do not
/// change the model. Throws ArgumentError for fewer than two rows, a missing
/// class, non-positive weights or rounds < 1.
StumpEnsemble train(const TrainingSet& data, int rounds, TrainingTrace* trace = nullptr);

}  // namespace textprop
