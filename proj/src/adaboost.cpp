#include "textprop/adaboost.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "textprop/error.hpp"

namespace textprop {

std::size_t TrainingSet::positives() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const TrainingRow& r) { return r.text; }));
}

std::size_t TrainingSet::negatives() const { return rows.size() - positives(); }

StumpEnsemble::StumpEnsemble(std::vector<Stump> stumps) : stumps_(std::move(stumps)) {
  for (const Stump& s : stumps_) {
    if (s.feature < 0 || s.feature >= 5) throw ArgumentError("stump feature index out of range");
    if (!std::isfinite(s.threshold) || !std::isfinite(s.left) || !std::isfinite(s.right))
      throw ArgumentError("stump parameters must be finite");
  }
}

double StumpEnsemble::confidence(const FeatureVector& f) const {
  if (!f.allFinite()) throw ArgumentError("confidence: non-finite feature");
  double sum = 0.0;
  for (const Stump& s : stumps_) sum += s(f);
  return sum;
}

double StumpEnsemble::confidence(std::span<const double> f) const {
  if (f.size() != 5)
    throw ArgumentError("confidence: expected 5 features, got " + std::to_string(f.size()));
  return confidence(FeatureVector(Eigen::Map<const FeatureVector>(f.data())));
}

void StumpEnsemble::save(std::ostream& out) const {
  out << "textprop-stumps v1 " << stumps_.size() << '\n';
  char line[160];
  for (const Stump& s : stumps_) {
    std::snprintf(line, sizeof line, "%d %.17g %.17g %.17g\n", s.feature, s.threshold, s.left,
                  s.right);
    out << line;
  }
}

void StumpEnsemble::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model " + path.string());
  save(out);
  if (!out) throw IoError("cannot write model " + path.string());
}

StumpEnsemble StumpEnsemble::load(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(name + ": empty model file");
  std::istringstream header(line);
  std::string magic, version;
  long long rounds = -1;
  if (!(header >> magic >> version >> rounds) || magic != "textprop-stumps" || version != "v1" ||
      rounds < 1)
    throw FormatError(name + ": bad model header '" + line + "'");

  std::vector<Stump> stumps;
  for (long long i = 0; i < rounds; ++i) {
    if (!std::getline(in, line)) throw FormatError(name + ": truncated model");
    Stump s;
    // strtod keeps full precision for every representable value.
    const char* p = line.c_str();
    char* end = nullptr;
    const long feature = std::strtol(p, &end, 10);
    if (end == p) throw FormatError(name + ": bad stump line " + std::to_string(i + 2));
    double values[3];
    for (double& v : values) {
      p = end;
      v = std::strtod(p, &end);
      if (end == p) throw FormatError(name + ": bad stump line " + std::to_string(i + 2));
    }
    s.feature = static_cast<int>(feature);
    s.threshold = values[0];
    s.left = values[1];
    s.right = values[2];
    stumps.push_back(s);
  }
  try {
    return StumpEnsemble(std::move(stumps));
  } catch (const ArgumentError& e) {
    throw FormatError(name + ": " + e.what());
  }
}

StumpEnsemble StumpEnsemble::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path.string());
  return load(in, path.string());
}

namespace {

bool row_less(const TrainingRow& a, const TrainingRow& b) {
  for (int j = 0; j < 5; ++j)
    if (a.features[j] != b.features[j]) return a.features[j] < b.features[j];
  if (a.text != b.text) return a.text < b.text;
  return a.weight < b.weight;
}

struct Split {
  double z = std::numeric_limits<double>::infinity();
  Stump stump;
};

}  // namespace

StumpEnsemble train(const TrainingSet& data, int rounds, TrainingTrace* trace) {
  if (rounds < 1) throw ArgumentError("train: rounds must be >= 1");
  if (data.rows.size() < 2) throw ArgumentError("train: need at least two rows");
  if (data.positives() == 0 || data.negatives() == 0)
    throw ArgumentError("train: both classes must be present");
  for (const TrainingRow& r : data.rows) {
    if (!(r.weight > 0.0) || !std::isfinite(r.weight))
      throw ArgumentError("train: weights must be finite and positive");
    if (!r.features.allFinite()) throw ArgumentError("train: non-finite feature");
  }

  std::vector<TrainingRow> rows = data.rows;
  std::sort(rows.begin(), rows.end(), row_less);
  const std::size_t n = rows.size();
  const double eps = 1.0 / (4.0 * static_cast<double>(n));

  std::vector<double> w(n);
  const double total =
      std::accumulate(rows.begin(), rows.end(), 0.0, [](double s, const TrainingRow& r) { return s + r.weight; });
  for (std::size_t i = 0; i < n; ++i) w[i] = rows[i].weight / total;
  const std::vector<double> initial = w;

  // Value order per feature never changes; ties keep canonical row order.
  std::array<std::vector<std::size_t>, 5> order;
  for (int j = 0; j < 5; ++j) {
    order[j].resize(n);
    std::iota(order[j].begin(), order[j].end(), 0);
    std::stable_sort(order[j].begin(), order[j].end(), [&](std::size_t a, std::size_t b) {
      return rows[a].features[j] < rows[b].features[j];
    });
  }

  auto confidence_of = [eps](double pos, double neg) { return 0.5 * std::log((pos + eps) / (neg + eps)); };

  std::vector<Stump> stumps;
  std::vector<double> margin(n, 0.0);
  double bound = 1.0;
  for (int round = 0; round < rounds; ++round) {
    double pos_total = 0.0, neg_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) (rows[i].text ? pos_total : neg_total) += w[i];

    Split best;
    for (int j = 0; j < 5; ++j) {
      const auto& idx = order[j];
      double pos_left = 0.0, neg_left = 0.0;
      for (std::size_t s = 0; s + 1 < n; ++s) {
        const std::size_t i = idx[s];
        (rows[i].text ? pos_left : neg_left) += w[i];
        const double here = rows[i].features[j];
        const double next = rows[idx[s + 1]].features[j];
        if (here == next) continue;
        const double pos_right = std::max(pos_total - pos_left, 0.0);
        const double neg_right = std::max(neg_total - neg_left, 0.0);
        const double z = 2.0 * (std::sqrt(pos_left * neg_left) + std::sqrt(pos_right * neg_right));
        if (z < best.z) {
          best.z = z;
          best.stump = {j, here + 0.5 * (next - here), confidence_of(pos_left, neg_left),
                        confidence_of(pos_right, neg_right)};
        }
      }
    }
    if (!std::isfinite(best.z)) {
      // Every feature is constant: a single-leaf stump.
      best.z = 2.0 * std::sqrt(pos_total * neg_total);
      best.stump = {0, rows[0].features[0], confidence_of(pos_total, neg_total), 0.0};
    }
    stumps.push_back(best.stump);

    double z_actual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = rows[i].text ? 1.0 : -1.0;
      const double h = best.stump(rows[i].features);
      margin[i] += h;
      w[i] *= std::exp(-y * h);
      z_actual += w[i];
    }
    for (double& wi : w) wi /= z_actual;

    if (trace) {
      bound *= z_actual;
      double error = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool predicted = margin[i] > 0.0;
        if (predicted != rows[i].text) error += initial[i];
      }
      trace->normalizer.push_back(z_actual);
      trace->loss_bound.push_back(bound);
      trace->training_error.push_back(error);
    }
  }
  return StumpEnsemble(std::move(stumps));
}

}  // namespace textprop
