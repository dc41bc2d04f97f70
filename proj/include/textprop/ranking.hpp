#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "textprop/box.hpp"
#include "textprop/grouping.hpp"

namespace textprop {

class StumpEnsemble;

enum class RankStrategy { PR, NFA, PRNFA, CLS };

std::string strategy_name(RankStrategy strategy);  // "PR", "NFA", "PR-NFA", "CLS"
RankStrategy strategy_from_name(const std::string& name);  // also accepts pr|nfa|prnfa|cls

/// Uniform (0, 1) stream over a 64-bit Mersenne twister. Values are produced
/// from the top 53 bits directly, so a seed yields the same sequence on every
/// standard library.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Seed for one hierarchy's stream, derived from the master seed and the source.
std::uint64_t stream_seed(std::uint64_t master_seed, const HierarchySource& source);

using Uniform01 = std::function<double()>;

/// Breadth-first ordinal from the root (root = 1, first child before second),
/// indexed by node.
std::vector<int> breadth_first_ordinals(const Hierarchy& h);

/// ordinal * U(0,1) per node; lower is better.
std::vector<double> rank_pseudorandom(const Hierarchy& h, const Uniform01& uniform);

/// Upper binomial tail sum_{i=k..n} C(n,i) p^i (1-p)^(n-i).
/// Throws ArgumentError unless 0 <= k <= n and 0 <= p <= 1.
double binomial_tail(long long k, long long n, double p);

/// Natural log of binomial_tail, finite whenever the tail is positive.
double log_binomial_tail(long long k, long long n, double p);

struct NfaParams {
  double p_min = 1e-6;
};

/// Log NFA per node: log B(k, n, p) with k the node size, n the leaf count and p
/// the node's normalized cue-space volume clamped to [p_min, 1]. With a
/// uniform source the score gains log U(0,1) (the randomized variant). Scores
/// are logarithms so extremely meaningful groups keep a strict order.
std::vector<double> rank_nfa(const Hierarchy& h, const NfaParams& params = {},
                             const Uniform01* uniform = nullptr);

/// Negated ensemble confidence over each node's coefficients of variation.
std::vector<double> rank_classifier(const Hierarchy& h, const StumpEnsemble& model);

struct Provenance {
  int hierarchy = 0;  // index into the pipeline's hierarchy list
  int node = 0;
  friend auto operator<=>(const Provenance&, const Provenance&) = default;
};

struct Proposal {
  PixelBox bbox;
  double score = 0.0;  // lower is better
  RankStrategy strategy = RankStrategy::PR;
  Provenance provenance;
  std::string source;  // hierarchy label such as "R1D"
};

struct ProposalList {
  std::vector<Proposal> proposals;  // best first
  bool nms_applied = false;
  double nms_threshold = 0.0;
};

/// Stable ascending sort by (score, provenance); keeps only the first
/// occurrence of each exact bbox.
ProposalList dedup_and_sort(std::vector<Proposal> pooled);

/// Optional greedy suppression of proposals overlapping a better one with IoU > threshold.
ProposalList non_maximum_suppression(const ProposalList& list, double threshold);

}  // namespace textprop
