#include "textprop/ranking.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "textprop/adaboost.hpp"
#include "textprop/error.hpp"
#include "textprop/eval.hpp"

namespace textprop {

std::string strategy_name(RankStrategy strategy) {
  switch (strategy) {
    case RankStrategy::PR: return "PR";
    case RankStrategy::NFA: return "NFA";
    case RankStrategy::PRNFA: return "PR-NFA";
    case RankStrategy::CLS: return "CLS";
  }
  return "?";
}

RankStrategy strategy_from_name(const std::string& name) {
  std::string key;
  for (char c : name)
    if (c != '-' && c != '_') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "pr") return RankStrategy::PR;
  if (key == "nfa") return RankStrategy::NFA;
  if (key == "prnfa") return RankStrategy::PRNFA;
  if (key == "cls" || key == "prob") return RankStrategy::CLS;
  throw ArgumentError("unknown ranking strategy '" + name + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master_seed, const HierarchySource& source) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the source label
  for (char c : source.label()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master_seed) ^ h);
}

std::vector<int> breadth_first_ordinals(const Hierarchy& h) {
  std::vector<int> ordinal(h.nodes.size(), 0);
  if (h.root < 0) return ordinal;
  std::deque<int> queue{h.root};
  int next = 1;
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop_front();
    ordinal[node] = next++;
    if (!h.nodes[node].is_leaf()) {
      queue.push_back(h.nodes[node].children[0]);
      queue.push_back(h.nodes[node].children[1]);
    }
  }
  return ordinal;
}

std::vector<double> rank_pseudorandom(const Hierarchy& h, const Uniform01& uniform) {
  const std::vector<int> ordinal = breadth_first_ordinals(h);
  std::vector<double> scores(h.nodes.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = ordinal[i] * uniform();
  return scores;
}

double log_binomial_tail(long long k, long long n, double p) {
  if (n < 0 || k < 0 || k > n) throw ArgumentError("binomial_tail: require 0 <= k <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("binomial_tail: p outside [0, 1]");
  if (k == 0 || p == 1.0) return 0.0;
  if (p == 0.0) return -std::numeric_limits<double>::infinity();

  // Sum the terms relative to the largest one in the tail, walking outwards
  // from it; the binomial pmf is unimodal so both walks can stop early.
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double odds = p / (1.0 - p);
  const auto mode = std::max<long long>(
      k, std::min<long long>(n, static_cast<long long>(std::floor((n + 1) * p))));
  auto log_term = [&](long long i) {
    return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * log_p +
           (n - i) * log_q;
  };

  double sum = 1.0;
  double term = 1.0;
  for (long long i = mode; i < n; ++i) {  // t(i+1)/t(i) = (n-i)/(i+1) * odds
    term *= static_cast<double>(n - i) / static_cast<double>(i + 1) * odds;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  term = 1.0;
  for (long long i = mode; i > k; --i) {  // t(i-1)/t(i) = i/(n-i+1) / odds
    term *= static_cast<double>(i) / static_cast<double>(n - i + 1) / odds;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return std::min(0.0, log_term(mode) + std::log(sum));
}

double binomial_tail(long long k, long long n, double p) {
  return std::exp(log_binomial_tail(k, n, p));
}

std::vector<double> rank_nfa(const Hierarchy& h, const NfaParams& params, const Uniform01* uniform) {
  std::vector<double> scores(h.nodes.size());
  for (std::size_t i = 0; i < h.nodes.size(); ++i) {
    const GroupNode& node = h.nodes[i];
    const double p = std::clamp(node.cue_volume(), params.p_min, 1.0);
    scores[i] = log_binomial_tail(node.size, h.leaf_count, p);
    if (uniform) scores[i] += std::log((*uniform)());
  }
  return scores;
}

std::vector<double> rank_classifier(const Hierarchy& h, const StumpEnsemble& model) {
  std::vector<double> scores(h.nodes.size());
  for (std::size_t i = 0; i < h.nodes.size(); ++i)
    scores[i] = -model.confidence(h.nodes[i].stats.coefficient_of_variation());
  return scores;
}

ProposalList dedup_and_sort(std::vector<Proposal> pooled) {
  std::stable_sort(pooled.begin(), pooled.end(), [](const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.provenance < b.provenance;
  });
  ProposalList out;
  out.proposals.reserve(pooled.size());
  std::set<PixelBox> seen;
  for (Proposal& p : pooled)
    if (seen.insert(p.bbox).second) out.proposals.push_back(std::move(p));
  return out;
}

ProposalList non_maximum_suppression(const ProposalList& list, double threshold) {
  ProposalList out;
  out.nms_applied = true;
  out.nms_threshold = threshold;
  for (const Proposal& candidate : list.proposals) {
    const Box a = candidate.bbox.cast<double>();
    const bool suppressed =
        std::any_of(out.proposals.begin(), out.proposals.end(),
                    [&](const Proposal& kept) { return iou(a, kept.bbox.cast<double>()) > threshold; });
    if (!suppressed) out.proposals.push_back(candidate);
  }
  return out;
}

}  // namespace textprop
