#include "vsr/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "vsr/errors.hpp"

namespace vsr {

void PredictionSet::validate() const {
  if (n_options < 2 || n_options > OptionLabel::kMaxOptions)
    throw InvalidArgument(question_id + ": n_options out of range");
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    if (i > 0 && predictions[i - 1].sample_index >= p.sample_index)
      throw InvalidArgument(question_id + ": predictions not sorted by unique sample_index");
    if (p.option.index() < 0 || p.option.index() >= n_options)
      throw InvalidArgument(question_id + ": prediction option out of range");
    if (!(p.margin >= 0.0)) throw InvalidArgument(question_id + ": negative margin");
  }
}

std::string to_string(ConfidenceVariant v) {
  std::string out = v.intra == IntraConfidence::Marginal ? "marginal" : "maxlogit";
  out += v.inter == InterAggregate::Max ? ":max" : ":mean";
  return out;
}

ConfidenceVariant parse_confidence_variant(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  const auto colon = lower.find(':');
  if (colon == std::string::npos) throw InvalidArgument("confidence variant must be intra:inter, got " + lower);
  const auto intra = lower.substr(0, colon);
  const auto inter = lower.substr(colon + 1);
  ConfidenceVariant v;
  if (intra == "marginal") v.intra = IntraConfidence::Marginal;
  else if (intra == "maxlogit" || intra == "max_logit") v.intra = IntraConfidence::MaxLogit;
  else throw InvalidArgument("unknown intra confidence: " + intra);
  if (inter == "max") v.inter = InterAggregate::Max;
  else if (inter == "mean") v.inter = InterAggregate::Mean;
  else throw InvalidArgument("unknown inter aggregate: " + inter);
  return v;
}

OptionScores frequency_score(const PredictionSet& set) {
  if (set.predictions.empty()) throw EmptySet("frequency_score of empty prediction set " + set.question_id);
  std::map<OptionLabel, int> counts;
  for (const auto& p : set.predictions) ++counts[p.option];
  OptionScores out;
  const double n = static_cast<double>(set.predictions.size());
  for (const auto& [label, c] : counts) out[label] = c / n;
  return out;
}

OptionScores marginal_confidence_score(const PredictionSet& set, ConfidenceVariant variant) {
  struct Acc {
    double max = -INFINITY;
    double sum = 0.0;
    int n = 0;
  };
  std::map<OptionLabel, Acc> acc;
  for (const auto& p : set.predictions) {
    const double value = variant.intra == IntraConfidence::Marginal ? p.margin : p.max_logit;
    if (!std::isfinite(value)) throw MissingLogits(set.question_id + ": prediction without finite logits");
    auto& a = acc[p.option];
    a.max = std::max(a.max, value);
    a.sum += value;
    ++a.n;
  }
  OptionScores out;
  for (const auto& [label, a] : acc) out[label] = variant.inter == InterAggregate::Max ? a.max : a.sum / a.n;
  return out;
}

OptionScores voting_score(const PredictionSet& set, std::optional<OptionLabel> complementary) {
  OptionScores out;
  for (int i = 0; i < set.n_options; ++i) out[OptionLabel(i)] = 0.0;
  if (complementary && complementary->index() >= 0 && complementary->index() < set.n_options)
    out[*complementary] = 1.0;
  return out;
}

const OptionScore* ScoreBreakdown::find(OptionLabel label) const {
  for (const auto& o : options)
    if (o.label == label) return &o;
  return nullptr;
}

ScoreBreakdown combine_and_select(const PredictionSet& set, const ScoringParams& params,
                                  const OptionScores& s_v) {
  if (params.alpha < 0 || params.beta < 0) throw InvalidArgument("alpha and beta must be non-negative");
  const auto s_f = frequency_score(set);
  const auto s_mc = marginal_confidence_score(set, params.confidence);

  std::set<OptionLabel> candidates;
  for (const auto& [label, _] : s_f) candidates.insert(label);
  if (!params.restrict_to_sampled)
    for (const auto& [label, v] : s_v)
      if (v != 0.0) candidates.insert(label);

  auto lookup = [](const OptionScores& m, OptionLabel l) {
    auto it = m.find(l);
    return it == m.end() ? 0.0 : it->second;
  };

  ScoreBreakdown out;
  for (auto label : candidates) {
    OptionScore o{label, lookup(s_f, label), lookup(s_mc, label), lookup(s_v, label), 0.0};
    o.s_total = o.s_f + params.alpha * o.s_mc + params.beta * o.s_v;
    out.options.push_back(o);
  }
  // Candidates ascend by label, so strict comparisons keep the smaller label on full ties.
  const OptionScore* best = &out.options.front();
  for (const auto& o : out.options) {
    if (o.s_total > best->s_total || (o.s_total == best->s_total && o.s_f > best->s_f)) best = &o;
  }
  out.selected = best->label;
  return out;
}

std::optional<OptionLabel> consensus_shortcut(const PredictionSet& set) {
  if (set.predictions.empty()) throw EmptySet("consensus_shortcut of empty prediction set " + set.question_id);
  const auto first = set.predictions.front().option;
  for (const auto& p : set.predictions)
    if (p.option != first) return std::nullopt;
  return first;
}

OptionLabel majority_answer(const PredictionSet& set) {
  const auto s_f = frequency_score(set);
  auto best = s_f.begin();
  for (auto it = s_f.begin(); it != s_f.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

double pass_at_n(const std::vector<PredictionSet>& sets, const std::vector<OptionLabel>& truths, int n) {
  if (sets.size() != truths.size() || sets.empty())
    throw LengthMismatch("pass_at_n needs equal, nonzero numbers of prediction sets and truths");
  if (n < 1) throw InvalidArgument("pass_at_n needs n >= 1");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < sets.size(); ++q) {
    if (n > sets[q].n_requested)
      throw InvalidArgument("pass_at_n: n exceeds the samples requested for " + sets[q].question_id);
    for (const auto& p : sets[q].predictions) {
      if (p.sample_index < n && p.option == truths[q]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

}  // namespace vsr
