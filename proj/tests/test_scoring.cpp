#include <doctest.h>

#include "vsr/errors.hpp"
#include "vsr/rng.hpp"
#include "vsr/scoring.hpp"

using namespace vsr;

namespace {

PredictionSet make_set(const std::string& letters, std::vector<double> margins = {}, int n_options = 4) {
  PredictionSet s;
  s.question_id = "q";
  s.n_options = n_options;
  s.n_requested = static_cast<int>(letters.size());
  for (std::size_t i = 0; i < letters.size(); ++i) {
    Prediction p;
    p.sample_index = static_cast<int>(i);
    p.option = OptionLabel(letters[i] - 'A');
    p.margin = i < margins.size() ? margins[i] : 0.0;
    p.max_logit = 10.0 + p.margin;
    s.predictions.push_back(p);
  }
  return s;
}

OptionLabel L(char c) { return OptionLabel(c - 'A'); }

}  // namespace

TEST_CASE("frequency score examples") {
  auto f = frequency_score(make_set("AAABBCAABA"));
  CHECK(f.size() == 3);
  CHECK(f[L('A')] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(f[L('B')] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f[L('C')] == doctest::Approx(0.1).epsilon(1e-12));

  f = frequency_score(make_set("AAAAAAAAAA"));
  CHECK(f.size() == 1);
  CHECK(f[L('A')] == 1.0);

  f = frequency_score(make_set("D"));
  CHECK(f[L('D')] == 1.0);

  CHECK_THROWS_AS(frequency_score(make_set("")), EmptySet);
}

TEST_CASE("marginal confidence examples") {
  const auto set = make_set("AAA", {2.0, 0.1, 1.3});
  CHECK(marginal_confidence_score(set, {IntraConfidence::Marginal, InterAggregate::Max})[L('A')] == 2.0);
  CHECK(marginal_confidence_score(set, {IntraConfidence::Marginal, InterAggregate::Mean})[L('A')] ==
        doctest::Approx(3.4 / 3).epsilon(1e-12));
  const auto mc = marginal_confidence_score(set);
  CHECK(mc.count(L('B')) == 0);
  // MaxLogit reads l_max instead of the margin.
  CHECK(marginal_confidence_score(set, {IntraConfidence::MaxLogit, InterAggregate::Max})[L('A')] == 12.0);
}

TEST_CASE("voting score examples") {
  const auto set = make_set("AABD");
  auto v = voting_score(set, L('B'));
  CHECK(v == OptionScores{{L('A'), 0}, {L('B'), 1}, {L('C'), 0}, {L('D'), 0}});
  v = voting_score(set, std::nullopt);
  for (auto [label, s] : v) CHECK(s == 0.0);
  CHECK(v.size() == 4);
  v = voting_score(set, L('C'));
  CHECK(v[L('C')] == 1.0);
  CHECK(voting_score(set, L('F'))[L('A')] == 0.0);
}

TEST_CASE("combined score example") {
  // A: S^f 0.6, S^mc 2.0, S^v 1 -> 0.6 + 2.0 + 3 = 5.6.
  const auto set = make_set("AAAAAABBBB", {2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5});
  const auto r = combine_and_select(set, ScoringParams{}, voting_score(set, L('A')));
  CHECK(r.selected == L('A'));
  CHECK(r.find(L('A'))->s_total == doctest::Approx(5.6).epsilon(1e-9));
  CHECK(r.find(L('B'))->s_total == doctest::Approx(0.4 + 0.5).epsilon(1e-9));
}

TEST_CASE("alpha = beta = 0 selects the majority answer") {
  const auto set = make_set("ABBCA", {9, 0, 0, 9, 9});
  const auto r = combine_and_select(set, ScoringParams{0.0, 0.0, {}, false}, voting_score(set, L('C')));
  CHECK(r.selected == majority_answer(set));
  CHECK(r.selected == L('A'));  // A and B tie on frequency; smaller label wins
}

TEST_CASE("ties go to higher frequency, then the smaller label") {
  // A: 0.75 + 0.5 = 1.25; B: 0.25 + 1.0 = 1.25 -> A by frequency.
  auto set = make_set("BAAA", {1.0, 0.5, 0.25, 0.25});
  auto r = combine_and_select(set, ScoringParams{1.0, 0.0, {}, false}, {});
  CHECK(r.find(L('A'))->s_total == r.find(L('B'))->s_total);
  CHECK(r.selected == L('A'));
  set = make_set("ABBB", {1.0, 0.5, 0.25, 0.25});
  r = combine_and_select(set, ScoringParams{1.0, 0.0, {}, false}, {});
  CHECK(r.selected == L('B'));
  // Identical S and S^f: smaller label.
  set = make_set("BA", {1.0, 1.0});
  r = combine_and_select(set, ScoringParams{}, voting_score(set, std::nullopt));
  CHECK(r.selected == L('A'));
}

TEST_CASE("an option outside the samples can win only through the vote") {
  const auto set = make_set("AAB", {0.5, 0.5, 0.5});
  auto r = combine_and_select(set, ScoringParams{}, voting_score(set, L('C')));
  CHECK(r.selected == L('C'));
  CHECK(r.find(L('C'))->s_f == 0.0);
  r = combine_and_select(set, ScoringParams{1.0, 3.0, {}, true}, voting_score(set, L('C')));
  CHECK(r.selected == L('A'));
  CHECK(r.find(L('C')) == nullptr);
}

TEST_CASE("consensus shortcut examples") {
  CHECK(consensus_shortcut(make_set("AAAAAAAAAA")) == L('A'));
  CHECK_FALSE(consensus_shortcut(make_set("AAAAAAAAAB")).has_value());
  CHECK(consensus_shortcut(make_set("C")) == L('C'));
  CHECK_THROWS_AS(consensus_shortcut(make_set("")), EmptySet);
}

TEST_CASE("pass@n examples") {
  std::vector<PredictionSet> sets{make_set("AB"), make_set("BB"), make_set("CA"), make_set("DD")};
  std::vector<OptionLabel> truths{L('B'), L('B'), L('A'), L('A')};
  CHECK(pass_at_n(sets, truths, 2) == 0.75);
  CHECK(pass_at_n(sets, truths, 1) == 0.25);
  sets = {make_set("AA"), make_set("CC")};
  CHECK(pass_at_n(sets, {L('B'), L('B')}, 2) == 0.0);
  CHECK_THROWS_AS(pass_at_n(sets, {L('B')}, 2), LengthMismatch);
  CHECK_THROWS_AS(pass_at_n(sets, {L('B'), L('B')}, 3), InvalidArgument);
}

TEST_CASE("pass@n is monotone in n") {
  Xoshiro256 rng(8);
  std::vector<PredictionSet> sets;
  std::vector<OptionLabel> truths;
  for (int q = 0; q < 200; ++q) {
    std::string letters;
    for (int i = 0; i < 10; ++i) letters.push_back(static_cast<char>('A' + rng.bounded(4)));
    sets.push_back(make_set(letters));
    truths.push_back(OptionLabel(static_cast<int>(rng.bounded(4))));
  }
  double prev = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const double p = pass_at_n(sets, truths, n);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("confidence variant names") {
  CHECK(parse_confidence_variant("maxlogit:mean") == ConfidenceVariant{IntraConfidence::MaxLogit, InterAggregate::Mean});
  CHECK(to_string(ConfidenceVariant{}) == "marginal:max");
  CHECK_THROWS_AS(parse_confidence_variant("entropy:max"), InvalidArgument);
}

TEST_CASE("prediction set validation") {
  auto set = make_set("AB");
  set.predictions[1].sample_index = 0;
  CHECK_THROWS(set.validate());
  set = make_set("AE");
  CHECK_THROWS(set.validate());
  set = make_set("AB", {-1.0, 0.0});
  CHECK_THROWS(set.validate());
}
