#include <gtest/gtest.h>

#include "reconstruction_reference.hpp"
#include "tablemaster/content.hpp"
#include "test_support.hpp"

using namespace tablemaster;

namespace {

NormalizedTable wide() {
  return classify_only(Table({"A", "B", "C", "D", "E", "F"}, {{"1", "2", "3", "4", "5", "6"},
                                                              {"7", "8", "9", "10", "11", "12"}}));
}

}  // namespace

TEST(EstimateInformation, Examples) {
  TableOfFocus f = construct_focus(wide(), RowSet::all_rows(2, "all"), {"A"});
  tmtest::ScriptedSession s;
  s.backend.push(TemplateId::information_estimation, "Yes, sufficient.")
      .push(TemplateId::information_estimation, "No, the Wins column is missing.")
      .push(TemplateId::information_estimation, "blorp");
  EXPECT_TRUE(estimate_information(f, "q", s.lm).sufficient);
  EXPECT_FALSE(estimate_information(f, "q", s.lm).sufficient);
  SufficiencyVerdict v = estimate_information(f, "q", s.lm);
  EXPECT_TRUE(v.sufficient);
  EXPECT_EQ(v.raw_reply, "blorp");
  EXPECT_EQ(s.trace.steps()[2].warnings.size(), 1u);
}

TEST(ReconstructFocus, ScriptedVerdictTraces) {
  RankedColumns ranked{{"C", "A", "E", "B", "D", "F"}};
  {
    tmtest::ScriptedSession s;
    s.backend.push_all(TemplateId::information_estimation, {"No", "No", "Yes"});
    TableOfFocus f = reconstruct_focus(wide(), "q", RowSet::all_rows(2, "all"), {"A"}, ranked, s.lm);
    EXPECT_EQ(f.reconstruction_count, 2u);
    EXPECT_EQ(f.estimations, 3u);
    EXPECT_EQ(f.selected_columns, (std::vector<std::string>{"A", "C", "E"}));
  }
  {
    tmtest::ScriptedSession s;
    s.backend.sticky(TemplateId::information_estimation, "No");
    TableOfFocus f = reconstruct_focus(wide(), "q", RowSet::all_rows(2, "all"), {"A", "B"},
                                       RankedColumns{{"A", "B", "C", "D", "E", "F"}}, s.lm);
    EXPECT_EQ(f.reconstruction_count, 4u);
    EXPECT_EQ(f.estimations, 5u);
    EXPECT_EQ(f.selected_columns.size(), 6u);
    EXPECT_DOUBLE_EQ(f.condensation_ratio, 1.0);
  }
  {
    tmtest::ScriptedSession s;
    s.backend.push(TemplateId::information_estimation, "Yes");
    TableOfFocus f = reconstruct_focus(wide(), "q", RowSet::all_rows(2, "all"), {"D"}, ranked, s.lm);
    EXPECT_EQ(f.reconstruction_count, 0u);
    EXPECT_EQ(f.selected_columns, std::vector<std::string>{"D"});
    EXPECT_EQ(f.estimations, 1u);
  }
}

TEST(ReconstructFocus, MatchesReferenceOnRandomVerdicts) {
  tmtest::Rng rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    NormalizedTable t = classify_only(tmtest::random_table(rng, 4, 8, 1));
    std::vector<std::string> headers = t.table.headers();
    std::vector<std::string> ranked = headers;
    std::shuffle(ranked.begin(), ranked.end(), rng);
    std::vector<std::string> c0;
    std::size_t c0_size = tmtest::uniform(rng, 1, headers.size());
    for (std::size_t i = 0; i < c0_size; ++i) c0.push_back(ranked[(i * 7 + iter) % ranked.size()]);
    std::sort(c0.begin(), c0.end());
    c0.erase(std::unique(c0.begin(), c0.end()), c0.end());
    std::vector<bool> verdicts;
    for (std::size_t i = 0; i <= headers.size(); ++i) verdicts.push_back(tmtest::coin(rng, 0.3));

    std::size_t ref_calls = 0;
    tmtest::ReconstructionResult ref = tmtest::reconstruct_reference(
        c0, ranked, [&](const std::vector<std::string>&) { return verdicts[ref_calls++]; });

    tmtest::ScriptedSession s;
    for (bool v : verdicts) s.backend.push(TemplateId::information_estimation, v ? "Yes" : "No");
    TableOfFocus f =
        reconstruct_focus(t, "q", RowSet::all_rows(t.table.row_count(), "all"), c0, RankedColumns{ranked}, s.lm);
    ASSERT_EQ(f.selected_columns, ref.C);
    ASSERT_EQ(f.reconstruction_count, ref.e);
    ASSERT_EQ(f.estimations, ref.estimations);
    EXPECT_LE(f.estimations, headers.size() - c0.size() + 1);
    EXPECT_EQ(f.reconstruction_count, f.selected_columns.size() - c0.size());
  }
}

TEST(Verbalize, StoresReplyVerbatim) {
  TableOfFocus f = construct_focus(wide(), RowSet::all_rows(2, "all"), {"A"});
  tmtest::ScriptedSession s;
  s.backend.push(TemplateId::verbalization, "  Belgian riders won 9 stages.\n");
  VerbalizedTable v = verbalize(f, s.lm);
  EXPECT_EQ(v.text, "  Belgian riders won 9 stages.\n");
  EXPECT_FALSE(v.mechanical);
  EXPECT_EQ(v.source_focus_hash, focus_hash(f));
}

TEST(Verbalize, EmptyReplyUsesMechanicalText) {
  NormalizedTable t = classify_only(Table({"a", "b"}, {{"1", "2"}, {"3", "4"}}));
  TableOfFocus f = construct_focus(t, RowSet::all_rows(2, "all"), {"a", "b"});
  tmtest::ScriptedSession s;
  s.backend.push(TemplateId::verbalization, "   ");
  VerbalizedTable v = verbalize(f, s.lm);
  EXPECT_EQ(v.text, "Row 1: a=1; b=2. Row 2: a=3; b=4.");
  EXPECT_TRUE(v.mechanical);
}

TEST(FocusHash, TracksContent) {
  TableOfFocus a = construct_focus(wide(), RowSet::all_rows(2, "all"), {"A"});
  TableOfFocus b = construct_focus(wide(), RowSet::all_rows(2, "all"), {"A", "B"});
  EXPECT_EQ(focus_hash(a), focus_hash(construct_focus(wide(), RowSet::all_rows(2, "all"), {"A"})));
  EXPECT_NE(focus_hash(a), focus_hash(b));
}
