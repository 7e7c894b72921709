#include <gtest/gtest.h>

#include <json.hpp>
#include <random>

#include "ekg/edu/curation.hpp"
#include "ekg/error.hpp"
#include "test_support.hpp"

using namespace ekg;
using namespace ekg::edu;

namespace {

RawTable first_row_table() { return load_csv(EKG_FIXTURE_DIR "/first_row.csv"); }

std::size_t column(const RawTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST(Csv, QuotedFieldsAndLineEndings) {
  auto t = parse_csv("a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",2\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x, y");
  EXPECT_EQ(t.rows[0][1], "say \"hi\"");
  EXPECT_EQ(t.rows[1][0], "multi\nline");
}

TEST(Csv, BomAndTrailingBlankLines) {
  auto t = parse_csv("\xEF\xBB\xBFh1,h2\n1,2\n\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"h1", "h2"}));
  EXPECT_EQ(t.rows.size(), 1u);
}

TEST(Csv, EmptyCellsArePreserved) {
  auto t = parse_csv("a,b,c\n,,\n");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"", "", ""}));
}

TEST(Csv, RaggedRowNamesTheRow) {
  try {
    parse_csv("a,b\n1,2\n3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RaggedRow);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(Csv, UnterminatedQuote) {
  EXPECT_EQ(code_of([] { parse_csv("a\n\"oops\n"); }), ErrorCode::Parse);
}

TEST(Csv, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_csv("/nonexistent/x.csv"); }), ErrorCode::Io);
}

TEST(Csv, WriteParseRoundTrip) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "ab ,\"\n\r-x";
  for (int iter = 0; iter < 100; ++iter) {
    RawTable t;
    const std::size_t cols = 1 + rng() % 4;
    for (std::size_t c = 0; c < cols; ++c) t.header.push_back("h" + std::to_string(c));
    for (std::size_t r = 0; r < rng() % 6; ++r) {
      std::vector<std::string> row;
      for (std::size_t c = 0; c < cols; ++c) {
        std::string cell;
        for (std::size_t k = 0; k < rng() % 5; ++k) cell += alphabet[rng() % alphabet.size()];
        row.push_back(cell);
      }
      // A lone empty cell would be indistinguishable from a blank line.
      if (cols == 1 && row[0].empty()) row[0] = "z";
      t.rows.push_back(row);
    }
    EXPECT_EQ(parse_csv(write_csv(t)), t) << write_csv(t);
  }
}

TEST(Schema, SixteenFeaturesPlusLabel) {
  EXPECT_EQ(source_columns().size(), 17u);
  EXPECT_EQ(source_columns().back(), kLabelColumn);
}

TEST(Schema, FeatureLookupAcceptsAliases) {
  EXPECT_EQ(find_feature("raisedhands"), Feature::RaisedHands);
  EXPECT_EQ(find_feature("RAISEDHANDS"), Feature::RaisedHands);
  EXPECT_EQ(find_feature("VisITedResources"), Feature::VisitedResources);
  EXPECT_EQ(find_feature("EnrolledIn"), Feature::Topic);
  EXPECT_EQ(find_feature("Score"), Feature::ScoreLevel);
  EXPECT_EQ(find_feature("scoreLevel"), Feature::ScoreLevel);
  EXPECT_EQ(find_feature("StudentAbsenceDays"), Feature::AbsenceDays);
  EXPECT_EQ(find_feature("stage"), Feature::Stage);
  EXPECT_FALSE(find_feature("shoeSize"));
}

TEST(Clean, FirstRowYieldsListedValues) {
  auto cleaned = clean(first_row_table());
  EXPECT_EQ(cleaned.report.rows_in, 1u);
  EXPECT_EQ(cleaned.report.rows_dropped, 0u);
  EXPECT_EQ(cleaned.report.cells_corrected, 0u);
  auto records = select_features(cleaned.table);
  ASSERT_EQ(records.size(), 1u);
  const auto& r = records[0];
  EXPECT_EQ(r.student_index, 1);
  EXPECT_EQ(r.topic, "IT");
  EXPECT_EQ(r.stage, "lowerlevel");
  EXPECT_EQ(r.semester, "Semester1");
  EXPECT_EQ(r.raised_hands, 15);
  EXPECT_EQ(r.visited_resources, 16);
  EXPECT_EQ(r.announcements_view, 2);
  EXPECT_EQ(r.discussion, 20);
  EXPECT_EQ(r.absence_days, "Under-7");
  EXPECT_EQ(r.score_level, "Middle-Level");
  EXPECT_EQ(r.gender, "M");
  EXPECT_EQ(r.place_of_birth, "KuwaIT");
}

TEST(Clean, AliasesAreCorrectedAndReported) {
  auto t = first_row_table();
  t.rows[0][column(t, "gender")] = " m ";
  t.rows[0][column(t, "Class")] = "middle-level";
  t.rows[0][column(t, "Topic")] = "it";
  t.rows[0][column(t, "raisedhands")] = " 15";
  auto cleaned = clean(t);
  EXPECT_EQ(cleaned.report.cells_corrected, 4u);
  EXPECT_EQ(cleaned.report.rows_dropped, 0u);
  EXPECT_EQ(cleaned.table, first_row_table());
}

TEST(Clean, HeaderSpellingsAreNormalized) {
  auto t = first_row_table();
  t.header[column(t, "StudentAbsenceDays")] = "absence_days";
  t.header[column(t, "Class")] = "ScoreLevel";
  t.header[column(t, "raisedhands")] = "RaisedHands";
  auto cleaned = clean(t);
  EXPECT_EQ(cleaned.report.columns_renamed, 3u);
  EXPECT_EQ(cleaned.table.header, source_columns());
}

TEST(Clean, BadRowsAreDroppedNotGuessed) {
  auto base = first_row_table();
  const std::vector<std::pair<std::string, std::string>> bad = {
      {"raisedhands", "fifteen"}, {"raisedhands", "-3"},     {"Discussion", "2.5"},
      {"VisITedResources", ""},   {"Topic", "Astrology"},    {"Class", "X"},
      {"StageID", "college"},     {"Semester", "Summer"},    {"PlaceofBirth", "  "},
  };
  for (const auto& [col, value] : bad) {
    auto t = base;
    t.rows.push_back(t.rows[0]);
    t.rows[1][column(t, col)] = value;
    auto cleaned = clean(t);
    EXPECT_EQ(cleaned.report.rows_dropped, 1u) << col << "=" << value;
    EXPECT_EQ(cleaned.report.rows_kept, 1u);
    ASSERT_FALSE(cleaned.report.issues.empty());
    EXPECT_EQ(cleaned.report.issues.back().row, 2u);
    EXPECT_EQ(cleaned.report.issues.back().column, col);
    EXPECT_EQ(cleaned.report.issues.back().action, "dropped");
  }
}

TEST(Clean, MissingRequiredColumn) {
  auto t = first_row_table();
  const auto c = column(t, "Topic");
  t.header.erase(t.header.begin() + static_cast<long>(c));
  t.rows[0].erase(t.rows[0].begin() + static_cast<long>(c));
  EXPECT_EQ(code_of([&] { clean(t); }), ErrorCode::SchemaMismatch);
}

TEST(Clean, IsIdempotent) {
  std::mt19937_64 rng(5);
  auto t = gen_synthetic(3, 200);
  // Sprinkle repairable and unrepairable damage.
  for (auto& row : t.rows) {
    if (rng() % 5 == 0) row[column(t, "gender")] = row[column(t, "gender")] == "M" ? "male" : " f";
    if (rng() % 7 == 0) row[column(t, "Discussion")] = "n/a";
    if (rng() % 6 == 0) row[column(t, "Semester")] = "semester-2";
  }
  auto once = clean(t);
  auto twice = clean(once.table);
  EXPECT_GT(once.report.cells_corrected, 0u);
  EXPECT_GT(once.report.rows_dropped, 0u);
  EXPECT_EQ(twice.table, once.table);
  EXPECT_EQ(twice.report.cells_corrected, 0u);
  EXPECT_EQ(twice.report.rows_dropped, 0u);
}

TEST(Clean, SelectRejectsUncleanedTable) {
  auto t = first_row_table();
  t.rows[0][column(t, "Class")] = "medium";
  EXPECT_EQ(code_of([&] { select_features(t); }), ErrorCode::SchemaMismatch);
}

TEST(Synthetic, DeterministicAndClean) {
  auto a = gen_synthetic(7, 480);
  EXPECT_EQ(a, gen_synthetic(7, 480));
  EXPECT_NE(a, gen_synthetic(8, 480));
  EXPECT_EQ(a.header, source_columns());
  auto cleaned = clean(a);
  EXPECT_EQ(cleaned.report.rows_kept, 480u);
  EXPECT_EQ(cleaned.report.cells_corrected, 0u);
  auto records = select_features(cleaned.table);
  ASSERT_EQ(records.size(), 480u);
  for (const auto& r : records) {
    for (auto v : {r.raised_hands, r.visited_resources, r.announcements_view, r.discussion}) {
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 100);
    }
  }
  EXPECT_EQ(parse_csv(write_csv(a)), a);
}

TEST(Output, RecordsCsvAndReportJson) {
  auto cleaned = clean(first_row_table());
  auto csv = parse_csv(write_records_csv(select_features(cleaned.table)));
  ASSERT_EQ(csv.header.size(), 1 + record_features().size());
  EXPECT_EQ(csv.header[0], "studentIndex");
  EXPECT_EQ(csv.rows.at(0).at(0), "1");

  auto j = nlohmann::json::parse(report_to_json(cleaned.report));
  EXPECT_EQ(j["rowsIn"], 1);
  EXPECT_EQ(j["rowsKept"], 1);
  EXPECT_TRUE(j["issues"].is_array());
}
