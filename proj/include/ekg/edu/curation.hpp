#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ekg::edu {

// Cells exactly as read; no interpretation.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const RawTable&, const RawTable&) = default;
};

// RFC 4180 style: comma separated, optional double-quoted fields, first line
// is the header. Throws Error(RaggedRow) naming the 1-based data row whose
// cell count differs from the header.
RawTable parse_csv(std::string_view text);
// Throws Error(Io) when the file cannot be read.
RawTable load_csv(const std::filesystem::path& path);
std::string write_csv(const RawTable& table);

// Column names of the xAPI-Edu-Data file, in file order. The last one (Class)
// is the performance label, the other 16 are the dataset's features.
const std::vector<std::string>& source_columns();
inline constexpr const char* kLabelColumn = "Class";

enum class FeatureKind { Integer, Category };

enum class Feature {
  Topic,
  Stage,
  Semester,
  RaisedHands,
  VisitedResources,
  AnnouncementsView,
  Discussion,
  AbsenceDays,
  ScoreLevel,
  Gender,
  PlaceOfBirth,
};

struct FeatureInfo {
  Feature id;
  std::string_view name;    // canonical name used by rules and the curated CSV
  FeatureKind kind;
  std::string_view column;  // source column
  // Closed vocabulary in curated form; empty for integers and open categories.
  std::vector<std::string_view> vocabulary;
  // Other accepted spellings (source column, graph predicate names).
  std::vector<std::string_view> aliases;
};

const std::vector<FeatureInfo>& record_features();
const FeatureInfo& feature_info(Feature f);
// Case-insensitive lookup over canonical names and aliases.
std::optional<Feature> find_feature(std::string_view name);

struct CuratedRecord {
  std::int64_t student_index = 0;  // 1-based row order
  std::string topic;
  std::string stage;
  std::string semester;            // Semester1 | Semester2
  std::int64_t raised_hands = 0;
  std::int64_t visited_resources = 0;
  std::int64_t announcements_view = 0;
  std::int64_t discussion = 0;
  std::string absence_days;        // Under-7 | Above-7
  std::string score_level;         // Low-Level | Middle-Level | High-Level
  std::string gender;
  std::string place_of_birth;

  friend bool operator==(const CuratedRecord&, const CuratedRecord&) = default;
};

using FeatureValue = std::variant<std::int64_t, std::string>;
FeatureValue feature_value(const CuratedRecord& record, Feature f);

struct CurationIssue {
  std::size_t row = 0;  // 1-based data row in the input table, 0 for the header
  std::string column;
  std::string problem;
  std::string action;   // "corrected" | "dropped" | "renamed"
};

struct CurationReport {
  std::size_t rows_in = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_dropped = 0;
  std::size_t cells_corrected = 0;
  std::size_t columns_renamed = 0;
  std::vector<CurationIssue> issues;
};

struct CleanResult {
  RawTable table;
  CurationReport report;
};

// Normalizes header spellings to the source column names, then repairs each
// row through the closed alias tables (case, whitespace, known synonyms).
// Rows with unparseable counters or out-of-vocabulary categories are dropped.
// Throws Error(SchemaMismatch) when a required column is absent.
CleanResult clean(const RawTable& table);

// Projects curated records in row order, numbering students from 1.
// Throws Error(SchemaMismatch) on a missing column or an uncleaned cell.
std::vector<CuratedRecord> select_features(const RawTable& cleaned);

// Deterministic table with the source schema; categories from the closed
// vocabularies, counters in [0, 100].
RawTable gen_synthetic(std::uint64_t seed, std::size_t n);

// Curated records as CSV, one column per feature in record_features() order
// after studentIndex.
std::string write_records_csv(const std::vector<CuratedRecord>& records);
std::string report_to_json(const CurationReport& report);

}  // namespace ekg::edu
