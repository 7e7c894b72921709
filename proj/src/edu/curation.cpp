#include "ekg/edu/curation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>

#include "ekg/error.hpp"

namespace ekg::edu {

// --- CSV ---------------------------------------------------------------------

RawTable parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool row_has_content = false;
  std::size_t i = 0;
  auto end_row = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    if (row_has_content || row.size() > 1 || !row.front().empty()) lines.push_back(std::move(row));
    row.clear();
    row_has_content = false;
  };
  while (i < text.size()) {
    char c = text[i++];
    if (quoted) {
      if (c == '"') {
        if (i < text.size() && text[i] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell.clear();
        break;
      case '\r':
        if (i < text.size() && text[i] == '\n') break;
        end_row();
        break;
      case '\n': end_row(); break;
      default: cell += c;
    }
  }
  if (quoted) throw Error(ErrorCode::Parse, "unterminated quoted CSV field");
  if (!cell.empty() || !row.empty()) end_row();

  RawTable table;
  if (lines.empty()) return table;
  table.header = std::move(lines.front());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].size() != table.header.size()) {
      throw Error(ErrorCode::RaggedRow,
                  "row " + std::to_string(r) + " has " + std::to_string(lines[r].size()) +
                      " cells, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(lines[r]));
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return parse_csv(ss.str());
}

namespace {

std::string csv_cell(const std::string& v) {
  if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_row(std::ostringstream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_cell(cells[i]);
  out << '\n';
}

}  // namespace

std::string write_csv(const RawTable& table) {
  std::ostringstream out;
  write_row(out, table.header);
  for (const auto& row : table.rows) write_row(out, row);
  return out.str();
}

// --- schema ------------------------------------------------------------------

const std::vector<std::string>& source_columns() {
  static const std::vector<std::string> columns = {
      "gender",           "NationalITy",           "PlaceofBirth",
      "StageID",          "GradeID",               "SectionID",
      "Topic",            "Semester",              "Relation",
      "raisedhands",      "VisITedResources",      "AnnouncementsView",
      "Discussion",       "ParentAnsweringSurvey", "ParentschoolSatisfaction",
      "StudentAbsenceDays", "Class"};
  return columns;
}

const std::vector<FeatureInfo>& record_features() {
  static const std::vector<FeatureInfo> features = {
      {Feature::Topic, "topic", FeatureKind::Category, "Topic",
       {"English", "Spanish", "French", "Arabic", "IT", "Math", "Chemistry", "Biology", "Science",
        "History", "Quran", "Geology"},
       {"EnrolledIn", "course"}},
      {Feature::Stage, "stage", FeatureKind::Category, "StageID",
       {"lowerlevel", "MiddleSchool", "HighSchool"}, {"StageID"}},
      {Feature::Semester, "semester", FeatureKind::Category, "Semester",
       {"Semester1", "Semester2"}, {}},
      {Feature::RaisedHands, "raisedHands", FeatureKind::Integer, "raisedhands", {}, {}},
      {Feature::VisitedResources, "visitedResources", FeatureKind::Integer, "VisITedResources",
       {}, {"learningMaterials"}},
      {Feature::AnnouncementsView, "announcementsView", FeatureKind::Integer,
       "AnnouncementsView", {}, {}},
      {Feature::Discussion, "discussion", FeatureKind::Integer, "Discussion", {}, {}},
      {Feature::AbsenceDays, "absenceDays", FeatureKind::Category, "StudentAbsenceDays",
       {"Under-7", "Above-7"}, {"StudentAbsenceDays"}},
      {Feature::ScoreLevel, "scoreLevel", FeatureKind::Category, "Class",
       {"Low-Level", "Middle-Level", "High-Level"}, {"Class", "Score", "assessmentScore"}},
      {Feature::Gender, "gender", FeatureKind::Category, "gender", {"M", "F"}, {}},
      {Feature::PlaceOfBirth, "placeOfBirth", FeatureKind::Category, "PlaceofBirth", {}, {}},
  };
  return features;
}

const FeatureInfo& feature_info(Feature f) {
  for (const auto& info : record_features()) {
    if (info.id == f) return info;
  }
  throw Error(ErrorCode::Internal, "unknown feature id");
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Lower-case with whitespace, '-' and '_' removed.
std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '-' || c == '_') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace

std::optional<Feature> find_feature(std::string_view name) {
  for (const auto& info : record_features()) {
    if (iequals(name, info.name) || iequals(name, info.column)) return info.id;
    for (auto alias : info.aliases) {
      if (iequals(name, alias)) return info.id;
    }
  }
  return std::nullopt;
}

FeatureValue feature_value(const CuratedRecord& r, Feature f) {
  switch (f) {
    case Feature::Topic: return r.topic;
    case Feature::Stage: return r.stage;
    case Feature::Semester: return r.semester;
    case Feature::RaisedHands: return r.raised_hands;
    case Feature::VisitedResources: return r.visited_resources;
    case Feature::AnnouncementsView: return r.announcements_view;
    case Feature::Discussion: return r.discussion;
    case Feature::AbsenceDays: return r.absence_days;
    case Feature::ScoreLevel: return r.score_level;
    case Feature::Gender: return r.gender;
    case Feature::PlaceOfBirth: return r.place_of_birth;
  }
  return std::int64_t{0};
}

// --- cleaning ----------------------------------------------------------------

namespace {

enum class CellRule { Counter, Closed, Open };

struct ColumnRule {
  std::string column;
  CellRule rule;
  std::vector<std::string> canonical;           // Closed: source-form values
  std::map<std::string, std::string> synonyms;  // folded spelling -> canonical
};

// Columns the curated record needs. Other columns pass through untouched.
const std::vector<ColumnRule>& column_rules() {
  static const std::vector<ColumnRule> rules = [] {
    std::vector<ColumnRule> r = {
        {"gender", CellRule::Closed, {"M", "F"}, {{"male", "M"}, {"female", "F"}}},
        {"PlaceofBirth", CellRule::Open, {}, {}},
        {"StageID", CellRule::Closed, {"lowerlevel", "MiddleSchool", "HighSchool"}, {}},
        {"Topic", CellRule::Closed,
         {"English", "Spanish", "French", "Arabic", "IT", "Math", "Chemistry", "Biology",
          "Science", "History", "Quran", "Geology"},
         {}},
        {"Semester", CellRule::Closed, {"F", "S"},
         {{"semester1", "F"}, {"first", "F"}, {"semester2", "S"}, {"second", "S"}}},
        {"raisedhands", CellRule::Counter, {}, {}},
        {"VisITedResources", CellRule::Counter, {}, {}},
        {"AnnouncementsView", CellRule::Counter, {}, {}},
        {"Discussion", CellRule::Counter, {}, {}},
        {"StudentAbsenceDays", CellRule::Closed, {"Under-7", "Above-7"}, {}},
        {"Class", CellRule::Closed, {"L", "M", "H"},
         {{"low", "L"}, {"lowlevel", "L"}, {"middle", "M"}, {"middlelevel", "M"},
          {"high", "H"}, {"highlevel", "H"}}},
    };
    for (auto& rule : r) {
      for (const auto& c : rule.canonical) rule.synonyms.emplace(fold(c), c);
    }
    return r;
  }();
  return rules;
}

// Header spellings accepted for each source column, folded.
std::optional<std::string> canonical_column(std::string_view name) {
  static const std::map<std::string, std::string> extra = {
      {"nationality", "NationalITy"},    {"placeofbirth", "PlaceofBirth"},
      {"stage", "StageID"},              {"grade", "GradeID"},
      {"section", "SectionID"},          {"absencedays", "StudentAbsenceDays"},
      {"scorelevel", "Class"},           {"score", "Class"},
  };
  const std::string key = fold(name);
  for (const auto& c : source_columns()) {
    if (fold(c) == key) return c;
  }
  if (auto it = extra.find(key); it != extra.end()) return it->second;
  return std::nullopt;
}

bool parse_counter(std::string_view s, std::int64_t& out) {
  if (s.empty() || !std::all_of(s.begin(), s.end(),
                                [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::size_t> required_positions(const std::vector<std::string>& header) {
  std::vector<std::size_t> pos;
  for (const auto& rule : column_rules()) {
    auto it = std::find(header.begin(), header.end(), rule.column);
    if (it == header.end()) {
      throw Error(ErrorCode::SchemaMismatch, "required column '" + rule.column + "' is missing");
    }
    pos.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  return pos;
}

}  // namespace

CleanResult clean(const RawTable& table) {
  CleanResult result;
  CurationReport& report = result.report;
  RawTable& out = result.table;

  for (const auto& name : table.header) {
    auto canonical = canonical_column(name);
    if (canonical && *canonical != name) {
      report.issues.push_back({0, name, "non-canonical column name", "renamed to " + *canonical});
      ++report.columns_renamed;
      out.header.push_back(*canonical);
    } else {
      out.header.push_back(name);
    }
  }
  const auto positions = required_positions(out.header);
  const auto& rules = column_rules();

  report.rows_in = table.rows.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> row = table.rows[r];
    std::vector<CurationIssue> row_issues;
    std::size_t corrections = 0;
    bool drop = false;
    for (std::size_t k = 0; k < rules.size() && !drop; ++k) {
      const ColumnRule& rule = rules[k];
      std::string& cell = row[positions[k]];
      const std::string original = cell;
      switch (rule.rule) {
        case CellRule::Counter: {
          std::int64_t value = 0;
          const std::string t = trim(cell);
          if (!parse_counter(t, value)) {
            row_issues.push_back({r + 1, rule.column, "unparseable counter '" + original + "'", "dropped"});
            drop = true;
          } else if (t != cell) {
            cell = t;
          }
          break;
        }
        case CellRule::Closed: {
          if (std::find(rule.canonical.begin(), rule.canonical.end(), cell) != rule.canonical.end()) break;
          auto it = rule.synonyms.find(fold(cell));
          if (it == rule.synonyms.end()) {
            row_issues.push_back(
                {r + 1, rule.column, "out-of-vocabulary value '" + original + "'", "dropped"});
            drop = true;
          } else {
            cell = it->second;
          }
          break;
        }
        case CellRule::Open: {
          cell = trim(cell);
          if (cell.empty()) {
            row_issues.push_back({r + 1, rule.column, "empty value", "dropped"});
            drop = true;
          }
          break;
        }
      }
      if (!drop && cell != original) {
        row_issues.push_back({r + 1, rule.column, "'" + original + "'", "corrected to '" + cell + "'"});
        ++corrections;
      }
    }
    if (drop) {
      // Only the reason for dropping is reported for a dropped row.
      report.issues.push_back(row_issues.back());
      ++report.rows_dropped;
      continue;
    }
    report.cells_corrected += corrections;
    for (auto& issue : row_issues) report.issues.push_back(std::move(issue));
    out.rows.push_back(std::move(row));
  }
  report.rows_kept = out.rows.size();
  return result;
}

std::vector<CuratedRecord> select_features(const RawTable& cleaned) {
  const auto positions = required_positions(cleaned.header);
  auto col = [&](const std::vector<std::string>& row, const char* name) -> const std::string& {
    const auto& rules = column_rules();
    for (std::size_t k = 0; k < rules.size(); ++k) {
      if (rules[k].column == name) return row[positions[k]];
    }
    throw Error(ErrorCode::Internal, std::string("no rule for column ") + name);
  };
  auto counter = [&](const std::vector<std::string>& row, const char* name, std::size_t r) {
    std::int64_t v = 0;
    if (!parse_counter(col(row, name), v)) {
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r + 1) + ": column " + name +
                                                 " is not a cleaned counter");
    }
    return v;
  };
  auto mapped = [&](const std::string& value, const std::map<std::string, std::string>& m,
                    const char* name, std::size_t r) {
    auto it = m.find(value);
    if (it == m.end()) {
      throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r + 1) + ": column " + name +
                                                 " holds uncleaned value '" + value + "'");
    }
    return it->second;
  };
  static const std::map<std::string, std::string> semesters = {{"F", "Semester1"}, {"S", "Semester2"}};
  static const std::map<std::string, std::string> levels = {
      {"L", "Low-Level"}, {"M", "Middle-Level"}, {"H", "High-Level"}};

  std::vector<CuratedRecord> records;
  records.reserve(cleaned.rows.size());
  for (std::size_t r = 0; r < cleaned.rows.size(); ++r) {
    const auto& row = cleaned.rows[r];
    CuratedRecord rec;
    rec.student_index = static_cast<std::int64_t>(r + 1);
    rec.topic = col(row, "Topic");
    rec.stage = col(row, "StageID");
    rec.semester = mapped(col(row, "Semester"), semesters, "Semester", r);
    rec.raised_hands = counter(row, "raisedhands", r);
    rec.visited_resources = counter(row, "VisITedResources", r);
    rec.announcements_view = counter(row, "AnnouncementsView", r);
    rec.discussion = counter(row, "Discussion", r);
    rec.absence_days = col(row, "StudentAbsenceDays");
    rec.score_level = mapped(col(row, "Class"), levels, "Class", r);
    rec.gender = col(row, "gender");
    rec.place_of_birth = col(row, "PlaceofBirth");
    records.push_back(std::move(rec));
  }
  return records;
}

// --- synthetic data ----------------------------------------------------------

RawTable gen_synthetic(std::uint64_t seed, std::size_t n) {
  // Modulo draws on the raw engine output keep the table identical across
  // standard library implementations.
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
    return v[rng() % v.size()];
  };
  static const std::vector<std::string> countries = {
      "KuwaIT", "lebanon", "Egypt", "SaudiArabia", "USA", "Jordan", "venzuela", "Iran",
      "Tunis",  "Morocco", "Syria", "Iraq",        "Palestine", "Lybia"};
  static const std::vector<std::string> grades = {"G-02", "G-04", "G-05", "G-06", "G-07",
                                                  "G-08", "G-09", "G-10", "G-11", "G-12"};
  static const std::vector<std::string> genders = {"M", "F"};
  static const std::vector<std::string> stages = {"lowerlevel", "MiddleSchool", "HighSchool"};
  static const std::vector<std::string> sections = {"A", "B", "C"};
  static const std::vector<std::string> topics = {"English", "Spanish", "French",  "Arabic",
                                                  "IT",      "Math",    "Chemistry", "Biology",
                                                  "Science", "History", "Quran",   "Geology"};
  static const std::vector<std::string> semesters = {"F", "S"};
  static const std::vector<std::string> relations = {"Father", "Mum"};
  static const std::vector<std::string> yes_no = {"Yes", "No"};
  static const std::vector<std::string> satisfaction = {"Good", "Bad"};
  static const std::vector<std::string> absence = {"Under-7", "Above-7"};
  static const std::vector<std::string> classes = {"L", "M", "H"};

  RawTable table;
  table.header = source_columns();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& country = pick(countries);
    auto counter = [&] { return std::to_string(rng() % 101); };
    std::vector<std::string> row;
    row.push_back(pick(genders));
    row.push_back(country);
    row.push_back(rng() % 4 == 0 ? pick(countries) : country);
    row.push_back(pick(stages));
    row.push_back(pick(grades));
    row.push_back(pick(sections));
    row.push_back(pick(topics));
    row.push_back(pick(semesters));
    row.push_back(pick(relations));
    row.push_back(counter());
    row.push_back(counter());
    row.push_back(counter());
    row.push_back(counter());
    row.push_back(pick(yes_no));
    row.push_back(pick(satisfaction));
    row.push_back(pick(absence));
    row.push_back(pick(classes));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// --- output ------------------------------------------------------------------

std::string write_records_csv(const std::vector<CuratedRecord>& records) {
  RawTable t;
  t.header.push_back("studentIndex");
  for (const auto& f : record_features()) t.header.emplace_back(f.name);
  for (const auto& r : records) {
    std::vector<std::string> row = {std::to_string(r.student_index)};
    for (const auto& f : record_features()) {
      const FeatureValue v = feature_value(r, f.id);
      row.push_back(std::holds_alternative<std::int64_t>(v)
                        ? std::to_string(std::get<std::int64_t>(v))
                        : std::get<std::string>(v));
    }
    t.rows.push_back(std::move(row));
  }
  return write_csv(t);
}

std::string report_to_json(const CurationReport& report) {
  nlohmann::ordered_json j;
  j["rowsIn"] = report.rows_in;
  j["rowsKept"] = report.rows_kept;
  j["rowsDropped"] = report.rows_dropped;
  j["cellsCorrected"] = report.cells_corrected;
  j["columnsRenamed"] = report.columns_renamed;
  j["issues"] = nlohmann::ordered_json::array();
  for (const auto& issue : report.issues) {
    nlohmann::ordered_json e;
    e["row"] = issue.row;
    e["column"] = issue.column;
    e["problem"] = issue.problem;
    e["action"] = issue.action;
    j["issues"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace ekg::edu
