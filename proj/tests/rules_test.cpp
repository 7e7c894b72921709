#include <gtest/gtest.h>

#include <json.hpp>
#include <numeric>
#include <random>

#include "ekg/edu/rules.hpp"
#include "ekg/error.hpp"
#include "ekg/sparql/eval.hpp"
#include "rule_oracles.hpp"
#include "test_support.hpp"

using namespace ekg;
using namespace ekg::edu;
using namespace ekg::testing;

namespace {

const Taxonomy& taxonomy() {
  static const Taxonomy t = load_taxonomy_file(EKG_DATA_DIR "/taxonomy/creativity.taxonomy");
  return t;
}

std::vector<CuratedRecord> synthetic(std::uint64_t seed, std::size_t n) {
  return select_features(clean(gen_synthetic(seed, n)).table);
}

CuratedRecord student1() {
  return select_features(clean(load_csv(EKG_FIXTURE_DIR "/first_row.csv")).table).at(0);
}

ErrorCode parse_code(std::string_view text) {
  try {
    parse_rule(text, taxonomy());
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

const char* kStrongMemory =
    "RULE strongMemory: IF Student.scoreLevel.is(High-Level) AND Student.visitedResources.lt(20) "
    "THEN TAG[Student, Creativity.Cognitive.strongMemory(True)]";

std::string with_condition(const std::string& cond) {
  return "RULE t: IF " + cond + " THEN TAG[Student, Creativity.Cognitive.strongMemory(True)]";
}

}  // namespace

TEST(Parse, StrongMemoryRule) {
  Rule r = parse_rule(kStrongMemory, taxonomy());
  EXPECT_EQ(r.name, "strongMemory");
  EXPECT_EQ(r.concept_path, "Creativity.Cognitive.strongMemory");
  EXPECT_TRUE(r.value);
  ASSERT_EQ(r.condition.kind, RuleExpr::Kind::And);
  const RuleAtom& a = r.condition.children[0].atom;
  EXPECT_EQ(a.dataset, "Student");
  EXPECT_EQ(a.feature, Feature::ScoreLevel);
  EXPECT_EQ(a.test, RuleAtom::Test::Is);
  EXPECT_EQ(a.category, "High-Level");
  const RuleAtom& b = r.condition.children[1].atom;
  EXPECT_EQ(b.feature, Feature::VisitedResources);
  EXPECT_EQ(b.test, RuleAtom::Test::Lt);
  EXPECT_EQ(b.low, 20);
}

TEST(Parse, AliasesAndKeywordCase) {
  Rule a = parse_rule(kStrongMemory, taxonomy());
  Rule b = parse_rule(
      "rule strongMemory: if Student.Score.is(High-Level) and Student.VisITedResources.lt(20) "
      "then tag[Student, Creativity.GeneralCognitiveThinkingSkills.remembering(true)]",
      taxonomy());
  EXPECT_EQ(a, b);
}

TEST(Parse, VacuousConditionAccepted) {
  Rule r = parse_rule(with_condition("Student.Discussion.ge(0)"), taxonomy());
  EXPECT_EQ(r.condition.atom.feature, Feature::Discussion);
}

TEST(Parse, Precedence) {
  auto cond = [](const std::string& c) { return parse_rule(with_condition(c), taxonomy()).condition; };
  const std::string a = "Student.raisedHands.ge(1)", b = "Student.discussion.ge(2)",
                    c = "Student.gender.is(F)";
  auto A = cond(a), B = cond(b), C = cond(c);
  EXPECT_EQ(cond(a + " OR " + b + " AND NOT " + c),
            RuleExpr::disjunction(A, RuleExpr::conjunction(B, RuleExpr::negation(C))));
  EXPECT_EQ(cond(a + " NOT " + b), cond(a + " AND NOT " + b));
  EXPECT_EQ(cond("(" + a + " OR " + b + ") AND " + c),
            RuleExpr::conjunction(RuleExpr::disjunction(A, B), C));
  EXPECT_EQ(cond("NOT NOT " + a), RuleExpr::negation(RuleExpr::negation(A)));
  EXPECT_EQ(cond(a + " AND " + b + " AND " + c), RuleExpr::conjunction(RuleExpr::conjunction(A, B), C));
}

TEST(Parse, QuotedAndOpenCategories) {
  auto r = parse_rule(with_condition("Student.placeOfBirth.is(\"Saudi Arabia\")"), taxonomy());
  EXPECT_EQ(r.condition.atom.category, "Saudi Arabia");
  auto b = parse_rule(with_condition("Student.visitedResources.between(-3, 40)"), taxonomy());
  EXPECT_EQ(b.condition.atom.low, -3);
  EXPECT_EQ(b.condition.atom.high, 40);
}

TEST(Parse, Errors) {
  EXPECT_EQ(parse_code(with_condition("Student.shoeSize.ge(3)")), ErrorCode::UnknownFeature);
  EXPECT_EQ(parse_code("RULE t: IF Student.gender.is(F) THEN TAG[Student, Creativity.Nope(True)]"),
            ErrorCode::UnknownConcept);
  EXPECT_EQ(parse_code(with_condition("Student.raisedHands.is(High)")), ErrorCode::Parse);
  EXPECT_EQ(parse_code(with_condition("Student.scoreLevel.lt(3)")), ErrorCode::Parse);
  EXPECT_EQ(parse_code(with_condition("Student.scoreLevel.is(Top)")), ErrorCode::Parse);
  EXPECT_EQ(parse_code(with_condition("Student.raisedHands.ge(x)")), ErrorCode::Parse);
  EXPECT_EQ(parse_code(with_condition("Student.raisedHands.near(3)")), ErrorCode::Parse);
  EXPECT_EQ(parse_code(with_condition("(Student.raisedHands.ge(3)")), ErrorCode::Parse);
  EXPECT_EQ(parse_code(with_condition("")), ErrorCode::Parse);
  EXPECT_EQ(parse_code("RULE t: IF Student.gender.is(F) TAG[Student, Creativity(True)]"), ErrorCode::Parse);
  EXPECT_EQ(parse_code("RULE t: IF Student.gender.is(F) THEN TAG[Student, Creativity(maybe)]"),
            ErrorCode::Parse);
  EXPECT_EQ(parse_code(std::string(kStrongMemory) + " extra"), ErrorCode::Parse);
}

TEST(Parse, ErrorMessagesCarryPositionAndExpectation) {
  try {
    parse_rule("RULE t: IF Student.gender.is(F)\n  THEN TAG(Student)", taxonomy());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 2u);
    EXPECT_NE(std::string(e.what()).find("expected '['"), std::string::npos) << e.what();
  }
}

TEST(Parse, RuleFiles) {
  auto rules = load_rules(EKG_DATA_DIR "/rules/default.rules", taxonomy());
  ASSERT_EQ(rules.size(), 3u);
  EXPECT_EQ(rules[0].name, "strongMemory");
  EXPECT_EQ(rules[1].concept_path, "Creativity.Cognitive.usingWideCategories");
  EXPECT_FALSE(rules[2].value);
  EXPECT_TRUE(parse_rules("# no rules\n", taxonomy()).empty());
  EXPECT_THROW(parse_rules(std::string(kStrongMemory) + "\n" + kStrongMemory, taxonomy()), Error);
}

TEST(Print, RoundTripsGeneratedRules) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    Rule r = random_rule(rng, i);
    const std::string text = print_rule(r);
    EXPECT_EQ(parse_rule(text, taxonomy()), r) << text;
  }
}

TEST(Eval, Student1IsNotStrongMemory) {
  EXPECT_FALSE(eval_rule(parse_rule(kStrongMemory, taxonomy()), student1()));
}

TEST(Eval, NegationIsComplement) {
  std::mt19937_64 rng(2);
  auto records = synthetic(4, 300);
  for (int i = 0; i < 50; ++i) {
    RuleExpr atom = RuleExpr::leaf(random_atom(rng));
    for (const auto& r : records) {
      EXPECT_NE(eval_expr(atom, r), eval_expr(RuleExpr::negation(atom), r));
    }
  }
}

TEST(Eval, DeMorganRewritesPreserveVerdicts) {
  std::mt19937_64 rng(3);
  auto records = synthetic(5, 200);
  for (int i = 0; i < 200; ++i) {
    RuleExpr e = random_expr(rng, 4);
    RuleExpr nnf = negation_normal_form(e);
    RuleExpr negated_nnf = negation_normal_form(RuleExpr::negation(e));
    for (const auto& r : records) {
      ASSERT_EQ(eval_expr(e, r), eval_expr(nnf, r)) << print_expr(e);
      ASSERT_EQ(!eval_expr(e, r), eval_expr(negated_nnf, r)) << print_expr(e);
    }
  }
}

TEST(Eval, AtomsAgainstHandComputedValues) {
  CuratedRecord r = student1();  // raisedHands 15, IT, Middle-Level
  auto atom = [](Feature f, RuleAtom::Test t, std::int64_t lo, std::int64_t hi = 0) {
    RuleAtom a;
    a.dataset = "Student";
    a.feature = f;
    a.test = t;
    a.low = lo;
    a.high = hi;
    return a;
  };
  using T = RuleAtom::Test;
  EXPECT_TRUE(eval_atom(atom(Feature::RaisedHands, T::Eq, 15), r));
  EXPECT_TRUE(eval_atom(atom(Feature::RaisedHands, T::Lt, 16), r));
  EXPECT_FALSE(eval_atom(atom(Feature::RaisedHands, T::Lt, 15), r));
  EXPECT_TRUE(eval_atom(atom(Feature::RaisedHands, T::Le, 15), r));
  EXPECT_FALSE(eval_atom(atom(Feature::RaisedHands, T::Gt, 15), r));
  EXPECT_TRUE(eval_atom(atom(Feature::RaisedHands, T::Ge, 15), r));
  EXPECT_TRUE(eval_atom(atom(Feature::RaisedHands, T::Between, 15, 15), r));
  EXPECT_FALSE(eval_atom(atom(Feature::RaisedHands, T::Between, 16, 14), r));
  RuleAtom topic;
  topic.feature = Feature::Topic;
  topic.category = "IT";
  EXPECT_TRUE(eval_atom(topic, r));
  topic.category = "it";
  EXPECT_FALSE(eval_atom(topic, r));
}

TEST(Compile, StrongMemoryQueryShape) {
  Rule r = load_rules(EKG_DATA_DIR "/rules/default.rules", taxonomy()).at(0);
  auto q = compile_rule(r, default_schema());
  const auto& form = std::get<sparql::SelectForm>(q.form);
  ASSERT_EQ(form.projection.size(), 1u);
  EXPECT_EQ(form.projection[0].name, "student");
  std::vector<std::string> predicates;
  for (const auto& p : q.where.patterns) {
    EXPECT_EQ(std::get<sparql::Variable>(p.subject).name, "student");
    predicates.push_back(std::get<rdf::Term>(p.predicate).text());
  }
  EXPECT_EQ(predicates, (std::vector<std::string>{kNs + std::string("EnrolledIn"), kNs + std::string("Stage"),
                                                  kNs + std::string("Score"), kNs + std::string("VisITedResources")}));
  EXPECT_EQ(std::get<rdf::Term>(q.where.patterns[0].object), ns("Math"));
  EXPECT_EQ(std::get<rdf::Term>(q.where.patterns[2].object), ns("High-Level"));
  ASSERT_EQ(q.filters.size(), 1u);
  EXPECT_EQ(q.filters[0], sparql::FilterExpr::compare(sparql::Variable{"visitedResources"}, sparql::CompareOp::Lt,
                                                      rdf::Term::integer(20)));
  // The compiled query is ordinary query text.
  EXPECT_EQ(sparql::parse_query(sparql::print_query(q)), q);
}

TEST(Compile, AlwaysTrueRuleHasNoFilterAndSelectsEveryone) {
  auto records = synthetic(6, 120);
  auto g = build_graph(records, default_schema());
  for (auto cond : {"Student.Discussion.ge(0)", "Student.raisedHands.gt(-1) OR Student.gender.is(F)",
                    "NOT Student.discussion.lt(0)", "Student.discussion.between(0, 9223372036854775807)"}) {
    Rule r = parse_rule(with_condition(cond), taxonomy());
    auto q = compile_rule(r, full_schema());
    EXPECT_TRUE(q.filters.empty()) << cond;
  }
  Rule r = parse_rule(with_condition("Student.Discussion.ge(0)"), taxonomy());
  auto ids = select_students(g, r, default_schema());
  EXPECT_EQ(ids.size(), 120u);
}

TEST(Compile, AlwaysFalseRuleSelectsNobody) {
  auto g = build_graph(synthetic(6, 50), default_schema());
  Rule r = parse_rule(with_condition("Student.discussion.lt(0)"), taxonomy());
  auto q = compile_rule(r, default_schema());
  ASSERT_EQ(q.filters.size(), 1u);
  EXPECT_TRUE(select_students(g, r, default_schema()).empty());
}

TEST(Compile, UnmappedFeatureIsUncompilable) {
  Rule r = parse_rule(with_condition("NOT (Student.gender.is(F) OR Student.raisedHands.ge(3))"), taxonomy());
  try {
    compile_rule(r, default_schema());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UncompilableExpr);
  }
  EXPECT_NO_THROW(compile_rule(r, full_schema()));
}

TEST(DualPath, GeneratedRulesAgreeWithRecordFilter) {
  std::mt19937_64 rng(2024);
  const auto schema = full_schema();
  auto records = synthetic(7, 480);
  auto g = build_graph(records, schema);
  std::size_t nonempty = 0;
  for (int i = 0; i < 200; ++i) {
    Rule r = random_rule(rng, i);
    auto via_graph = select_students(g, r, schema);
    auto via_records = filter_students(records, r);
    ASSERT_EQ(via_graph, via_records) << print_rule(r);
    nonempty += !via_records.empty() && via_records.size() < records.size();
  }
  // The generator should produce selective rules, not only trivial ones.
  EXPECT_GT(nonempty, 60u);
}

TEST(DualPath, BundledRulesMatchHandWrittenFilters) {
  auto records = synthetic(7, 480);
  // Make sure each pattern has members in the synthetic set.
  for (std::size_t i = 0; i < 6; ++i) {
    auto& r = records[i * 40];
    r.topic = "Math";
    r.stage = "MiddleSchool";
    if (i % 3 == 0) r.score_level = "High-Level", r.visited_resources = 5;
    if (i % 3 == 1) r.raised_hands = 90, r.discussion = 75;
    if (i % 3 == 2) r.absence_days = "Above-7", r.announcements_view = 3;
  }
  const auto schema = default_schema();
  auto g = build_graph(records, schema);
  auto rules = load_rules(EKG_DATA_DIR "/rules/default.rules", taxonomy());
  EXPECT_EQ(select_students(g, rules[0], schema), oracle_ids(records, oracle_strong_memory));
  EXPECT_EQ(select_students(g, rules[1], schema), oracle_ids(records, oracle_brainstorming));
  EXPECT_EQ(select_students(g, rules[2], schema), oracle_ids(records, oracle_not_motivated));
  for (const auto& rule : rules) EXPECT_FALSE(filter_students(records, rule).empty()) << rule.name;
}

TEST(Apply, NoRulesLeavesGraphUnchanged) {
  auto records = synthetic(8, 60);
  auto g = build_graph(records, default_schema());
  auto result = apply_rules(g, records, {}, default_schema());
  EXPECT_TRUE(result.tags.empty());
  EXPECT_EQ(result.graph, g);
  EXPECT_TRUE(result.graph.frozen());
}

TEST(Apply, TagsTriplesAndIdempotence) {
  auto records = synthetic(9, 480);
  records[0].topic = "Math";
  records[0].stage = "MiddleSchool";
  records[0].absence_days = "Above-7";
  records[0].announcements_view = 1;
  const auto schema = default_schema();
  auto g = build_graph(records, schema);
  auto rules = load_rules(EKG_DATA_DIR "/rules/default.rules", taxonomy());
  auto first = apply_rules(g, records, rules, schema);
  std::size_t expected_tags = 0;
  for (const auto& rule : rules) expected_tags += filter_students(records, rule).size();
  EXPECT_EQ(first.tags.size(), expected_tags);
  EXPECT_EQ(first.graph.size(), g.size() + first.tags.size());
  EXPECT_TRUE(std::is_sorted(first.tags.begin(), first.tags.end()));
  EXPECT_TRUE(first.graph.contains({ns("Student1"), ns("lacksPattern"),
                                    ns("Creativity.Affective.Motivation.intrinsicMotivation")}));
  for (const auto& tag : first.tags) EXPECT_NO_THROW(taxonomy().resolve(tag.concept_path));

  auto again = apply_rules(first.graph, records, rules, schema);
  EXPECT_EQ(again.graph, first.graph);
  EXPECT_EQ(again.tags, first.tags);
  EXPECT_EQ(apply_rules(g, records, rules, schema).graph, first.graph);
}

TEST(Apply, OppositeTagsConflict) {
  auto records = synthetic(10, 30);
  auto g = build_graph(records, default_schema());
  auto rules = parse_rules(
      "RULE a: IF Student.discussion.ge(0) THEN TAG[Student, Creativity.Domain.talent(True)]\n"
      "RULE b: IF Student.discussion.ge(0) THEN TAG[Student, Creativity.Domain.talent(False)]\n",
      taxonomy());
  try {
    apply_rules(g, records, rules, default_schema());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

TEST(Apply, GraphRecordDisagreementIsDetected) {
  auto records = synthetic(11, 30);
  auto g = build_graph(records, default_schema());
  records[3].discussion = 1000;  // the graph no longer describes these records
  auto rules = parse_rules("RULE a: IF Student.discussion.gt(500) THEN TAG[Student, Creativity.Domain.talent(True)]",
                           taxonomy());
  try {
    apply_rules(g, records, rules, default_schema());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Internal);
  }
}

TEST(Report, EmptyTags) { EXPECT_TRUE(report({}, taxonomy()).empty()); }

TEST(Report, CountsAndOrdering) {
  std::vector<Tag> tags = {{7, "Creativity.Cognitive.strongMemory", true},
                           {2, "Creativity.Cognitive.strongMemory", true},
                           {9, "Creativity.Cognitive.strongMemory", true},
                           {4, "Creativity.Cognitive.strongMemory", true},
                           {3, "Creativity.Affective.Motivation.intrinsicMotivation", false},
                           {5, "Creativity.Cognitive.usingWideCategories", true}};
  auto rows = report(tags, taxonomy());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (ReportRow{"Creativity.Cognitive.strongMemory", true, 4, {2, 4, 7, 9}}));
  EXPECT_EQ(rows[1].concept_path, "Creativity.Cognitive.usingWideCategories");
  EXPECT_EQ(rows[2].concept_path, "Creativity.Affective.Motivation.intrinsicMotivation");
  EXPECT_FALSE(rows[2].value);
  const auto total = std::accumulate(rows.begin(), rows.end(), std::size_t{0},
                                     [](std::size_t n, const ReportRow& r) { return n + r.count; });
  EXPECT_EQ(total, tags.size());

  const std::string text = format_report(rows);
  EXPECT_NE(text.find("Creativity.Cognitive.strongMemory"), std::string::npos);
  EXPECT_NE(text.find("2 4 7 9"), std::string::npos);
  EXPECT_NE(text.find("3 patterns"), std::string::npos);
  auto j = nlohmann::json::parse(report_rows_to_json(rows));
  EXPECT_EQ(j[0]["count"], 4);
  EXPECT_EQ(j[2]["value"], false);

  EXPECT_THROW(report({{1, "Creativity.Missing", true}}, taxonomy()), Error);
}

TEST(Report, SumMatchesTagsOnMinedData) {
  auto records = synthetic(12, 480);
  auto g = build_graph(records, full_schema());
  std::mt19937_64 rng(12);
  std::vector<Rule> rules;
  for (int i = 0; i < 20; ++i) {
    Rule r = random_rule(rng, i);
    r.value = true;
    rules.push_back(r);
  }
  auto mined = apply_rules(g, records, rules, full_schema());
  auto rows = report(mined.tags, taxonomy());
  std::size_t total = 0;
  for (const auto& r : rows) total += r.count;
  EXPECT_EQ(total, mined.tags.size());
}
