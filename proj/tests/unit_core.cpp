#include <gtest/gtest.h>

#include "webvet/config.hpp"
#include "webvet/csv.hpp"
#include "webvet/dataset.hpp"
#include "webvet/dates.hpp"
#include "webvet/decimal.hpp"
#include "webvet/finalization.hpp"
#include "webvet/formula.hpp"
#include "webvet/html_markdown.hpp"
#include "webvet/rules.hpp"
#include "webvet/schema.hpp"
#include "webvet/structured.hpp"
#include "webvet/text.hpp"
#include "webvet/url.hpp"

using namespace webvet;

namespace {

Decimal dec(const char* s) { return *Decimal::parse(s); }

SchemaSpec event_schema() { return generate_schema("event_type, country, location, date:date, affected:int", {}, "events"); }

DataPoint point(std::map<std::string, std::string> values, std::string id = "r1") {
  DataPoint d;
  d.row_id = std::move(id);
  d.values = std::move(values);
  d.source_url = "http://example.test/a";
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(Text, TrimLowerUpper) {
  EXPECT_EQ(text::trim("  a b \t\n"), "a b");
  EXPECT_EQ(text::trim(""), "");
  EXPECT_EQ(text::lower("AbC"), "abc");
  EXPECT_EQ(text::upper("AbC"), "ABC");
}

TEST(Text, RenderSubstitutesKnownVariables) {
  EXPECT_EQ(text::render("{{a}} and {{b}}", {{"a", "x"}, {"b", "y"}}), "x and y");
}

TEST(Text, TruncateKeepsHead) {
  bool truncated = false;
  std::string s(100, 'a');
  auto out = text::truncate_head_biased(s, 40, &truncated);
  EXPECT_TRUE(truncated);
  EXPECT_EQ(out.size(), 40u);
  EXPECT_NE(out.find("truncated"), std::string::npos);
  EXPECT_EQ(out.substr(0, 5), std::string(5, 'a'));
  text::truncate_head_biased("short", 40, &truncated);
  EXPECT_FALSE(truncated);
}

TEST(Text, DigestIsStable) {
  EXPECT_EQ(text::digest("abc"), text::digest("abc"));
  EXPECT_NE(text::digest("abc"), text::digest("abd"));
  EXPECT_EQ(text::digest("").size(), 16u);
}

// ---------------------------------------------------------------------------

TEST(Url, ParsesAndNormalizes) {
  auto u = parse_url("HTTP://Example.TEST:8080/a/b?q=1#frag");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->scheme, "http");
  EXPECT_EQ(u->host, "example.test");
  EXPECT_EQ(u->port, 8080);
  EXPECT_EQ(u->origin(), "http://example.test:8080");
  auto bare = parse_url("https://example.test");
  ASSERT_TRUE(bare);
  EXPECT_EQ(bare->target, "/");
  EXPECT_EQ(bare->port, 443);
}

TEST(Url, RejectsNonHttp) {
  EXPECT_FALSE(parse_url("ftp://x.test/"));
  EXPECT_FALSE(parse_url("example.test/a"));
  EXPECT_FALSE(parse_url("http://user@x.test/"));
}

TEST(Url, ResolvesRelativeReferences) {
  auto base = *parse_url("http://a.test/dir/page.html");
  EXPECT_EQ(resolve_url(base, "other.html")->str(), "http://a.test/dir/other.html");
  EXPECT_EQ(resolve_url(base, "/root")->str(), "http://a.test/root");
  EXPECT_EQ(resolve_url(base, "https://b.test/x")->str(), "https://b.test/x");
}

TEST(Url, RegistrableDomain) {
  EXPECT_EQ(registrable_domain("www.news.example.com"), "example.com");
  EXPECT_EQ(registrable_domain("reliefnews.test"), "reliefnews.test");
  EXPECT_EQ(registrable_domain("bbc.co.uk"), "bbc.co.uk");
  EXPECT_EQ(registrable_domain("www.bbc.co.uk"), "bbc.co.uk");
}

// ---------------------------------------------------------------------------

TEST(Csv, QuotedFieldsAndEmbeddedNewlines) {
  auto t = csv::parse("a,b\n\"x, y\",\"line1\nline2\"\n\"he said \"\"hi\"\"\",z\n");
  ASSERT_EQ(t.header, (csv::Row{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x, y");
  EXPECT_EQ(t.rows[0][1], "line1\nline2");
  EXPECT_EQ(t.rows[1][0], "he said \"hi\"");
}

TEST(Csv, RoundTrip) {
  csv::Table t{{"a", "b"}, {{"1", "x,y"}, {"", "\"q\""}, {"é", "a\nb"}}};
  auto back = csv::parse(csv::format(t));
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(Csv, CrlfInput) {
  auto t = csv::parse("a,b\r\n1,2\r\n");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], (csv::Row{"1", "2"}));
}

// ---------------------------------------------------------------------------

TEST(Decimal, ParseAndFormat) {
  EXPECT_EQ(dec("0.1") + dec("0.2"), dec("0.3"));
  EXPECT_EQ(dec("1e3"), Decimal(1000));
  EXPECT_EQ(dec("-2.50").to_plain(), "-2.5");
  EXPECT_FALSE(Decimal::parse("abc"));
  EXPECT_FALSE(Decimal::parse(""));
  EXPECT_FALSE(Decimal::parse("1.2.3"));
}

TEST(Decimal, RoundsHalfAwayFromZero) {
  EXPECT_EQ(dec("2.25").to_fixed(1), "2.3");
  EXPECT_EQ(dec("-2.25").to_fixed(1), "-2.3");
  EXPECT_EQ(dec("2.24").to_fixed(1), "2.2");
  EXPECT_EQ(dec("0.5").rounded(0), Decimal(1));
  EXPECT_EQ((Decimal(1) / Decimal(3)).to_fixed(4), "0.3333");
}

TEST(Decimal, Ordering) {
  EXPECT_LT(dec("0.1"), dec("0.10001"));
  EXPECT_GT(Decimal(0), dec("-0.0001"));
}

// ---------------------------------------------------------------------------

TEST(Dates, CanonicalSpellings) {
  EXPECT_EQ(normalize_date("2023").canonical, "2023");
  EXPECT_EQ(normalize_date("2023").precision, DatePrecision::kYear);
  EXPECT_EQ(normalize_date("June 2023").canonical, "2023-06");
  EXPECT_EQ(normalize_date("Sept 2023").canonical, "2023-09");
  EXPECT_EQ(normalize_date("June 3, 2023").canonical, "2023-06-03");
  EXPECT_EQ(normalize_date("3 Jun 2023").canonical, "2023-06-03");
  EXPECT_EQ(normalize_date("06/13/2023").canonical, "2023-06-13");
  EXPECT_EQ(normalize_date("06/06/2023").canonical, "2023-06-06");
}

TEST(Dates, RejectsInvalid) {
  EXPECT_THROW(normalize_date("2023-02-30"), UnparseableDate);
  EXPECT_THROW(normalize_date("03/04/2023"), UnparseableDate);  // ambiguous
  EXPECT_THROW(normalize_date("next week"), UnparseableDate);
  EXPECT_THROW(normalize_date("2023-13"), UnparseableDate);
  EXPECT_THROW(normalize_date("2023-6"), UnparseableDate);
  EXPECT_TRUE(detail::try_normalize_date("2024-02-29"));
  EXPECT_FALSE(detail::try_normalize_date("2023-02-29"));
}

TEST(Dates, Truncation) {
  auto d = normalize_date("2023-06-03");
  EXPECT_EQ(truncate_date(d, DatePrecision::kMonth), "2023-06");
  EXPECT_EQ(truncate_date(d, DatePrecision::kYear), "2023");
  EXPECT_EQ(truncate_date(d, DatePrecision::kDay), "2023-06-03");
}

// ---------------------------------------------------------------------------

TEST(Schema, AnnotationDefaultsToText) {
  auto s = generate_schema("name, date, deaths:int, share:float", {}, "d");
  ASSERT_EQ(s.fields.size(), 4u);
  EXPECT_EQ(s.fields[0].type, FieldType::kText);
  EXPECT_EQ(s.fields[2].type, FieldType::kInteger);
  EXPECT_EQ(s.fields[3].type, FieldType::kFloat);
}

TEST(Schema, RejectsBadAnnotations) {
  EXPECT_THROW(generate_schema("a, a", {}, ""), SchemaError);
  EXPECT_THROW(generate_schema("a:bogus", {}, ""), SchemaError);
  EXPECT_THROW(generate_schema("", {}, ""), SchemaError);
  EXPECT_THROW(generate_schema("bad name", {}, ""), SchemaError);
}

TEST(Schema, JsonRoundTrip) {
  auto s = event_schema();
  EXPECT_EQ(schema_from_json(json::parse(to_json(s).dump())), s);
}

TEST(Schema, IntegerParsing) {
  EXPECT_EQ(parse_integer("37,000"), "37000");
  EXPECT_EQ(parse_integer("-0"), "0");
  EXPECT_EQ(parse_integer("007"), "7");
  EXPECT_EQ(parse_integer("+12"), "12");
  EXPECT_FALSE(parse_integer("1,00"));
  EXPECT_FALSE(parse_integer("12%"));
  EXPECT_FALSE(parse_integer("1.5"));
  EXPECT_FALSE(parse_integer("1234567890123456789"));
}

TEST(Schema, FloatParsing) {
  EXPECT_EQ(parse_float("1,234.50"), "1234.5");
  EXPECT_EQ(parse_float("-0.000"), "0");
  EXPECT_FALSE(parse_float("x1"));
}

TEST(Schema, CoerceRecord) {
  auto s = event_schema();
  auto r = coerce_record(point({{"event_type", " Flood "}, {"country", "Haiti"}, {"location", "Léogâne"},
                                {"date", "June 3, 2023"}, {"affected", "15,000"}}),
                         s);
  EXPECT_EQ(r.value("event_type"), "Flood");
  EXPECT_EQ(r.value("date"), "2023-06-03");
  EXPECT_EQ(r.value("affected"), "15000");
  auto missing = point({{"event_type", "Flood"}, {"country", ""}, {"location", "x"}, {"date", "2023"}, {"affected", "1"}});
  EXPECT_THROW(coerce_record(missing, s), UncoercibleValue);
}

TEST(Schema, ValidateReportsEveryViolation) {
  auto s = event_schema();
  auto v = validate_record(point({{"event_type", ""}, {"country", "Haiti"}, {"location", "x"}, {"date", "soon"}, {"affected", "many"}}), s);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].kind, ViolationKind::kMissing);
}

// ---------------------------------------------------------------------------

TEST(Formula, Arithmetic) {
  EXPECT_EQ(evaluate_formula("0.12 * population", {{"population", Decimal(4000000)}}), Decimal(480000));
  EXPECT_EQ(evaluate_formula("(a + b) / 2", {{"a", Decimal(1)}, {"b", Decimal(2)}}), dec("1.5"));
  EXPECT_EQ(evaluate_formula("-a - -3", {{"a", Decimal(1)}}), Decimal(2));
  EXPECT_EQ(evaluate_formula("2 + 3 * 4", {}), Decimal(14));
}

TEST(Formula, Errors) {
  EXPECT_THROW(evaluate_formula("1 / 0", {}), FormulaError);
  EXPECT_THROW(evaluate_formula("x + 1", {}), FormulaError);
  EXPECT_THROW(evaluate_formula("1 +", {}), FormulaError);
  EXPECT_THROW(evaluate_formula("pow(2, 3)", {}), FormulaError);
  EXPECT_EQ(formula_operands("a * (b + a)"), (std::set<std::string>{"a", "b"}));
}

// ---------------------------------------------------------------------------

TEST(Structured, ExtractsFencedOrBareJson) {
  auto a = extract_json_block("Sure!\n```json\n{\"x\": 1}\n```\nDone.");
  ASSERT_TRUE(a);
  EXPECT_EQ((*a)["x"], 1);
  auto b = extract_json_block("The answer is {\"y\": \"}\"} as requested");
  ASSERT_TRUE(b);
  EXPECT_EQ((*b)["y"], "}");
  EXPECT_FALSE(extract_json_block("no json here"));
}

TEST(Structured, ConformsLenientSpellings) {
  ResponseShape shape{{"ok", ValueKind::kBoolean}, {"name", ValueKind::kText}, {"n", ValueKind::kNumber, true}};
  json j{{"ok", "yes"}, {"name", 12}};
  EXPECT_FALSE(conform_to_shape(j, shape));
  EXPECT_EQ(j["ok"], true);
  EXPECT_EQ(j["name"], "12");
  json bad{{"ok", true}};
  auto err = conform_to_shape(bad, shape);
  ASSERT_TRUE(err);
  EXPECT_NE(err->find("name"), std::string::npos);
}

// ---------------------------------------------------------------------------

TEST(HtmlMarkdown, HeadingsParagraphsTablesLinks) {
  auto md = html_to_markdown(
      "<html><head><title>T</title><script>var x=1;</script><style>p{}</style></head><body>"
      "<h1>Floods</h1><p>About <b>37,000</b> people &amp; more.</p>"
      "<ul><li>One</li><li>Two</li></ul><a href=\"/x\">link</a>"
      "<table><tr><th>A</th><th>B</th></tr><tr><td>1</td><td>2</td></tr></table></body></html>");
  EXPECT_NE(md.find("# Floods"), std::string::npos);
  EXPECT_NE(md.find("37,000"), std::string::npos);
  EXPECT_NE(md.find("people & more"), std::string::npos);
  EXPECT_NE(md.find("One"), std::string::npos);
  EXPECT_NE(md.find("| A | B |"), std::string::npos);
  EXPECT_EQ(md.find("var x"), std::string::npos);
}

TEST(HtmlMarkdown, DecodesEntities) {
  EXPECT_EQ(detail::decode_entities("&eacute;&#233;&#xE9;&lt;&nbsp;"), "ééé< ");
  EXPECT_EQ(detail::decode_entities("a &bogus; b & c"), "a &bogus; b & c");
}

// ---------------------------------------------------------------------------

TEST(Dataset, LoadsRowsAndPassthrough) {
  DatasetOptions o{"event_type, date:date", "d", "source_url", "row_id"};
  auto ds = load_dataset("row_id,event_type,date,note,source_url\nr1,Flood,2023,hi,http://a.test/\n", o);
  ASSERT_EQ(ds.rows.size(), 1u);
  EXPECT_EQ(ds.rows[0].row_id, "r1");
  EXPECT_EQ(ds.passthrough_columns, (std::vector<std::string>{"note"}));
  EXPECT_EQ(ds.rows[0].source_url, "http://a.test/");
}

TEST(Dataset, Errors) {
  DatasetOptions o{"event_type, date:date", "d", "source_url", "row_id"};
  EXPECT_THROW(load_dataset("row_id,event_type,source_url\nr1,F,http://a.test/\n", o), DatasetError);
  EXPECT_THROW(load_dataset("row_id,event_type,date\nr1,F,2023\n", o), DatasetError);
  EXPECT_THROW(load_dataset("row_id,event_type,date,source_url\nr1,F,2023,u\nr1,G,2023,u\n", o), DatasetError);
}

TEST(Dataset, GeneratedIdsWithoutIdColumn) {
  DatasetOptions o{"event_type", "d", "source_url", ""};
  auto ds = load_dataset("event_type,source_url\nA,http://a.test/\nB,http://b.test/\n", o);
  ASSERT_EQ(ds.rows.size(), 2u);
  EXPECT_NE(ds.rows[0].row_id, ds.rows[1].row_id);
}

// ---------------------------------------------------------------------------

TEST(Config, JsonRoundTripAndUnknownKeys) {
  RunConfig c;
  c.schema = "a, b:int";
  c.toggles.discovery = false;
  c.host_overrides["x.test"] = "127.0.0.1:1";
  EXPECT_EQ(config_from_json(to_json(c)), c);
  EXPECT_THROW(config_from_json(json{{"parallelsm", 2}}), Error);
  EXPECT_THROW(config_from_json(json{{"parallelism", 0}}), Error);
  EXPECT_THROW(config_from_json(json{{"toggles", {{"bogus", true}}}}), Error);
}

TEST(Config, ConfigEchoCarriesNoCredentialValue) {
  RunConfig c;
  auto j = to_json(c).dump();
  EXPECT_EQ(j.find("sk-"), std::string::npos);
  EXPECT_NE(j.find("credential_env"), std::string::npos);
}

TEST(Config, Presets) {
  RunConfig base;
  for (const auto& n : preset_names()) EXPECT_NO_THROW(apply_preset(base, n)) << n;
  EXPECT_FALSE(apply_preset(base, "no-remediation").toggles.remediation);
  EXPECT_FALSE(apply_preset(base, "rem-only").toggles.discovery);
  EXPECT_EQ(apply_preset(base, "monolith").mode, RunMode::kMonolith);
  EXPECT_EQ(apply_preset(base, "full").toggles, base.toggles);
  EXPECT_THROW(apply_preset(base, "nope"), Error);
}

// ---------------------------------------------------------------------------

TEST(Rules, DefaultPackAcceptsCleanRow) {
  auto s = event_schema();
  auto r = apply_rules(point({{"event_type", "Flood"}, {"country", "Haiti"}, {"location", "x"}, {"date", "2023"},
                              {"affected", "1,000"}}),
                       s, default_rulepack(s));
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.record.value("affected"), "1000");
}

TEST(Rules, ReportsAllFailures) {
  auto s = event_schema();
  auto pack = rulepack_from_json(json::parse(R"({"fields": {"affected": {"min": 0, "max": 100},
      "country": {"allowed": ["Haiti"]}}, "url": {"blocked_domains": ["example.test"]}})"),
                                 s);
  auto r = apply_rules(point({{"event_type", "Flood"}, {"country", "Chad"}, {"location", "x"}, {"date", "2023"},
                              {"affected", "500"}}),
                       s, pack);
  EXPECT_EQ(r.failures.size(), 3u);
}

TEST(Rules, InvalidPacks) {
  auto s = event_schema();
  EXPECT_THROW(rulepack_from_json(json::parse(R"({"fields": {"nope": {}}})"), s), RulepackError);
  EXPECT_THROW(rulepack_from_json(json::parse(R"({"fields": {"country": {"min": 1}}})"), s), RulepackError);
  EXPECT_THROW(rulepack_from_json(json::parse(R"({"fields": {"country": {"pattern": "("}}})"), s), RulepackError);
  EXPECT_THROW(rulepack_from_json(json::parse(R"({"extra": 1})"), s), RulepackError);
}

// ---------------------------------------------------------------------------

TEST(Finalization, FingerprintEscapesSeparators) {
  EXPECT_NE(encode_fingerprint({"a|b", "c"}), encode_fingerprint({"a", "b|c"}));
  EXPECT_NE(encode_fingerprint({"a\\", "|b"}), encode_fingerprint({"a\\|", "b"}));
}

TEST(Finalization, DedupDropsIncompleteAndDuplicates) {
  auto s = event_schema();
  std::map<std::string, std::string> v{{"event_type", "Flood"}, {"country", "Haiti"}, {"location", "x"}, {"date", "2023-06"},
                                       {"affected", "5"}};
  auto a = point(v, "a");
  auto b = point(v, "b");
  auto c = point(v, "c");
  c.values["date"] = "2023-06-01";
  auto d = point(v, "d");
  d.values["location"] = "";
  auto res = dedup({a, b, c, d}, s);
  ASSERT_EQ(res.kept.size(), 2u);
  EXPECT_EQ(res.kept[0].row_id, "a");
  EXPECT_EQ(res.kept[1].row_id, "c");
  ASSERT_EQ(res.dropped.size(), 2u);
  EXPECT_EQ(res.dropped[0].reason, DropReason::kDuplicate);
  EXPECT_EQ(res.dropped[1].reason, DropReason::kFilteredIncomplete);
}
