#include <gtest/gtest.h>

#include <thread>

#include "webvet/context.hpp"
#include "webvet/evaluation.hpp"
#include "webvet/single_flight.hpp"

using namespace webvet;

namespace {

SchemaSpec event_schema() { return generate_schema("event_type, country, location, date:date, affected:int", {}, "events"); }

std::shared_ptr<ScriptedProvider> scripted(const json& j) { return ScriptedProvider::from_json(j); }

DataPoint row(std::string id, std::string type, std::string loc, std::string date, std::string affected,
              Origin origin = Origin::kInitial) {
  DataPoint d;
  d.row_id = std::move(id);
  d.values = {{"event_type", std::move(type)}, {"country", "Haiti"}, {"location", std::move(loc)},
              {"date", std::move(date)}, {"affected", std::move(affected)}};
  d.source_url = "http://example.test/" + d.row_id;
  d.origin = origin;
  return d;
}

const char* kContextResponse = R"({"fields": {
  "event_type": {"entity_description": "hazard kind", "negative_examples": ["a war"]},
  "country": {"entity_description": "sovereign state"},
  "location": {"entity_description": "town or region"},
  "date": {"entity_description": "onset date", "temporal_description": "the day the event began"},
  "affected": {"entity_description": "people affected", "negative_examples": ["deaths only"]}},
  "fallacy_examples": [{"scenario": "s1", "why_wrong": "w1"}, {"scenario": "s2", "why_wrong": "w2"}]})";

}  // namespace

// ---------------------------------------------------------------------------
// Gateway and pricing

TEST(ScriptedProvider, RoutingOrder) {
  auto p = scripted({{"RELEVANCY/r1", "exact"}, {"RELEVANCY/*", "kind"}, {"*", "global"}});
  EXPECT_EQ(p->complete({AgentKind::kRelevancy, "r1", "p"}).text, "exact");
  EXPECT_EQ(p->complete({AgentKind::kRelevancy, "r2", "p"}).text, "kind");
  EXPECT_EQ(p->complete({AgentKind::kLayout, "u", "p"}).text, "global");
  auto strict = scripted({{"LAYOUT/*", "x"}});
  EXPECT_THROW(strict->complete({AgentKind::kRelevancy, "r", "p"}), ProviderError);
}

TEST(ScriptedProvider, SequencesAdvancePerKey) {
  auto p = scripted({{"LAYOUT/*", json::array({"a", "b"})}});
  EXPECT_EQ(p->complete({AgentKind::kLayout, "u1", ""}).text, "a");
  EXPECT_EQ(p->complete({AgentKind::kLayout, "u1", ""}).text, "b");
  EXPECT_EQ(p->complete({AgentKind::kLayout, "u1", ""}).text, "b");
  EXPECT_EQ(p->complete({AgentKind::kLayout, "u2", ""}).text, "a");
}

TEST(Gateway, RepairsMalformedResponses) {
  auto p = scripted({{"RELEVANCY/*", json::array({"not json", "{\"is_relevant\": \"yes\"}", "```json\n{\"is_relevant\": true}\n```"})}});
  Gateway g(p);
  auto r = g.complete_structured(AgentKind::kRelevancy, "r1", "prompt", {{"is_relevant", ValueKind::kBoolean}});
  EXPECT_EQ(r.attempts, 2);
  EXPECT_EQ(r.value["is_relevant"], true);
  auto entries = g.ledger()->snapshot();
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].outcome, "malformed");
  EXPECT_EQ(entries[1].outcome, "ok");
}

TEST(Gateway, ExhaustsAfterMaxRepairs) {
  Gateway g(scripted({{"*", "still not json"}}), {2, 4});
  EXPECT_THROW(g.complete_structured(AgentKind::kLayout, "u", "p", {{"layout", ValueKind::kText}}), ParseExhausted);
  EXPECT_EQ(g.ledger()->size(), 3u);
}

TEST(Gateway, ProviderErrorsAreLedgered) {
  Gateway g(scripted(json::object()));
  EXPECT_THROW(g.complete_structured(AgentKind::kLayout, "u", "p", {}), ProviderError);
  ASSERT_EQ(g.ledger()->size(), 1u);
  EXPECT_EQ(g.ledger()->snapshot()[0].outcome, "provider_error");
}

TEST(Pricing, EstimateIsExact) {
  auto t = PricingTable::from_json(json::parse(R"({"m": {"input_per_1k": "0.15", "output_per_1k": 0.6}})"));
  auto est = estimate_cost({{1000, 500, {}, "m"}, {2000, 0, {}, "m"}, {10, 10, {}, "other"}}, t);
  EXPECT_EQ(est.total, *Decimal::parse("0.75"));
  EXPECT_EQ(est.unknown_models, (std::set<std::string>{"other"}));
  EXPECT_THROW(PricingTable::from_json(json::parse(R"({"m": {"input_per_1k": -1, "output_per_1k": 0}})")), Error);
}

// ---------------------------------------------------------------------------
// Context

TEST(Context, SampleIndicesAreDistinctAndDeterministic) {
  auto a = sample_indices(100, 10, 42);
  auto b = sample_indices(100, 10, 42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 10u);
  EXPECT_NE(a, sample_indices(100, 10, 43));
  EXPECT_EQ(sample_indices(3, 10, 1).size(), 3u);
}

TEST(Context, ParsesAndPadsNegativeExamples) {
  auto ctx = parse_context_response(json::parse(kContextResponse), event_schema());
  EXPECT_EQ(ctx.field_order.size(), 5u);
  EXPECT_EQ(ctx.per_field.at("country").negative_examples.size(), kMinNegativeExamples);
  EXPECT_EQ(ctx.per_field.at("date").temporal_description, "the day the event began");
  EXPECT_EQ(ctx.fallacy_examples.size(), 2u);
}

TEST(Context, MissingFieldIsAnError) {
  auto j = json::parse(kContextResponse);
  j["fields"].erase("location");
  EXPECT_THROW(parse_context_response(j, event_schema()), ContextError);
  auto k = json::parse(kContextResponse);
  k["fallacy_examples"] = json::array();
  EXPECT_THROW(parse_context_response(k, event_schema()), ContextError);
}

TEST(Context, RenderingPerAgent) {
  auto ctx = parse_context_response(json::parse(kContextResponse), event_schema());
  auto rel = render_context(ctx, AgentKind::kRelevancy);
  EXPECT_EQ(rel.find("hazard kind"), std::string::npos);
  auto fc = render_context(ctx, AgentKind::kFactCheck);
  EXPECT_NE(fc.find("hazard kind"), std::string::npos);
  EXPECT_NE(fc.find("the day the event began"), std::string::npos);
  EXPECT_NE(fc.find("s1"), std::string::npos);
  auto bare = render_context(ctx, AgentKind::kFactCheck, {false});
  EXPECT_EQ(bare.find("a war"), std::string::npos);
  EXPECT_EQ(bare.find("s1"), std::string::npos);
}

TEST(Context, BuildUsesOneCall) {
  Gateway g(scripted({{"CONTEXT_GENERATOR/context", kContextResponse}}));
  std::vector<DataPoint> rows;
  for (int i = 0; i < 20; ++i) rows.push_back(row("r" + std::to_string(i), "Flood", "x", "2023", "1"));
  auto ctx = build_context(rows, event_schema(), 7, g);
  EXPECT_EQ(ctx.sample_row_ids.size(), kContextSampleSize);
  EXPECT_EQ(g.ledger()->size(), 1u);
}

// ---------------------------------------------------------------------------
// Validators

TEST(Validators, RelevancyVerdict) {
  Gateway g(scripted({{"RELEVANCY/a", R"({"is_relevant": false})"}, {"RELEVANCY/*", R"({"is_relevant": true, "reason": "ok"})"}}));
  auto s = event_schema();
  auto no = assess_relevancy(row("a", "Flood", "x", "2023", "1"), s, "", g);
  EXPECT_FALSE(no.is_relevant);
  EXPECT_FALSE(no.reason.empty());
  EXPECT_TRUE(assess_relevancy(row("b", "Flood", "x", "2023", "1"), s, "", g).is_relevant);
}

TEST(Validators, ParseFactCheck) {
  auto r = parse_fact_check(json::parse(
      R"({"has_meaningful_content": true, "supports_claims": false, "extracted_date": "June 2023", "notes": ""})"));
  EXPECT_TRUE(r.has_meaningful_content);
  EXPECT_FALSE(r.supports_claims);
  ASSERT_TRUE(r.extracted_date);
  EXPECT_EQ(r.extracted_date->canonical, "2023-06");
  EXPECT_FALSE(r.notes.empty());
}

TEST(Validators, ArbiterReasonOrder) {
  auto v = arbitrate({false, false, std::nullopt, ""}, {"blog", Reliability::kVeryLow, ""});
  EXPECT_EQ(v.reasons, (std::vector<RejectReason>{RejectReason::kNoMeaningfulContent, RejectReason::kClaimsUnsupported,
                                                  RejectReason::kUnreliableSource}));
  EXPECT_TRUE(arbitrate({true, true, std::nullopt, ""}, {"news", Reliability::kMedium, ""}).accepted());
  EXPECT_FALSE(arbitrate({true, true, std::nullopt, ""}, {"news", Reliability::kLow, ""}).accepted());
}

TEST(Validators, ReliabilitySpellings) {
  EXPECT_EQ(parse_reliability("very low"), Reliability::kVeryLow);
  EXPECT_EQ(parse_reliability("Very-High"), Reliability::kVeryHigh);
  EXPECT_FALSE(parse_reliability("great"));
}

// ---------------------------------------------------------------------------
// Remediation

TEST(Remediation, PlanInvariants) {
  auto s = event_schema();
  auto ok = parse_plan(json::parse(R"({"strategy": "direct_replacement", "replacements": {"location": "X"}, "justification": "j"})"), s);
  EXPECT_EQ(ok.strategy, RemediationStrategy::kDirectReplacement);
  EXPECT_EQ(ok.target_fields, (std::vector<std::string>{"location"}));
  auto calc = parse_plan(json::parse(R"({"strategy": "CALCULATION", "target_fields": ["affected"], "formula": "0.1 * p",
      "lookups": [{"operand": "p", "query": "population"}], "justification": "j"})"), s);
  EXPECT_EQ(calc.lookups.size(), 1u);

  const char* rejected[] = {
      R"({"strategy": "NONE", "justification": "j"})",
      R"({"strategy": "DIRECT_REPLACEMENT", "justification": "j"})",
      R"({"strategy": "DIRECT_REPLACEMENT", "replacements": {"nope": "X"}, "justification": "j"})",
      R"({"strategy": "DIRECT_REPLACEMENT", "replacements": {"location": "X"}, "lookups": [{"operand": "a", "query": "q"}], "justification": "j"})",
      R"({"strategy": "CALCULATION", "target_fields": ["location"], "formula": "1", "justification": "j"})",
      R"({"strategy": "CALCULATION", "target_fields": ["affected"], "formula": "a * b", "lookups": [{"operand": "a", "query": "q"}], "justification": "j"})",
      R"({"strategy": "CALCULATION", "target_fields": ["affected"], "formula": "a +", "lookups": [{"operand": "a", "query": "q"}], "justification": "j"})",
      R"({"strategy": "GUESS", "justification": "j"})",
  };
  for (const char* r : rejected) EXPECT_THROW(parse_plan(json::parse(r), s), PlanRejected) << r;
}

TEST(Remediation, ApplyDirectReplacement) {
  auto s = event_schema();
  RemediationPlan p;
  p.replacements = {{"affected", "1,200"}};
  p.target_fields = {"affected"};
  auto out = apply_plan(row("a", "Flood", "x", "2023", "5"), p, {}, s);
  EXPECT_EQ(out.value("affected"), "1200");
  EXPECT_EQ(out.value("location"), "x");
  EXPECT_EQ(out.origin, Origin::kRemediated);
  p.replacements = {{"affected", "lots"}};
  EXPECT_THROW(apply_plan(row("a", "Flood", "x", "2023", "5"), p, {}, s), ApplyFailed);
  p.replacements = {{"location", " "}};
  EXPECT_THROW(apply_plan(row("a", "Flood", "x", "2023", "5"), p, {}, s), ApplyFailed);
}

TEST(Remediation, ApplyCalculationRoundsIntegers) {
  auto s = event_schema();
  RemediationPlan p;
  p.strategy = RemediationStrategy::kCalculation;
  p.target_fields = {"affected"};
  p.formula = "pop / 3";
  auto out = apply_plan(row("a", "Flood", "x", "2023", "5"), p, {{"pop", Decimal(1000), "u", "e"}}, s);
  EXPECT_EQ(out.value("affected"), "333");
  p.formula = "pop / 0";
  EXPECT_THROW(apply_plan(row("a", "Flood", "x", "2023", "5"), p, {{"pop", Decimal(1), "u", "e"}}, s), ApplyFailed);
}

// ---------------------------------------------------------------------------
// Evaluation

TEST(Evaluation, LenientDatesMatchAtCoarserPrecision) {
  EXPECT_TRUE(dates_match("2023-06-03", "2023-06"));
  EXPECT_TRUE(dates_match("2023", "2023-06-03"));
  EXPECT_FALSE(dates_match("2023-06-03", "2023-07"));
  EXPECT_FALSE(dates_match("2023-06-03", "2023-06-04"));
  auto s = event_schema();
  EXPECT_TRUE(records_match(row("a", "Flood", "x", "2023-06-03", "5"), row("g", "Flood", "x", "2023-06", "5"), s));
  EXPECT_FALSE(records_match(row("a", "Flood", "x", "2023-06-03", "5"), row("g", "Flood", "x", "2023-06", "5"), s,
                             MatchPolicy::kStrict));
}

TEST(Evaluation, GreedyOneToOneMatching) {
  auto s = event_schema();
  std::vector<DataPoint> out{row("o1", "Flood", "x", "2023", "5"), row("o2", "Flood", "x", "2023", "5"),
                             row("o3", "Storm", "y", "2023", "1")};
  std::vector<DataPoint> gt{row("g1", "Flood", "x", "2023", "5"), row("g2", "Flood", "x", "2023", "5"),
                            row("g3", "Flood", "x", "2023", "5")};
  auto m = match_records(out, gt, s);
  ASSERT_EQ(m.pairs.size(), 2u);
  EXPECT_EQ(m.pairs[0], (std::pair<std::size_t, std::size_t>{0, 0}));
  EXPECT_EQ(m.pairs[1], (std::pair<std::size_t, std::size_t>{1, 1}));
  EXPECT_EQ(m.unmatched_gt, (std::vector<std::size_t>{2}));
  EXPECT_EQ(m.unmatched_output, (std::vector<std::size_t>{2}));
}

TEST(Evaluation, MetricsArithmetic) {
  EXPECT_EQ(percentage(14, 18).to_fixed(1), "77.8");
  EXPECT_EQ(f1_score(*Decimal::parse("92.7"), *Decimal::parse("78.7")).to_fixed(1), "85.1");
  EXPECT_TRUE(f1_score(Decimal(0), Decimal(0)).is_zero());

  auto s = event_schema();
  GroundTruth gt;
  gt.remediable_ids = std::set<std::string>{"g2"};
  gt.records = {row("g1", "Flood", "x", "2023", "5"), row("g2", "Storm", "y", "2023", "7"), row("g3", "Quake", "z", "2023", "1")};
  std::vector<DataPoint> out{row("o1", "Flood", "x", "2023", "5"), row("o2", "Storm", "y", "2023", "7", Origin::kRemediated),
                             row("o3", "Fire", "w", "2023", "1")};
  auto m = score(out, gt, s);
  EXPECT_EQ(m.matched, 2u);
  EXPECT_EQ(m.precision->to_fixed(1), "66.7");
  EXPECT_EQ(m.recall.to_fixed(1), "66.7");
  ASSERT_TRUE(m.remediation_recall);
  EXPECT_EQ(m.remediation_recall->to_fixed(1), "100.0");

  auto empty = score({}, gt, s);
  EXPECT_FALSE(empty.precision);
  EXPECT_TRUE(empty.f1.is_zero());
  EXPECT_TRUE(to_json(empty)["precision"].is_null());
}

TEST(Evaluation, GroundTruthLoading) {
  auto s = event_schema();
  auto gt = load_ground_truth(
      "row_id,event_type,country,location,date,affected,remediable\n"
      "g1,Flood,Haiti,x,June 2023,\"1,000\",yes\ng2,Flood,Haiti,y,2023,5,\n",
      s);
  ASSERT_EQ(gt.records.size(), 2u);
  EXPECT_EQ(gt.records[0].value("date"), "2023-06");
  EXPECT_EQ(gt.records[0].value("affected"), "1000");
  EXPECT_EQ(*gt.remediable_ids, (std::set<std::string>{"g1"}));
  EXPECT_THROW(load_ground_truth("row_id,event_type\ng1,Flood\n", s), DatasetError);
}

TEST(Evaluation, ComparisonDeltasAndRendering) {
  ComparisonReport rep;
  ComparisonEntry base, worse, failed;
  base.ok = worse.ok = true;
  base.config.label = "full";
  worse.config.label = "no-x";
  failed.config.label = "broken";
  failed.error = "boom";
  base.metrics.precision = Decimal(90);
  base.metrics.recall = Decimal(80);
  base.metrics.f1 = f1_score(Decimal(90), Decimal(80));
  worse.metrics.precision = Decimal(95);
  worse.metrics.recall = *Decimal::parse("62.5");
  worse.metrics.f1 = f1_score(Decimal(95), *Decimal::parse("62.5"));
  base.totals.cost = *Decimal::parse("0.0123");
  worse.totals.cost = *Decimal::parse("0.004");
  rep.entries = {base, worse, failed};
  EXPECT_EQ(metric_delta(rep, 1, "precision"), "+5.0");
  EXPECT_EQ(metric_delta(rep, 1, "recall"), "-17.5");
  EXPECT_EQ(metric_delta(rep, 0, "f1"), "0.0");
  EXPECT_EQ(metric_delta(rep, 2, "f1"), "n/a");
  EXPECT_EQ(metric_delta(rep, 1, "remediation_recall"), "n/a");

  auto table = render_comparison_table(rep);
  EXPECT_NE(table.find("no-x"), std::string::npos);
  EXPECT_NE(table.find("boom"), std::string::npos);
  auto svg = render_cost_f1_svg(rep);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("no-x"), std::string::npos);
  auto j = to_json(rep);
  EXPECT_EQ(j["runs"].size(), 3u);
  EXPECT_EQ(j["runs"][1]["delta"]["precision"], "+5.0");
}

// ---------------------------------------------------------------------------
// Concurrency helpers

TEST(SingleFlight, ComputesOncePerKey) {
  SingleFlight<std::string, int> sf;
  std::atomic<int> calls{0};
  std::vector<std::thread> threads;
  std::vector<int> results(16);
  for (int i = 0; i < 16; ++i)
    threads.emplace_back([&, i] {
      results[static_cast<std::size_t>(i)] = sf.get("k", [&] {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        return 42;
      });
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(calls.load(), 1);
  for (int r : results) EXPECT_EQ(r, 42);
}

TEST(EventLog, ReadersSeeOneOrder) {
  EventLog log;
  std::vector<RowEvent> seen;
  std::thread reader([&] {
    std::size_t next = 0;
    bool done = false;
    while (!done) {
      auto batch = log.wait_from(next, std::chrono::milliseconds(50), &done);
      next += batch.size();
      seen.insert(seen.end(), batch.begin(), batch.end());
    }
  });
  for (int i = 0; i < 100; ++i) {
    RowEvent e;
    e.row_id = "r" + std::to_string(i);
    e.status = RowStatus::kProcessing;
    e.stage = "INTAKE";
    log.append(e);
  }
  log.close();
  reader.join();
  ASSERT_EQ(seen.size(), 100u);
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i].seq, i);
}
