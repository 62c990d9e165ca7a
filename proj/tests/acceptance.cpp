// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "support/test_support.hpp"
#include "webvet/evaluation.hpp"

using namespace webvet;
using namespace webvet::testing;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fixed(double v, int places = 3) {
  std::ostringstream os;
  os.precision(places);
  os << std::fixed << v;
  return os.str();
}

void require(Result& r, bool ok, const std::string& what) {
  if (!ok) {
    r.pass = false;
    r.detail += (r.detail.empty() ? "" : "; ") + what;
  }
}

// ---------------------------------------------------------------------------
// 1. F1 arithmetic against reference (P, R, F1) triples

struct Triple {
  const char* system;
  const char* p;
  const char* r;
  const char* f1;
};

// Systems whose stated F1 cannot be derived from the stated P and R at any
// values inside their rounding intervals (their F1 is an average of
// per-dataset F1 scores, not the F1 of the averaged P and R).
const std::set<std::string> kSourceInconsistent{"AIC (gpt-5)"};

Result criterion1() {
  static const Triple kTriples[] = {
      {"AIC (4o-mini)", "92.7", "78.7", "85.1"}, {"AIC (o4-mini)", "92.7", "61.7", "74.1"},
      {"AIC (gpt-5)", "100.0", "66.7", "79.7"},  {"Monolith (gpt-5)", "89.5", "58.9", "71.0"},
      {"Rule-Based", "92.4", "58.2", "71.4"},    {"No FactCheck", "92.4", "76.6", "83.8"},
      {"No Context", "93.0", "74.5", "82.7"},    {"No CtxExamples", "95.3", "71.6", "81.8"},
      {"Rem-Only", "95.3", "70.9", "81.3"},      {"No Integrity", "90.5", "73.8", "81.3"},
      {"No SrcScrutiny", "91.4", "73.0", "81.2"}, {"No CtxLearning", "92.8", "71.6", "80.8"},
      {"No Remediation", "95.9", "66.7", "78.7"}, {"No Layout", "94.1", "67.4", "78.5"},
      {"Discovery-Only", "96.0", "66.0", "78.2"}, {"Min FactCheck", "83.6", "65.2", "73.3"},
      {"No Relevancy", "78.9", "68.1", "73.1"},  {"No Formatter", "92.1", "41.1", "56.9"},
  };
  auto start = Clock::now();
  Result res;
  const Decimal tol = *Decimal::parse("0.05");
  const Decimal half_step = *Decimal::parse("0.05");
  auto absd = [](const Decimal& d) { return d.sign() < 0 ? -d : d; };
  std::size_t direct = 0, via_rounding = 0, inconsistent = 0;
  std::string notes;
  for (const auto& t : kTriples) {
    Decimal p = *Decimal::parse(t.p), r = *Decimal::parse(t.r), f1 = *Decimal::parse(t.f1);
    Metrics m;
    m.precision = p;
    m.recall = r;
    Decimal computed = f1_score(p, r);
    Decimal exact = Decimal(2) * p * r / (p + r);
    if (absd(computed - f1) <= tol && absd(exact - f1) <= tol) {
      ++direct;
      continue;
    }
    // Reference P and R are themselves rounded to one decimal; look for
    // unrounded inputs inside [x - 0.05, x + 0.05] that reproduce F1.
    bool reconciled = false;
    for (int i = -5; i <= 5 && !reconciled; ++i)
      for (int j = -5; j <= 5 && !reconciled; ++j) {
        Decimal pp = p + Decimal(i) * half_step / Decimal(5), rr = r + Decimal(j) * half_step / Decimal(5);
        if (pp > Decimal(100) || rr > Decimal(100)) continue;
        if (f1_score(pp, rr) == f1) reconciled = true;
      }
    if (reconciled) {
      ++via_rounding;
      notes += std::string(" ") + t.system + " reproduces only with unrounded P/R;";
    } else if (kSourceInconsistent.count(t.system)) {
      ++inconsistent;
      notes += std::string(" ") + t.system + " is internally inconsistent (2PR/(P+R)=" + exact.to_fixed(2) +
               " vs stated " + t.f1 + ");";
    } else {
      require(res, false, std::string(t.system) + ": computed " + computed.to_fixed(1) + " vs stated " + t.f1);
    }
  }
  // F1 = 0 when P + R = 0.
  require(res, f1_score(Decimal(0), Decimal(0)).is_zero(), "F1(0,0) != 0");
  require(res, f1_score(Decimal(100), Decimal(100)) == Decimal(100), "F1(100,100) != 100");
  double secs = seconds_since(start);
  require(res, secs < 1.0, "took " + fixed(secs) + "s");
  if (res.pass)
    res.detail = std::to_string(direct) + "/18 triples within 0.05 directly, " + std::to_string(via_rounding) +
                 " within input rounding, " + std::to_string(inconsistent) + " flagged;" + notes + " " + fixed(secs) + "s";
  return res;
}

// ---------------------------------------------------------------------------
// 2. Arbiter truth table

Result criterion2() {
  auto start = Clock::now();
  Result res;
  const Reliability levels[] = {Reliability::kVeryLow, Reliability::kLow, Reliability::kMedium, Reliability::kHigh,
                                Reliability::kVeryHigh};
  int cases = 0;
  for (bool content : {false, true})
    for (bool supports : {false, true})
      for (auto level : levels) {
        ++cases;
        FactCheckReport fc{content, supports, std::nullopt, "n"};
        SourceAssessment src{"news outlet", level, ""};
        Verdict v = arbitrate(fc, src);
        bool unreliable = level == Reliability::kVeryLow || level == Reliability::kLow;
        std::vector<RejectReason> expected;
        if (!content) expected.push_back(RejectReason::kNoMeaningfulContent);
        if (!supports) expected.push_back(RejectReason::kClaimsUnsupported);
        if (unreliable) expected.push_back(RejectReason::kUnreliableSource);
        Decision want = (!content || !supports || unreliable) ? Decision::kReject : Decision::kAccept;
        std::string label = std::string(content ? "content" : "no-content") + "/" + (supports ? "supported" : "unsupported") +
                            "/" + std::string(to_string(level));
        require(res, v.decision == want, label + ": wrong decision");
        require(res, v.reasons == expected, label + ": wrong reasons");
        require(res, v.accepted() == (want == Decision::kAccept), label + ": accepted() disagrees");
      }
  double secs = seconds_since(start);
  require(res, cases == 20, "expected 20 cases");
  require(res, secs < 1.0, "took " + fixed(secs) + "s");
  if (res.pass) res.detail = "20/20 combinations, " + fixed(secs) + "s";
  return res;
}

// ---------------------------------------------------------------------------
// 3. Dedup against a brute-force reference

SchemaSpec dedup_schema() { return generate_schema("name, count:int, date:date", {}, "dedup"); }

DataPoint rec(const std::string& id, const std::string& name, const std::string& count, const std::string& date) {
  DataPoint d;
  d.row_id = id;
  d.values = {{"name", name}, {"count", count}, {"date", date}};
  return d;
}

// Quadratic reference: a record survives when it is complete and no earlier
// survivor has the same non-date values, the same date precision and the same
// canonical date.
std::vector<std::string> brute_force_kept(const std::vector<DataPoint>& in) {
  std::vector<const DataPoint*> kept;
  std::vector<std::string> ids;
  for (const auto& r : in) {
    if (r.value("name").empty() || r.value("count").empty() || r.value("date").empty()) continue;
    bool dup = false;
    for (const auto* k : kept) {
      if (k->value("name") != r.value("name") || k->value("count") != r.value("count")) continue;
      auto a = normalize_date(k->value("date")), b = normalize_date(r.value("date"));
      if (a.precision == b.precision && a.canonical == b.canonical) dup = true;
    }
    if (!dup) {
      kept.push_back(&r);
      ids.push_back(r.row_id);
    }
  }
  return ids;
}

std::vector<std::string> ids_of(const std::vector<DataPoint>& v) {
  std::vector<std::string> out;
  for (const auto& d : v) out.push_back(d.row_id);
  return out;
}

Result criterion3() {
  auto start = Clock::now();
  Result res;
  SchemaSpec s = dedup_schema();
  std::mt19937_64 rng(20240305);
  const std::vector<std::string> names{"a", "b", "a|b", "a\\", "b|", ""};
  const std::vector<std::string> counts{"1", "2", "12"};
  const std::vector<std::string> dates{"2024-03-05", "2024-03-12", "2024-04-05", "2024-03", "2024-04", "2023-03",
                                       "2024",       "2023",       "2024-03-05"};
  std::size_t total = 0;
  for (int inst = 0; inst < 1000 && res.pass; ++inst) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(0, 50)(rng);
    std::vector<DataPoint> in;
    for (std::size_t i = 0; i < n; ++i) {
      auto pick = [&](const std::vector<std::string>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
      in.push_back(rec("x" + std::to_string(i), pick(names), pick(counts), pick(dates)));
    }
    total += n;
    auto got = ids_of(dedup(in, s).kept);
    if (got != brute_force_kept(in)) require(res, false, "instance " + std::to_string(inst) + " differs from reference");
  }
  // The named cases.
  auto kept = [&](std::vector<DataPoint> in, const SchemaSpec& sc) { return ids_of(dedup(in, sc).kept); };
  using V = std::vector<std::string>;
  require(res, kept({rec("1", "Acme", "5", "2024-03-05"), rec("2", "Acme", "5", "2024-03")}, s) == V{"1", "2"},
          "day and month precision must coexist");
  require(res, kept({rec("1", "Acme", "5", "2024-03-05"), rec("2", "Acme", "5", "2024-03-05")}, s) == V{"1"},
          "same day must be a duplicate");
  require(res, kept({rec("1", "Acme", "5", "2024-03-05"), rec("2", "Acme", "5", "2024-03-12")}, s) == V{"1", "2"},
          "distinct days must both be kept");
  SchemaSpec undated = generate_schema("name, count:int", {}, "u");
  DataPoint u1, u2;
  u1.row_id = "1";
  u2.row_id = "2";
  u1.values = u2.values = {{"name", "Acme"}, {"count", "5"}};
  require(res, kept({u1, u2}, undated) == V{"1"}, "no-date schema must keep the first instance");
  require(res, dedup({}, s).kept.empty(), "empty input");
  double secs = seconds_since(start);
  require(res, secs < 10.0, "took " + fixed(secs) + "s");
  if (res.pass) res.detail = "1000 instances (" + std::to_string(total) + " records) equal to reference, 4 named cases, " + fixed(secs) + "s";
  return res;
}

// ---------------------------------------------------------------------------
// 4-6, 8. Scripted end-to-end fixture

std::string reasons_of(const RowOutcome* o) {
  if (!o) return "(missing)";
  std::string s;
  for (const auto& r : o->reasons) s += r + ",";
  return s;
}

bool has_reason(const RowOutcome* o, const std::string& reason) {
  return o && std::find(o->reasons.begin(), o->reasons.end(), reason) != o->reasons.end();
}

bool event_with(const RunReport& r, const std::string& row, const std::string& stage, const std::string& reason) {
  for (const auto& e : r.events)
    if (e.row_id == row && e.stage == stage && e.reason && *e.reason == reason) return true;
  return false;
}

Result criterion4(SiteServer& site) {
  auto start = Clock::now();
  Result res;
  site.clear();
  RunReport r = run_e2e(e2e_config(site));
  double secs = seconds_since(start);
  auto count = [&](RowStatus s) {
    return std::count_if(r.outcomes.begin(), r.outcomes.end(), [&](const RowOutcome& o) { return o.status == s; });
  };
  require(res, r.outcomes.size() == 12, "expected 12 rows, got " + std::to_string(r.outcomes.size()));
  require(res, count(RowStatus::kAccept) == 6, "ACCEPT " + std::to_string(count(RowStatus::kAccept)));
  require(res, count(RowStatus::kRemediated) == 2, "REMEDIATED " + std::to_string(count(RowStatus::kRemediated)));
  require(res, count(RowStatus::kDiscovered) == 1, "DISCOVERED " + std::to_string(count(RowStatus::kDiscovered)));
  require(res, count(RowStatus::kReject) == 3, "REJECT " + std::to_string(count(RowStatus::kReject)));
  require(res, has_reason(outcome(r, "r09"), "NOT_RELEVANT"), "r09 reasons " + reasons_of(outcome(r, "r09")));
  require(res, !fetched(r, "http://reliefnews.test/entertainment/star-wedding"), "r09 page was fetched");
  require(res, has_reason(outcome(r, "r10"), "NO_MEANINGFUL_CONTENT"), "r10 reasons " + reasons_of(outcome(r, "r10")));
  require(res, has_reason(outcome(r, "r11"), "UNRELIABLE_SOURCE"), "r11 reasons " + reasons_of(outcome(r, "r11")));
  require(res, event_with(r, "r07", "REMEDIATION_ANALYST", "DIRECT_REPLACEMENT"), "r07 not a direct replacement");
  require(res, event_with(r, "r08", "REMEDIATION_ANALYST", "CALCULATION"), "r08 not a calculation");
  require(res, event_with(r, "r08", "FACT_LOOKUP", "population = 4000000 from http://stats.test/nord-ouest"),
          "r08 lookup missing");
  std::string expected = slurp(fixture("e2e/expected_output.csv"));
  require(res, r.output_csv() == expected, "final CSV differs from expected:\n" + r.output_csv());
  // Zero egress: every network request landed on the fixture server.
  require(res, site.requests().size() == r.totals.network_requests,
          "server saw " + std::to_string(site.requests().size()) + " requests, run made " +
              std::to_string(r.totals.network_requests));
  for (const auto& f : r.fetches) require(res, f.http_status != 0, "fetch of " + f.url + " left the machine or failed");
  require(res, secs < 10.0, "took " + fixed(secs) + "s");
  if (res.pass)
    res.detail = "6 ACCEPT, 2 REMEDIATED, 1 DISCOVERED, 3 REJECT; CSV byte-identical; " +
                 std::to_string(r.totals.network_requests) + " requests all local; " + fixed(secs) + "s";
  return res;
}

Result criterion5(SiteServer& site) {
  Result res;
  RunReport a = run_e2e(e2e_config(site, 1));
  RunReport b = run_e2e(e2e_config(site, 8));
  auto statuses = [](const RunReport& r) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& o : r.outcomes) out.emplace_back(o.row_id, std::string(to_string(o.status)));
    return out;
  };
  require(res, a.final_records == b.final_records, "final records differ");
  require(res, statuses(a) == statuses(b), "terminal statuses differ");
  require(res, a.totals.cost == b.totals.cost, "cost differs: " + a.totals.cost.to_plain() + " vs " + b.totals.cost.to_plain());
  require(res, !a.totals.cost.is_zero(), "cost is zero; the fixture pricing was not applied");
  require(res, canonical_transcript(a) == canonical_transcript(b), "canonical transcripts differ");
  if (res.pass) res.detail = "identical records, statuses, transcripts; cost $" + a.totals.cost.to_plain() + " at 1 and 8 workers";
  return res;
}

Result criterion6(SiteServer& site) {
  Result res;
  GroundTruth gt;
  RunConfig base = e2e_config(site);
  RunReport full = run_e2e(base);
  gt = load_ground_truth(slurp(fixture("e2e/ground_truth.csv")), full.schema);
  Metrics mf = score(full.final_records, gt, full.schema);

  RunReport norem = run_e2e(apply_preset(base, "no-remediation"));
  Metrics mn = score(norem.final_records, gt, norem.schema);
  std::set<std::string> full_ids, norem_ids;
  for (const auto& d : full.final_records) full_ids.insert(d.row_id);
  for (const auto& d : norem.final_records) norem_ids.insert(d.row_id);
  std::set<std::string> lost;
  std::set_difference(full_ids.begin(), full_ids.end(), norem_ids.begin(), norem_ids.end(), std::inserter(lost, lost.end()));
  std::set<std::string> gained;
  std::set_difference(norem_ids.begin(), norem_ids.end(), full_ids.begin(), full_ids.end(), std::inserter(gained, gained.end()));
  require(res, lost == std::set<std::string>{"r07", "r08"} && gained.empty(), "No Remediation did not lose exactly r07, r08");
  require(res, mn.recall < mf.recall, "recall did not drop");
  require(res, mn.precision && mf.precision && *mn.precision >= *mf.precision, "precision decreased");

  RunReport norel = run_e2e(apply_preset(base, "no-relevancy"));
  Metrics ml = score(norel.final_records, gt, norel.schema);
  require(res, fetched(norel, "http://reliefnews.test/entertainment/star-wedding"), "r09 page not fetched without relevancy");
  require(res, !fetched(full, "http://reliefnews.test/entertainment/star-wedding"), "r09 page fetched in the full run");
  require(res, ml.precision && mf.precision && *ml.precision < *mf.precision, "No Relevancy did not lower precision");
  if (res.pass)
    res.detail = "full P/R " + mf.precision->to_fixed(1) + "/" + mf.recall.to_fixed(1) + "; No Remediation " +
                 mn.precision->to_fixed(1) + "/" + mn.recall.to_fixed(1) + " (lost r07, r08); No Relevancy P " +
                 ml.precision->to_fixed(1) + " with r09 fetched";
  return res;
}

Result criterion8(SiteServer& site) {
  Result res;
  RunConfig base = e2e_config(site);
  RunReport mono = run_e2e(apply_preset(base, "monolith"));
  std::size_t rows = 11;
  require(res, calls_of(mono, AgentKind::kMonolith) == rows, "MONOLITH calls " + std::to_string(calls_of(mono, AgentKind::kMonolith)));
  require(res, mono.ledger.size() == rows, "MONOLITH mode made other calls: " + std::to_string(mono.ledger.size()));
  std::map<std::string, int> per_row;
  for (const auto& e : mono.ledger) ++per_row[e.key];
  for (const auto& [row, n] : per_row) require(res, n == 1, row + " got " + std::to_string(n) + " calls");

  site.clear();
  RunReport rules = run_e2e(apply_preset(base, "rules"));
  require(res, rules.ledger.empty(), "RULES mode made model calls");
  require(res, rules.fetches.empty() && site.requests().empty(), "RULES mode fetched pages");
  if (res.pass)
    res.detail = "MONOLITH " + std::to_string(mono.ledger.size()) + " calls for " + std::to_string(rows) +
                 " rows; RULES 0 calls, 0 fetches";
  return res;
}

// ---------------------------------------------------------------------------
// 7. Formatter properties over fuzzed records

const char* kMonths[] = {"January", "February", "March",     "April",   "May",      "June",
                         "July",    "August",   "September", "October", "November", "December"};

Result criterion7() {
  auto start = Clock::now();
  Result res;
  std::mt19937_64 rng(7);
  auto uni = [&](long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); };
  auto pad = [](long long v, int w) {
    std::string s = std::to_string(v);
    return std::string(static_cast<std::size_t>(std::max<int>(0, w - static_cast<int>(s.size()))), '0') + s;
  };
  auto group = [](std::string digits) {
    std::string out;
    int n = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
      if (n && n % 3 == 0) out.insert(out.begin(), ',');
      out.insert(out.begin(), *it);
      ++n;
    }
    return out;
  };
  auto spaces = [&]() { return std::string(static_cast<std::size_t>(uni(0, 2)), ' '); };
  const std::string text_alphabet[] = {"a", "B", " ", ",", "\"", "|", "\\", "é", "ü", "-", "7", "\n", "'"};

  std::size_t failures = 0;
  auto fail = [&](const std::string& what) {
    if (failures++ < 3) require(res, false, what);
    else res.pass = false;
  };

  for (int i = 0; i < 10000; ++i) {
    // Random schema with one field of each type in random order.
    std::vector<FieldSpec> fields{{"label", FieldType::kText, true},
                                  {"count", FieldType::kInteger, true},
                                  {"amount", FieldType::kFloat, true},
                                  {"when", FieldType::kDate, true}};
    std::shuffle(fields.begin(), fields.end(), rng);
    SchemaSpec schema{fields, "fuzz"};

    DataPoint raw;
    raw.row_id = "f" + std::to_string(i);
    raw.source_url = "http://example.test/" + std::to_string(i);
    // TEXT
    std::string t;
    for (long long k = uni(1, 12); k > 0; --k) t += text_alphabet[uni(0, 12)];
    if (detail::trim(t).empty()) t += "x";
    raw.values["label"] = spaces() + t + spaces();
    // INTEGER
    long long iv = uni(-5000000000LL, 5000000000LL);
    std::string digits = std::to_string(iv < 0 ? -iv : iv);
    std::string int_raw = (iv < 0 ? "-" : (uni(0, 3) == 0 ? "+" : "")) + (uni(0, 1) ? group(digits) : digits);
    raw.values["count"] = spaces() + int_raw + spaces();
    // FLOAT: exact value mantissa / 10^scale
    long long mant = uni(-99999999999LL, 99999999999LL);
    int scale = static_cast<int>(uni(0, 8));
    std::string md = std::to_string(mant < 0 ? -mant : mant);
    if (static_cast<int>(md.size()) <= scale) md.insert(0, static_cast<std::size_t>(scale + 1 - static_cast<int>(md.size())), '0');
    std::string ip = md.substr(0, md.size() - static_cast<std::size_t>(scale)), fp = md.substr(md.size() - static_cast<std::size_t>(scale));
    std::string float_raw = (mant < 0 ? "-" : "") + (uni(0, 1) ? group(ip) : ip) + (scale ? "." + fp + std::string(static_cast<std::size_t>(uni(0, 2)), '0') : "");
    Decimal float_exact = Decimal(mant) / Decimal(Decimal::Rational(boost::multiprecision::pow(Decimal::Integer(10), static_cast<unsigned>(scale))));
    raw.values["amount"] = spaces() + float_raw + spaces();
    // DATE at a random precision and spelling
    long long y = uni(1000, 2999), m = uni(1, 12);
    long long d = uni(1, detail::days_in_month(static_cast<int>(y), static_cast<int>(m)));
    int prec = static_cast<int>(uni(0, 2));
    std::string date_raw, date_canonical;
    if (prec == 0) {
      date_raw = std::to_string(y);
      date_canonical = date_raw;
    } else if (prec == 1) {
      date_canonical = std::to_string(y) + "-" + pad(m, 2);
      date_raw = uni(0, 1) ? date_canonical : std::string(kMonths[m - 1]) + " " + std::to_string(y);
    } else {
      date_canonical = std::to_string(y) + "-" + pad(m, 2) + "-" + pad(d, 2);
      switch (uni(0, 3)) {
        case 0: date_raw = date_canonical; break;
        case 1: date_raw = std::string(kMonths[m - 1]) + " " + std::to_string(d) + ", " + std::to_string(y); break;
        case 2: date_raw = std::to_string(d) + " " + std::string(kMonths[m - 1]).substr(0, 3) + " " + std::to_string(y); break;
        default:
          if (m == d || m > 12 || d > 12) date_raw = pad(m, 2) + "/" + pad(d, 2) + "/" + std::to_string(y);
          else date_raw = date_canonical;
      }
    }
    raw.values["when"] = spaces() + date_raw;

    DataPoint once;
    try {
      once = coerce_record(raw, schema);
    } catch (const std::exception& e) {
      fail("record " + raw.row_id + " failed to coerce: " + e.what());
      continue;
    }
    // Idempotence.
    if (coerce_record(once, schema) != once) fail("coercion not idempotent for " + raw.row_id);
    // Value oracles.
    if (once.value("count") != std::to_string(iv)) fail("integer " + int_raw + " -> " + once.value("count"));
    auto parsed_amount = Decimal::parse(once.value("amount"));
    if (!parsed_amount || *parsed_amount != float_exact) fail("float " + float_raw + " -> " + once.value("amount"));
    if (once.value("label") != std::string(detail::trim(raw.values["label"]))) fail("text changed beyond trimming");
    // Date precision preservation.
    auto dv = normalize_date(once.value("when"));
    if (once.value("when") != date_canonical || static_cast<int>(dv.precision) != prec)
      fail("date " + date_raw + " -> " + once.value("when") + " (expected " + date_canonical + ")");
    // Schema round trip through JSON and through the annotation grammar.
    if (schema_from_json(json::parse(to_json(schema).dump())) != schema) fail("schema JSON round trip");
    std::string annotation;
    for (const auto& f : schema.fields) {
      std::string ty = f.type == FieldType::kInteger ? "int" : f.type == FieldType::kFloat ? "float" : f.type == FieldType::kDate ? "date" : "text";
      annotation += (annotation.empty() ? "" : ", ") + f.name + ":" + ty;
    }
    SchemaSpec reparsed = generate_schema(annotation, {}, "fuzz");
    if (reparsed.fields != schema.fields) fail("annotation round trip: " + annotation);
    // Record round trip through the output CSV.
    auto back = load_output_records(format_records_csv({once}, schema, {}), schema);
    if (back.size() != 1 || back[0].values != once.values || back[0].row_id != once.row_id)
      fail("CSV round trip for " + raw.row_id);
  }
  double secs = seconds_since(start);
  require(res, secs < 30.0, "took " + fixed(secs) + "s");
  if (res.pass) res.detail = "10000 fuzzed records: idempotent, values and date precision preserved, schema and CSV round trips exact; " + fixed(secs) + "s";
  else if (failures > 3) res.detail += "; " + std::to_string(failures) + " failures in total";
  return res;
}

}  // namespace

int main() {
  std::unique_ptr<SiteServer> site;
  try {
    site = std::make_unique<SiteServer>(fixture("e2e/site"));
  } catch (const std::exception& e) {
    std::cout << "FAIL setup: " << e.what() << "\n";
    return 1;
  }
  std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"1 metric arithmetic vs reference triples", criterion1},
      {"2 arbiter truth table", criterion2},
      {"3 dedup oracle equivalence", criterion3},
      {"4 end-to-end scripted fixture", [&] { return criterion4(*site); }},
      {"5 parallelism invariance", [&] { return criterion5(*site); }},
      {"6 ablation mechanics", [&] { return criterion6(*site); }},
      {"7 formatter properties", criterion7},
      {"8 harness baselines", [&] { return criterion8(*site); }},
  };
  int failed = 0;
  for (auto& [name, fn] : criteria) {
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << name << ": " << r.detail << "\n" << std::flush;
    failed += !r.pass;
  }
  return failed ? 1 : 0;
}
