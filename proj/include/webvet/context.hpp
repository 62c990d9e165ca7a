#pragma once

// Initialization phase: derives per-field semantics, negative examples and
// fallacy illustrations from a seeded sample of rows, then renders them into
// the prompt fragments each downstream agent receives.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "webvet/gateway.hpp"
#include "webvet/prompts.hpp"
#include "webvet/schema.hpp"

namespace webvet {

inline constexpr std::size_t kContextSampleSize = 10;
inline constexpr std::size_t kMinNegativeExamples = 1;
inline constexpr std::size_t kMaxNegativeExamples = 8;

struct FieldContext {
  std::string field;
  std::string entity_description;
  std::string temporal_description;  // empty when the field has no temporal aspect
  std::vector<std::string> negative_examples;
};

struct FallacyExample {
  std::string scenario;
  std::string why_wrong;
};

struct OperationalContext {
  std::vector<std::string> field_order;
  std::map<std::string, FieldContext> per_field;
  std::vector<FallacyExample> fallacy_examples;
  std::vector<std::string> sample_row_ids;
  std::uint64_t rng_seed = 0;
  std::string dataset_description;
};

/// Uniform draw in [0, bound) by rejection; independent of the standard
/// library's distribution implementation so samples agree across platforms.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

/// min(k, n) distinct indices in [0, n), uniformly without replacement.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    auto j = i + static_cast<std::size_t>(bounded_draw(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

inline const ResponseShape& context_response_shape() {
  static const ResponseShape shape{{"fields", ValueKind::kObject}, {"fallacy_examples", ValueKind::kList}};
  return shape;
}

/// Parses a CONTEXT_GENERATOR response. Throws ContextError naming the first
/// schema field the response does not describe.
inline OperationalContext parse_context_response(const json& response, const SchemaSpec& schema) {
  OperationalContext ctx;
  ctx.dataset_description = schema.dataset_description;
  const json& fields = response.at("fields");
  for (const auto& f : schema.fields) {
    auto it = fields.find(f.name);
    if (it == fields.end() || !it->is_object()) throw ContextError(f.name);
    FieldContext fc;
    fc.field = f.name;
    auto entity = it->find("entity_description");
    if (entity == it->end() || !entity->is_string() || text::trim(entity->get<std::string>()).empty())
      throw ContextError(f.name);
    fc.entity_description = entity->get<std::string>();
    if (auto t = it->find("temporal_description"); t != it->end() && t->is_string())
      fc.temporal_description = t->get<std::string>();
    if (auto neg = it->find("negative_examples"); neg != it->end() && neg->is_array()) {
      for (const auto& e : *neg)
        if (e.is_string() && !text::trim(e.get<std::string>()).empty()) fc.negative_examples.push_back(e.get<std::string>());
    }
    if (fc.negative_examples.size() > kMaxNegativeExamples) fc.negative_examples.resize(kMaxNegativeExamples);
    if (fc.negative_examples.size() < kMinNegativeExamples)
      fc.negative_examples.push_back("a value of a different entity type or granularity than described above");
    ctx.field_order.push_back(f.name);
    ctx.per_field.emplace(f.name, std::move(fc));
  }
  for (const auto& e : response.at("fallacy_examples")) {
    if (!e.is_object()) continue;
    auto scenario = e.value("scenario", std::string());
    auto why = e.value("why_wrong", std::string());
    if (!scenario.empty() && !why.empty()) ctx.fallacy_examples.push_back({scenario, why});
  }
  if (ctx.fallacy_examples.size() < 2) throw ContextError("fallacy_examples");
  return ctx;
}

/// Samples min(10, |dataset|) rows with `seed`, issues one CONTEXT_GENERATOR
/// call and parses it into the frozen context for the run.
inline OperationalContext build_context(const std::vector<DataPoint>& dataset, const SchemaSpec& schema,
                                        std::uint64_t seed, Gateway& gateway,
                                        std::size_t sample_size = kContextSampleSize) {
  if (dataset.empty()) throw Error("cannot build context from an empty dataset");
  auto picks = sample_indices(dataset.size(), sample_size, seed);
  std::string samples;
  std::vector<std::string> ids;
  for (auto i : picks) {
    json row = json::object();
    for (const auto& f : schema.fields) row[f.name] = dataset[i].value(f.name);
    samples += row.dump() + "\n";
    ids.push_back(dataset[i].row_id);
  }
  if (samples.empty()) samples = "(no sample rows provided)\n";
  std::string fields;
  for (const auto& f : schema.fields) fields += "- " + f.name + " (" + std::string(to_string(f.type)) + ")\n";
  std::string prompt = text::render(prompts::kContextGenerator,
                                    {{"description", schema.dataset_description}, {"fields", fields}, {"samples", samples}});
  auto result = gateway.complete_structured(AgentKind::kContextGenerator, "context", prompt, context_response_shape());
  auto ctx = parse_context_response(result.value, schema);
  ctx.sample_row_ids = std::move(ids);
  ctx.rng_seed = seed;
  return ctx;
}

struct RenderOptions {
  bool include_examples = true;  // negative examples and fallacies
};

namespace detail {

inline std::string field_section(const FieldContext& fc, bool temporal, bool examples) {
  std::string out = "### " + fc.field + "\nExpected: " + fc.entity_description + "\n";
  if (temporal && !fc.temporal_description.empty()) out += "Temporal context: " + fc.temporal_description + "\n";
  if (examples && !fc.negative_examples.empty()) {
    out += "Do not accept:\n";
    for (const auto& n : fc.negative_examples) out += "- " + n + "\n";
  }
  return out;
}

}  // namespace detail

/// Deterministic prompt fragment for `target`. The relevancy fragment carries
/// only the description and field list; fact-checking gets everything;
/// discovery and remediation get field contexts without fallacies.
inline std::string render_context(const OperationalContext& ctx, AgentKind target, RenderOptions opts = {}) {
  std::string out = "## Dataset\nPurpose: " + ctx.dataset_description + "\n";
  if (target == AgentKind::kRelevancy) {
    out += "Fields: ";
    for (std::size_t i = 0; i < ctx.field_order.size(); ++i) out += (i ? ", " : "") + ctx.field_order[i];
    return out + "\n\n";
  }
  bool fact_check = target == AgentKind::kFactCheck;
  bool examples = opts.include_examples && target != AgentKind::kIntegrity;
  out += "\n## Field rules\n";
  for (const auto& name : ctx.field_order)
    if (auto it = ctx.per_field.find(name); it != ctx.per_field.end()) out += detail::field_section(it->second, fact_check, examples);
  if (fact_check && opts.include_examples && !ctx.fallacy_examples.empty()) {
    out += "\n## Reasoning fallacies to avoid\n";
    for (std::size_t i = 0; i < ctx.fallacy_examples.size(); ++i) {
      out += std::to_string(i + 1) + ". Scenario: " + ctx.fallacy_examples[i].scenario + "\n   Why it is wrong: " +
             ctx.fallacy_examples[i].why_wrong + "\n";
    }
  }
  return out + "\n";
}

inline json to_json(const OperationalContext& ctx) {
  json j;
  j["dataset_description"] = ctx.dataset_description;
  j["rng_seed"] = ctx.rng_seed;
  j["sample_row_ids"] = ctx.sample_row_ids;
  j["fields"] = json::array();
  for (const auto& name : ctx.field_order) {
    auto it = ctx.per_field.find(name);
    if (it == ctx.per_field.end()) continue;
    const auto& fc = it->second;
    j["fields"].push_back({{"field", fc.field},
                           {"entity_description", fc.entity_description},
                           {"temporal_description", fc.temporal_description},
                           {"negative_examples", fc.negative_examples}});
  }
  j["fallacy_examples"] = json::array();
  for (const auto& f : ctx.fallacy_examples) j["fallacy_examples"].push_back({{"scenario", f.scenario}, {"why_wrong", f.why_wrong}});
  return j;
}

}  // namespace webvet
