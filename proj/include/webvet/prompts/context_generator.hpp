#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kContextGeneratorVersion = "context_generator/v1";

inline constexpr std::string_view kContextGenerator = R"(You are preparing the operating context for a team of data validators.

Dataset purpose: {{description}}

Schema fields:
{{fields}}

Below are sample rows taken from the dataset. Generalize from them.
{{samples}}

For EVERY schema field, describe:
1. entity_description: the expected entity type and its granularity
   (for example, a "state" field holds geographic regions at the U.S. state level).
2. temporal_description: the temporal context of the field, if any
   (for example, the date an event occurred), otherwise null.
3. negative_examples: values that look plausible but must be rejected
   (for example, a city name extracted into a state field). Use more
   examples for ambiguous free-text fields and fewer for well-defined ones,
   between 1 and 8.

Then write at least two fallacy_examples: short scenarios in which a careless
validator would wrongly accept or reject a row for this dataset, each with an
explanation of why the reasoning is wrong.

Reply with one ```json fenced block:
{"fields": {"<field>": {"entity_description": "...", "temporal_description": "..." or null,
 "negative_examples": ["..."]}}, "fallacy_examples": [{"scenario": "...", "why_wrong": "..."}]}
)";

}  // namespace webvet::prompts
