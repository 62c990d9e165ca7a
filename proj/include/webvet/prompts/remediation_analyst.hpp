#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kRemediationAnalystVersion = "remediation_analyst/v1";

inline constexpr std::string_view kRemediationAnalyst = R"(A data point was rejected by the validators. Decide whether it can be
corrected from its source text and, if so, produce a remediation plan.

## Rejected data point
{{record}}

## Why it was rejected
{{reasons}}
Validator notes: {{notes}}

## Schema
{{schema}}

{{context}}## Source page ({{url}})
<<<
{{page}}
>>>

Two strategies are available:
- DIRECT_REPLACEMENT: the correct values are stated explicitly in the source
  text. Put them in "replacements" as {"field": "new value"}; "lookups" must be
  empty.
- CALCULATION: a single numeric field must be computed from figures in the
  text plus external facts (for example, applying a percentage in the text to
  a state's total population). Give "formula" using + - * / and parentheses over
  numeric literals from the text and named operands; declare each operand in
  "lookups" as {"operand": "<name>", "query": "<web search query>"}.
  "target_fields" must list exactly the one numeric field computed.
If no correction is supported by the text, set "strategy" to "NONE".
Always give a "justification".

Reply with one ```json fenced block: {{shape}}
)";

}  // namespace webvet::prompts
