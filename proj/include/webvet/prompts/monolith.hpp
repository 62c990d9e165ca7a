#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kMonolithVersion = "monolith/v1";

inline constexpr std::string_view kMonolith = R"(You are cleaning a web-sourced dataset. In one pass, decide whether the data
point below is relevant to the dataset, supported by its source page, from a
reliable source, and correctly formatted. If it is wrong but the page states
the correct values, correct them.

Dataset purpose: {{description}}

## Schema
{{schema}}

## Data point
{{record}}

## Source page ({{url}})
<<<
{{page}}
>>>

Set "verdict" to ACCEPT or REJECT. Put any corrected values in "corrected" as
{"field": "value"} (empty when nothing changes) and explain in "notes".

Reply with one ```json fenced block: {{shape}}
)";

}  // namespace webvet::prompts
