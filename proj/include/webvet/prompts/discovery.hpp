#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kDiscoveryVersion = "discovery/v1";

inline constexpr std::string_view kDiscovery = R"(Scan a source page for data points that belong in the dataset but are not
already recorded.

Dataset purpose: {{description}}

## Schema
{{schema}}

{{context}}## Already recorded
{{known}}

## Source page ({{url}})
<<<
{{page}}
>>>

List every other, different data point on this page that matches the schema.
Every record must give a value for every schema field, taken from the page.
Do not repeat records that are already recorded. Return an empty list when
there are none.

Reply with one ```json fenced block: {{shape}}
Each element of "records" is an object keyed by schema field name.
)";

}  // namespace webvet::prompts
