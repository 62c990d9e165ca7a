#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kRelevancyVersion = "relevancy/v1";

inline constexpr std::string_view kRelevancy = R"(Decide whether a data point is topically relevant to a dataset.
Judge only the values below against the dataset description. Do not speculate
about whether the values are true; a later stage checks the source.

{{context}}

Data point:
{{record}}

Reply with one ```json fenced block: {{shape}}
Set "reason" to a short explanation; it is required when is_relevant is false.
)";

}  // namespace webvet::prompts
