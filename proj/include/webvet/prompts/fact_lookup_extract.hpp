#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kFactLookupExtractVersion = "fact_lookup_extract/v1";

inline constexpr std::string_view kFactLookupExtract = R"(Extract one numeric fact from a web page.

Needed value "{{operand}}", searched for as: {{query}}

Page ({{url}}):
<<<
{{page}}
>>>

If the page states the value, set found to true, give it in "value" as a plain
number without units, and copy the sentence stating it into "excerpt".
Otherwise set found to false.

Reply with one ```json fenced block: {{shape}}
)";

}  // namespace webvet::prompts
