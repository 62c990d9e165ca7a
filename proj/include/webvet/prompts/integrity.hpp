#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kIntegrityVersion = "integrity/v1";

inline constexpr std::string_view kIntegrity = R"(Final quality check on a batch of records. Apply only this rule:

Plausibility: does any field contain a value that is obvious nonsense given
its description (for example, a number in a field that requires a person's
name)? Do not judge whether values are true, only whether they are plausible
for the field.

## Field descriptions
{{fields}}

## Records
{{records}}

Reply with one ```json fenced block: {{shape}}
List in "implausible" one entry {"row_id": "...", "field": "...", "explanation": "..."}
for each offending value; leave it empty when all records are plausible.
)";

}  // namespace webvet::prompts
