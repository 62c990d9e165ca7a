#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kRemediationAuditVersion = "remediation_audit/v1";

inline constexpr std::string_view kRemediationAudit = R"(You audit a correction made to a rejected data point. Verify the correction
logic itself: the replaced values must be stated in the source, any percentage
or ratio must be applied to the right base, and looked-up figures must be the
ones the formula needs.

## Original data point
{{original}}

## Corrected data point
{{corrected}}

## Remediation plan
{{plan}}
Justification: {{justification}}

## Looked-up facts
{{excerpts}}

## Source page ({{url}})
<<<
{{page}}
>>>

Approve only if the corrected data point is fully supported. Give notes in
every case; they are required when you do not approve.

Reply with one ```json fenced block: {{shape}}
)";

}  // namespace webvet::prompts
