#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kFactCheckVersion = "fact_check/v1";

// Sections are assembled in a fixed order: data point, analysis hint,
// dataset context, audit principles, page content.
inline constexpr std::string_view kFactCheck = R"(You verify a single data point against the text of its source page.

## Data point
{{record}}

## Reading strategy
{{hint}}

{{context}}{{audit}}## Source page ({{url}})
<<<
{{page}}
>>>

Report two separate judgments:
- has_meaningful_content (content validity): does the page contain substantive
  content about the subject of this data point, rather than navigation,
  boilerplate or an error message?
- supports_claims (factual accuracy): does the page text support every value of
  the data point?
If the page states a date for the event, put it in extracted_date as
YYYY-MM-DD, YYYY-MM or YYYY (whatever precision the page gives), else null.
Explain your reasoning in notes, quoting the decisive passage.

Reply with one ```json fenced block: {{shape}}
)";

inline constexpr std::string_view kCriticalSemanticAudit = R"(## Critical Semantic Audit
Apply every principle before deciding:
1. Full entities, not fragments: a value must name the complete entity the page
   refers to. A partial name or a fragment of a longer name does not match.
2. Granularity matching: the value must be at the granularity the dataset needs.
   A city is not a state, a region is not a country, a year is not a day.
3. Qualifying terms: read qualifiers such as "suspected", "planned", "proposed",
   "alleged", "nearly", "up to" or "at least" and decide whether they change
   what the page actually asserts.
4. Meaning over keywords: match on what the text means, not on shared words. A
   page mentioning the same keywords in another context does not support the
   claim, and a paraphrase that means the same thing does.

)";

}  // namespace webvet::prompts
