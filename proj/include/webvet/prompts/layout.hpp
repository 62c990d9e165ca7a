#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kLayoutVersion = "layout/v1";

inline constexpr std::string_view kLayout = R"(Classify the structure of a web page converted to markdown.

Allowed labels:
- ARTICLE: a news story, report or other prose document about specific subjects.
- DIRECTORY_LISTING: a list or table of many entries (events, people, places).
- SEARCH_RESULTS: a results page produced by a search query.
- HOMEPAGE: a site front page made mostly of navigation and teasers.
- ERROR_PAGE: a not-found, access-denied or otherwise broken page.
- OTHER: anything else.

URL: {{url}}

Page markdown:
<<<
{{markdown}}
>>>

Reply with one ```json fenced block: {{shape}}
"layout" must be exactly one of the labels above.
)";

}  // namespace webvet::prompts
