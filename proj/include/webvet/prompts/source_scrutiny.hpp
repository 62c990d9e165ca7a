#pragma once

#include <string_view>

namespace webvet::prompts {

inline constexpr std::string_view kSourceScrutinyVersion = "source_scrutiny/v1";

inline constexpr std::string_view kSourceScrutiny = R"(Assess how trustworthy a web source is from its address alone, using what
you know about the domain's reputation. Do not assume anything about the page
content.

URL: {{url}}
Domain: {{domain}}

Categorize the source type (for example: national news outlet, government
portal, international organization, academic publisher, local news, wiki,
personal blog, forum, content farm) and assign a reliability level from:
VERY_LOW, LOW, MEDIUM, HIGH, VERY_HIGH.

Reply with one ```json fenced block: {{shape}}
)";

}  // namespace webvet::prompts
