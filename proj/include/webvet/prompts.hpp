#pragma once

// Versioned prompt templates, one per agent kind. Placeholders use {{name}}.

#include "webvet/prompts/context_generator.hpp"
#include "webvet/prompts/discovery.hpp"
#include "webvet/prompts/fact_check.hpp"
#include "webvet/prompts/fact_lookup_extract.hpp"
#include "webvet/prompts/integrity.hpp"
#include "webvet/prompts/layout.hpp"
#include "webvet/prompts/monolith.hpp"
#include "webvet/prompts/relevancy.hpp"
#include "webvet/prompts/remediation_analyst.hpp"
#include "webvet/prompts/remediation_audit.hpp"
#include "webvet/prompts/source_scrutiny.hpp"
