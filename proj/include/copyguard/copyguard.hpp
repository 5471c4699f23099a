#pragma once

// Umbrella header: the full guardrail pipeline, benchmark builder, metrics
// and evaluation harness.

#include "copyguard/builder.hpp"
#include "copyguard/domain.hpp"
#include "copyguard/gateway.hpp"
#include "copyguard/guard_pipeline.hpp"
#include "copyguard/harness.hpp"
#include "copyguard/http_providers.hpp"
#include "copyguard/metrics.hpp"
#include "copyguard/notice_identifier.hpp"
#include "copyguard/offline_stubs.hpp"
#include "copyguard/policy_config.hpp"
#include "copyguard/prompts.hpp"
#include "copyguard/providers.hpp"
#include "copyguard/risk_analyzer.hpp"
#include "copyguard/status_verifier.hpp"
#include "copyguard/stubs.hpp"
