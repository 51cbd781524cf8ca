#pragma once

/// Umbrella header: static analysis of MiniApp packages (markup, script,
/// routing, data flow), directed exploration against a simulated
/// runtime, and policy cross-validation.

#include "miniscope/api_catalog.hpp"
#include "miniscope/ccfg.hpp"
#include "miniscope/cli.hpp"
#include "miniscope/common.hpp"
#include "miniscope/explorer.hpp"
#include "miniscope/fuzzy.hpp"
#include "miniscope/js_ast.hpp"
#include "miniscope/mdg.hpp"
#include "miniscope/package.hpp"
#include "miniscope/policy.hpp"
#include "miniscope/practices.hpp"
#include "miniscope/routing.hpp"
#include "miniscope/runtime.hpp"
#include "miniscope/udfg.hpp"
#include "miniscope/utg.hpp"
#include "miniscope/wxml.hpp"
