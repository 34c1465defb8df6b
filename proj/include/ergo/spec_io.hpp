#pragma once

#include <optional>
#include <string>

#include "ergo/functions.hpp"

namespace ergo {

// Fields the short argument forms cannot carry: expression specs need a
// domain, dynamics an initial wealth, catalog dynamics their coefficients.
// A spec's own fields always win; hints fill whatever it leaves out. rates
// supplies utility-side coefficients to catalogs parameterized by them
// (additive a/b, cramer and exp_test a_u/b_u); gbm's mu and sigma are
// wealth-side numbers and are never filled this way.
struct SpecHints {
    Interval domain{-INFINITY, INFINITY};
    double x0 = 1.0;
    std::optional<BrownianDrift> rates;
};

// JSON spec objects:
//   {"kind": "catalog", "name": ..., "params": {...}}
//   {"kind": "expr", "source": ..., "domain": [lo, hi]}
// Dynamics additionally accept "x0", and expression dynamics replace
// "source" with "drift" and "diffusion". Domain endpoints are numbers or
// the strings "-inf" / "inf". Unknown keys are rejected.
UtilityFunction parse_utility_spec(const std::string& text,
                                   const SpecHints& hints = {});
ItoProcess parse_dynamic_spec(const std::string& text,
                              const SpecHints& hints = {});

// Command-line shorthand: a catalog name, "expr:SOURCE" (for dynamics
// "expr:DRIFT;DIFFUSION"), or "@file.json".
UtilityFunction resolve_utility(const std::string& arg,
                                const SpecHints& hints = {});
ItoProcess resolve_dynamic(const std::string& arg, const SpecHints& hints = {});

}  // namespace ergo
