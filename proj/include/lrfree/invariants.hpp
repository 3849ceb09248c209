#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lrfree/optimizers.hpp"

namespace lrfree {

struct InvariantCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct InvariantReport {
    std::string suite;
    std::vector<InvariantCheck> checks;

    bool passed() const;
    void add(std::string name, bool ok, std::string detail = {});
};

/// Suite ids accepted by check_invariants.
std::vector<std::string> invariant_suites();

/// Runs one named suite; "all" runs every suite and concatenates the checks.
/// Unknown ids throw UsageError.
InvariantReport check_invariants(std::string_view suite);

/// Signature shared by ps_sps_step and naive_scaled_sps_step.
using ScaledSpsStep = std::function<StepResult(const ParamVec& w, const ParamVec& g, double f_val,
                                               const SpsState& state, const ParamVec& alpha)>;

/// Checks that `step` with a time-constant alpha traces the same iterates as
/// plain SPS on the reparametrized objective f(w' o alpha^-1), mapped back.
/// Passes for ps_sps_step; fails for naive_scaled_sps_step.
InvariantReport check_scale_equivalence(const ScaledSpsStep& step);

/// Bound on the error of ||(w - w*) o alpha||^2 caused by w and w* only being
/// representable to a few ulps. Distances below this are noise.
double distance_rounding_bound(const ParamVec& w, const ParamVec& w_star, const ParamVec& alpha);

void print_report(std::ostream& os, const InvariantReport& report);

}  // namespace lrfree
