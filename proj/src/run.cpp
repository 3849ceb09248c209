#include "lrfree/run.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrfree {

Trajectory run(Optimizer& optimizer, const Objective& objective, std::size_t steps,
               const Schedule& schedule, Rng& rng, const RunOptions& options) {
    Trajectory out;
    ParamVec w = options.w0 ? *options.w0 : objective.initial_point();
    if (w.size() != objective.dim()) throw UsageError("run: initial point has wrong dimension");
    const bool minibatch = options.batch_size > 0 && objective.num_samples() > 0;

    std::vector<std::size_t> batch(minibatch ? options.batch_size : 0);
    out.records.reserve(steps);
    if (options.keep_iterates) out.iterates.push_back(w);
    out.min_loss = std::numeric_limits<double>::infinity();

    for (std::size_t k = 0; k < steps; ++k) {
        const double loss = objective.value(w);
        if (!std::isfinite(loss)) {
            out.failure = "non-finite loss at step " + std::to_string(k);
            break;
        }
        out.min_loss = std::min(out.min_loss, loss);

        double f_val = loss;
        ParamVec g;
        if (minibatch) {
            for (auto& i : batch) i = rng.below(objective.num_samples());
            f_val = objective.batch_value(w, batch);
            g = objective.batch_gradient(w, batch);
        } else {
            g = objective.gradient(w);
        }

        StepResult step = optimizer.step(w, g, f_val, gamma(schedule, k));
        const StepReport& rep = step.report;
        TraceRecord rec{k, loss, rep.eta, rep.d, norm2(g), rep.alpha_min, rep.alpha_max};
        out.records.push_back(rec);

        if (!all_finite(step.w) || !std::isfinite(rep.eta) || (rep.d && !std::isfinite(*rep.d))) {
            out.failure = "non-finite state after step " + std::to_string(k);
            break;
        }
        w = std::move(step.w);
        if (options.keep_iterates) out.iterates.push_back(w);
    }

    out.final_w = w;
    out.final_loss = out.failure ? std::numeric_limits<double>::quiet_NaN() : objective.value(w);
    if (!out.failure && !std::isfinite(out.final_loss))
        out.failure = "non-finite loss at step " + std::to_string(steps);
    if (!out.failure) out.min_loss = std::min(out.min_loss, out.final_loss);
    return out;
}

}  // namespace lrfree
