#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lrfree/numerics.hpp"
#include "lrfree/objectives.hpp"
#include "lrfree/optimizers.hpp"
#include "lrfree/schedule.hpp"

namespace lrfree {

/// Observables for step k, measured at w_k before the update.
struct TraceRecord {
    std::size_t step = 0;
    double loss = 0.0;  // full-objective value f(w_k)
    double lr = 0.0;
    std::optional<double> d;
    double grad_norm = 0.0;  // norm of the gradient fed to the optimizer
    double alpha_min = 1.0;
    double alpha_max = 1.0;
};

struct RunOptions {
    /// 0 means full batch. Otherwise indices are drawn uniformly with
    /// replacement from the run's Rng.
    std::size_t batch_size = 0;
    bool keep_iterates = false;
    std::optional<ParamVec> w0;  // defaults to objective.initial_point()
};

struct Trajectory {
    std::vector<TraceRecord> records;
    std::vector<ParamVec> iterates;  // w_0 .. w_n when keep_iterates
    ParamVec final_w;
    double final_loss = 0.0;
    double min_loss = 0.0;
    /// Set when the run stopped on a non-finite loss or parameter vector;
    /// `records` then holds every step completed before the failure.
    std::optional<std::string> failure;
};

/// Iterates k = 0 .. steps-1. Deterministic given the Rng seed.
Trajectory run(Optimizer& optimizer, const Objective& objective, std::size_t steps,
               const Schedule& schedule, Rng& rng, const RunOptions& options = {});

}  // namespace lrfree
