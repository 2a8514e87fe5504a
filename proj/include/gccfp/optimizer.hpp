#pragma once

#include "gccfp/factors.hpp"
#include "gccfp/graph.hpp"
#include "gccfp/matrix.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace gccfp {

/// Numeric guards shared by all six update rules: a tiny floor added to
/// every denominator before division, and clamping of square-root arguments
/// at zero. Well-conditioned trajectories change by less than 1e-10.
struct GuardPolicy {
    double denom_floor = 1e-12;
    bool clamp_negative_radicand = true;
};

enum class StopReason { threshold, t_max, numeric_guard };

const char* to_string(StopReason reason) noexcept;

struct IterationRecord {
    int iteration = 0; // 1-based
    ObjectiveBreakdown objective;
    double delta = 0.0; // previous total minus this total
    double wall_ms = 0.0;
};

struct FitTrace {
    ObjectiveBreakdown initial; // objective before the first sweep
    std::vector<IterationRecord> iterations;
    bool converged = false;
    StopReason stop_reason = StopReason::t_max;
    double epsilon_used = 0.0; // effective absolute threshold

    double final_total() const noexcept {
        return iterations.empty() ? initial.total : iterations.back().objective.total;
    }
};

struct FitResult {
    LatentFactors factors;
    FitTrace trace;
};

struct FitOptions {
    GuardPolicy guard;
    int checkpoint_every = 50;
    std::function<void(int, const LatentFactors&)> checkpoint;
    // called after every recorded iteration; used by tests and the trace CSV
    std::function<void(int, const LatentFactors&, const ObjectiveBreakdown&)> observer;
};

// The six update rules. Each returns the refreshed factor computed from the
// current state; the fit loop assigns results back in sequence, so later
// rules see the freshest values. Entries that are exactly zero stay zero.
Matrix update_v(const LatentFactors& f, const FitData& data, const Hyperparams& hp,
                const GuardPolicy& guard);
Matrix update_u(const LatentFactors& f, const FitData& data, const Hyperparams& hp,
                const GuardPolicy& guard);
Matrix update_p(const LatentFactors& f, const FitData& data, const Hyperparams& hp,
                const GuardPolicy& guard, int view);
Matrix update_x(const LatentFactors& f, const FitData& data, const Hyperparams& hp,
                const GuardPolicy& guard);
Matrix update_c(const LatentFactors& f, const Hyperparams& hp, const GuardPolicy& guard);
Matrix update_w(const LatentFactors& f, const Hyperparams& hp, const GuardPolicy& guard);

/// One full update sweep in place: V, U, then every P^i, then X, C, W.
void update_sweep(LatentFactors& f, const FitData& data, const Hyperparams& hp,
                  const GuardPolicy& guard);

/// Full fitting loop over preprocessed data: initialize factors from
/// hp.seed, sweep until the objective decrease drops to the threshold or
/// t_max is reached. A non-finite objective aborts the run and returns the
/// last finite state with stop_reason = numeric_guard.
FitResult fit(const FitData& data, const Hyperparams& hp, const FitOptions& options = {});

/// Convenience wrapper: re-weights the graph, propagates features, then fits.
FitResult fit(const MultiViewGraph& graph, const Hyperparams& hp,
              const FitOptions& options = {});

/// CSV export: iteration, total, each named term, delta, wall_ms.
/// Row 0 carries the initial objective.
void write_trace_csv(const FitTrace& trace, std::ostream& out);

} // namespace gccfp
