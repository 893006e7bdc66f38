#ifndef RBFFD_TUNER_HPP
#define RBFFD_TUNER_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rbffd/spectral.hpp"

namespace rbffd {

struct TunerConfig {
    double c_init = 0.3;        // centre of the c in [0.1, 1] prior
    double sweep_factor = 10.0;
    int max_sweep = 8;
    double bisect_tol = 0.05;   // relative tolerance on c
    int max_bisect = 60;
    int num_eigs = 40;
    EigMethod method = EigMethod::Auto;
    ArnoldiOptions arnoldi = {};

    void validate() const;
};

enum class TuneStatus { Ok, AlreadyStable, NoStableC };

const char* to_string(TuneStatus s);

struct TuneEvaluation {
    double c = 0.0;
    double rho = 0.0;
    bool converged = false;
    char phase = 's'; // 's' sweep, 'b' bisect
};

struct TuneResult {
    TuneStatus status = TuneStatus::NoStableC;
    double c_opt = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    std::vector<TuneEvaluation> evaluations;
};

struct BracketResult {
    TuneStatus status = TuneStatus::NoStableC;
    double c_lo = 0.0;
    double c_hi = 0.0;
    std::vector<TuneEvaluation> evaluations;
};

/// Maps a hyperviscosity constant c to the evolution map it induces.
using EvolutionBuilder = std::function<EvolutionMap(double)>;
/// Maps c to a stability report; a non-converged report counts as unstable.
using RhoEvaluator = std::function<StabilityReport(double)>;

/// Coarse sweep: multiply/divide c_init by sweep_factor until the bracket
/// rho(c_lo) > 1 >= rho(c_hi) is found, anchored at the first stable crossing
/// in ascending c. rho(0) <= 1 short-circuits to AlreadyStable.
BracketResult bracket(const RhoEvaluator& rho, const TunerConfig& cfg);
BracketResult bracket(const EvolutionBuilder& builder, const TunerConfig& cfg);

/// c_opt = smallest stable c: bracket, then bisection on log10(c) until
/// c_hi/c_lo <= 1 + bisect_tol. Returns the stable side c_hi.
TuneResult find_c_opt(const RhoEvaluator& rho, const TunerConfig& cfg);
TuneResult find_c_opt(const EvolutionBuilder& builder, const TunerConfig& cfg);

/// True when c_opt is due for re-computation at this step (every chi steps,
/// starting at step 0).
bool retune_schedule(long step_index, int chi);

/// CSV with header `c,rho,phase`.
void write_tune_trace_csv(std::ostream& os, const TuneResult& result);

} // namespace rbffd

#endif
