#include "rbffd/tuner.hpp"

#include <cmath>
#include <ostream>

#include "rbffd/csv.hpp"

namespace rbffd {

namespace {

RhoEvaluator wrap_builder(const EvolutionBuilder& builder, const TunerConfig& cfg) {
    return [&builder, cfg](double c) {
        EvolutionMap map = builder(c);
        return spectral_radius(map, cfg.num_eigs, cfg.method, cfg.arnoldi);
    };
}

struct Probe {
    TuneEvaluation eval;
    bool stable;
};

Probe probe_at(const RhoEvaluator& rho, double c, char phase,
               std::vector<TuneEvaluation>& log) {
    const StabilityReport report = rho(c);
    TuneEvaluation e{c, report.rho, report.converged, phase};
    log.push_back(e);
    // an unconverged estimate never certifies stability
    return {e, report.converged && is_stable_rho(report.rho)};
}

} // namespace

void TunerConfig::validate() const {
    if (!(sweep_factor > 1.0)) throw std::invalid_argument("tuner: sweep_factor must be > 1");
    if (!(bisect_tol > 0.0) || !(bisect_tol < 1.0))
        throw std::invalid_argument("tuner: bisect_tol must lie in (0, 1)");
    if (max_sweep < 1 || max_bisect < 1)
        throw std::invalid_argument("tuner: iteration caps must be positive");
    if (!(c_init > 0.0)) throw std::invalid_argument("tuner: c_init must be positive");
    if (num_eigs < 1) throw std::invalid_argument("tuner: num_eigs must be positive");
}

const char* to_string(TuneStatus s) {
    switch (s) {
        case TuneStatus::Ok: return "ok";
        case TuneStatus::AlreadyStable: return "already-stable";
        case TuneStatus::NoStableC: return "no-stable-c";
    }
    return "?";
}

BracketResult bracket(const RhoEvaluator& rho, const TunerConfig& cfg) {
    cfg.validate();
    BracketResult out;

    if (probe_at(rho, 0.0, 's', out.evaluations).stable) {
        out.status = TuneStatus::AlreadyStable;
        return out;
    }

    Probe p = probe_at(rho, cfg.c_init, 's', out.evaluations);
    if (p.stable) {
        // walk down to certify an unstable lower bound below the first
        // stable crossing
        double hi = cfg.c_init;
        for (int t = 1; t <= cfg.max_sweep; ++t) {
            const double c = cfg.c_init / std::pow(cfg.sweep_factor, t);
            Probe q = probe_at(rho, c, 's', out.evaluations);
            if (!q.stable) {
                out.status = TuneStatus::Ok;
                out.c_lo = c;
                out.c_hi = hi;
                return out;
            }
            hi = c;
        }
        // every positive probe stable although rho(0) > 1: the crossing sits
        // below the sweep floor; report the smallest certified-stable c as a
        // degenerate bracket
        out.status = TuneStatus::Ok;
        out.c_lo = hi;
        out.c_hi = hi;
        return out;
    }

    for (int t = 1; t <= cfg.max_sweep; ++t) {
        const double c = cfg.c_init * std::pow(cfg.sweep_factor, t);
        Probe q = probe_at(rho, c, 's', out.evaluations);
        if (q.stable) {
            out.status = TuneStatus::Ok;
            out.c_lo = c / cfg.sweep_factor;
            out.c_hi = c;
            return out;
        }
    }
    out.status = TuneStatus::NoStableC;
    return out;
}

BracketResult bracket(const EvolutionBuilder& builder, const TunerConfig& cfg) {
    return bracket(wrap_builder(builder, cfg), cfg);
}

TuneResult find_c_opt(const RhoEvaluator& rho, const TunerConfig& cfg) {
    BracketResult br = bracket(rho, cfg);
    TuneResult out;
    out.status = br.status;
    out.evaluations = std::move(br.evaluations);
    if (br.status == TuneStatus::AlreadyStable) {
        out.c_opt = 0.0;
        return out;
    }
    if (br.status != TuneStatus::Ok) return out;

    double lo = br.c_lo;
    double hi = br.c_hi;
    for (int iter = 0; hi / lo > 1.0 + cfg.bisect_tol && iter < cfg.max_bisect; ++iter) {
        const double mid = std::sqrt(lo * hi);
        Probe p = probe_at(rho, mid, 'b', out.evaluations);
        (p.stable ? hi : lo) = mid;
    }
    out.c_opt = hi;
    out.bracket = {lo, hi};
    return out;
}

TuneResult find_c_opt(const EvolutionBuilder& builder, const TunerConfig& cfg) {
    return find_c_opt(wrap_builder(builder, cfg), cfg);
}

bool retune_schedule(long step_index, int chi) {
    if (chi < 1) throw std::invalid_argument("retune_schedule: chi must be >= 1");
    if (step_index < 0) throw std::invalid_argument("retune_schedule: negative step index");
    return step_index % chi == 0;
}

void write_tune_trace_csv(std::ostream& os, const TuneResult& result) {
    os << "c,rho,phase\n";
    for (const auto& e : result.evaluations) {
        os << format_double(e.c) << ',' << format_double(e.rho) << ','
           << (e.phase == 's' ? "sweep" : "bisect") << '\n';
    }
}

} // namespace rbffd
