#pragma once

#include <atomic>
#include <functional>
#include <thread>

#include <json.hpp>

#include "padiclab/stability.hpp"

namespace padiclab {

/// One perturbation trial as recorded in trials.jsonl.
struct TrialRecord {
    unsigned index = 0;
    std::uint64_t seed1 = 0;
    std::uint64_t seed2 = 0;  // pairwise only
    bool pairwise = false;
    std::vector<StabilityVerdict> verdicts;  // in spec topological order
    std::optional<TrialAbort> abort;
};

struct NodeSummary {
    NodeId node;
    unsigned trials = 0;
    unsigned violations = 0;
    unsigned borderlines = 0;
    unsigned noclaims = 0;
    std::optional<long> min_margin;  // over finite margins
    unsigned aborts = 0;
};

struct CampaignReport {
    std::vector<TrialRecord> trials;
    std::vector<NodeSummary> summary;
    unsigned violations = 0;
    unsigned aborted_trials = 0;
};

namespace detail {

inline GremlinConfig with_seed(const GremlinConfig& base, std::uint64_t seed) {
    GremlinConfig c = base;
    c.seed = seed;
    return c;
}

inline void tally(CampaignReport& report, const RecurrenceSpec& spec,
                  const TrialRecord& t) {
    for (const StabilityVerdict& v : t.verdicts) {
        NodeSummary& s = report.summary[spec.index_of(v.node)];
        ++s.trials;
        switch (v.cls) {
            case StabilityVerdict::Violation:
                ++s.violations;
                ++report.violations;
                break;
            case StabilityVerdict::Borderline: ++s.borderlines; break;
            case StabilityVerdict::NoClaim: ++s.noclaims; break;
            default: break;
        }
        if (!v.margin.is_infinity() && v.cls != StabilityVerdict::NoClaim &&
            (!s.min_margin || v.margin.finite() < *s.min_margin))
            s.min_margin = v.margin.finite();
    }
    if (t.abort) {
        ++report.summary[t.abort->node].aborts;
        ++report.aborted_trials;
    }
}

}  // namespace detail

/// One trial: solo (perturbation against the exact solution) when g is
/// given, pairwise otherwise. Deterministic in (base config, index).
inline TrialRecord run_trial(const RecurrenceSpec& spec, const GremlinConfig& base,
                             const std::map<NodeId, Rational>* g, bool pairwise,
                             unsigned index,
                             const StarAssignment* override_stars = nullptr) {
    TrialRecord t;
    t.index = index;
    t.pairwise = pairwise;
    t.seed1 = mix_keys({base.seed, index, 1});
    if (!pairwise) {
        GremlinConfig cfg = detail::with_seed(base, t.seed1);
        PerturbationResult res = run_perturbation(spec, cfg, override_stars);
        t.abort = res.abort;
        if (!g) throw DomainError("solo trial requires the exact solution");
        t.verdicts = check_stability(spec, *g, res, cfg);
    } else {
        t.seed2 = mix_keys({base.seed, index, 2});
        GremlinConfig c1 = detail::with_seed(base, t.seed1);
        GremlinConfig c2 = detail::with_seed(base, t.seed2);
        PerturbationResult r1 = run_perturbation(spec, c1, override_stars);
        PerturbationResult r2 = run_perturbation(spec, c2);
        if (r1.abort)
            t.abort = r1.abort;
        else if (r2.abort)
            t.abort = r2.abort;
        t.verdicts = check_pairwise(spec, g, r1, r2, c1);
    }
    return t;
}

/// Runs `trials` independent perturbations, optionally across threads.
/// Per-trial randomness depends only on (seed, trial index), so the
/// report is identical for any job count.
inline CampaignReport run_campaign(const RecurrenceSpec& spec, const GremlinConfig& base,
                                   const std::map<NodeId, Rational>* g, bool pairwise,
                                   unsigned trials, unsigned jobs = 1,
                                   const StarAssignment* fixture = nullptr) {
    if (trials == 0 && !fixture) throw DomainError("campaign: trials must be positive");
    CampaignReport report;
    for (const NodeDef& d : spec.nodes()) report.summary.push_back({d.id});

    // Trial index 0 replays the fixture when one is supplied; random
    // trials are numbered behind it.
    std::vector<std::function<TrialRecord()>> work;
    if (fixture)
        work.push_back([&] { return run_trial(spec, base, g, pairwise, 0, fixture); });
    for (unsigned i = 0; i < trials; ++i) {
        unsigned idx = i + (fixture ? 1 : 0);
        work.push_back([&, idx] { return run_trial(spec, base, g, pairwise, idx); });
    }

    std::vector<TrialRecord> records(work.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < work.size(); ++i) records[i] = work[i]();
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < work.size(); i = next++) records[i] = work[i]();
        };
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (TrialRecord& t : records) {
        detail::tally(report, spec, t);
        report.trials.push_back(std::move(t));
    }
    return report;
}

/// The concluding regimen: pairs of independent perturbations compared
/// against each other.
inline CampaignReport pairwise_regimen(const RecurrenceSpec& spec, const GremlinConfig& cfg,
                                       unsigned trials,
                                       const std::map<NodeId, Rational>* g = nullptr,
                                       unsigned jobs = 1) {
    return run_campaign(spec, cfg, g, /*pairwise=*/true, trials, jobs);
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json verdict_json(const StabilityVerdict& v) {
    nlohmann::json j{{"node", v.node.str()},
                     {"r", v.r},
                     {"vg", v.v_g.is_infinity() ? nlohmann::json("inf")
                                                : nlohmann::json(v.v_g.finite())},
                     {"predicted", v.predicted},
                     {"actual", v.actual.is_infinity() ? nlohmann::json("inf")
                                                       : nlohmann::json(v.actual.finite())},
                     {"margin", v.margin.is_infinity() ? nlohmann::json("inf")
                                                       : nlohmann::json(v.margin.finite())},
                     {"class", StabilityVerdict::class_name(v.cls)}};
    if (v.proxy_correction) j["proxy"] = true;
    if (v.representation_limited) j["representation_limited"] = true;
    return j;
}

inline nlohmann::json trial_json(const TrialRecord& t) {
    nlohmann::json j{{"trial", t.index},
                     {"seed", t.seed1},
                     {"pairwise", t.pairwise}};
    if (t.pairwise) j["seed2"] = t.seed2;
    j["nodes"] = nlohmann::json::array();
    for (const StabilityVerdict& v : t.verdicts) j["nodes"].push_back(verdict_json(v));
    j["abort"] = t.abort ? nlohmann::json(t.abort->reason) : nlohmann::json(nullptr);
    return j;
}

/// One JSON object per trial per line.
inline std::string trials_jsonl(const CampaignReport& report) {
    std::string out;
    for (const TrialRecord& t : report.trials) {
        out += trial_json(t).dump();
        out += '\n';
    }
    return out;
}

inline std::string summary_csv(const CampaignReport& report) {
    std::string out = "node,trials,violations,borderlines,no-claims,min-margin,aborts\n";
    for (const NodeSummary& s : report.summary) {
        out += s.node.str() + "," + std::to_string(s.trials) + "," +
               std::to_string(s.violations) + "," + std::to_string(s.borderlines) + "," +
               std::to_string(s.noclaims) + "," +
               (s.min_margin ? std::to_string(*s.min_margin) : "inf") + "," +
               std::to_string(s.aborts) + "\n";
    }
    return out;
}

}  // namespace padiclab
