#pragma once

#include "mg/merge.hpp"
#include "mg/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mg {

struct RRDelta {
    int db0 = 0;
    int dalpha = 0;
    int dsigma = 0;
    int dsigma_hat = 0;  // Δ(b0 + σ)

    bool operator==(const RRDelta& o) const {
        return db0 == o.db0 && dalpha == o.dalpha && dsigma == o.dsigma;
    }
    RRDelta operator+(const RRDelta& o) const {
        return {db0 + o.db0, dalpha + o.dalpha, dsigma + o.dsigma, dsigma_hat + o.dsigma_hat};
    }
};

std::string to_string(const RRDelta& d);

struct CostVector {
    Q ms;
    RRDelta rr_c, rr_d;
    int cl = 0;
    int deg_gap = 0;

    const RRDelta& rr(Mode m) const { return m == Mode::Contraction ? rr_c : rr_d; }
};

// 𝔟 − 𝔠(A) − 𝔠(B): whole components cost 1, a term T_v costs ℓ(T_v)/ℓ(host)
Q ms_cost(const MergeStep& step);
// deltas of the same two arguments merged under the given coproduct mode
RRDelta rr_delta(const MergeStep& step, Mode mode);
RRDelta rr_between(const Workspace& before, const Workspace& after);
// tabulated (Δb0, Δα, Δσ) for a tag; ID-SM has no row
std::optional<RRDelta> rr_table(Tag tag, Mode mode);
// composite EM after an SM of the given tag
std::optional<RRDelta> rr_composite_table(Tag sm_tag, Mode mode);
// extracted degree; 0 for EM and IM
int cl_cost(const MergeStep& step);
CostVector step_cost(const MergeStep& step);

enum class HierarchyClass { HEAD_TO_HEAD, HEAD_TO_PHRASE, PHRASE_TO_HEAD, PHRASE_TO_PHRASE };
const char* hierarchy_name(HierarchyClass c);

struct HierarchyResult {
    HierarchyClass cls;
    int cl_violation = 0;  // deg T_v
    int deg_gap = 0;       // deg T′
};

// sm1 extracts T_v and merges it with T′; em then merges that result with T/T_v
HierarchyResult classify_hierarchy(const MergeStep& sm1, const MergeStep& em);

Q quotient_cost(int v_before, int v_after);

struct StepReport {
    std::string tag;
    std::string output;
    CostVector cost;
};

struct CopyReport {
    FormCopyStage stage;
    Q ms;
    int cl = 0;
};

struct CostReport {
    std::string name;
    Mode mode = Mode::Deletion;
    std::vector<StepReport> steps;
    std::vector<CopyReport> copies;
    Q ms_total;
    RRDelta rr_c_total, rr_d_total;
    int cl_total = 0;
    int em_count = 0;
    // with FormCopy: Σ Δσ of the Merge steps, and that sum minus the vertices glued away
    int my_fc_merge_reading = 0;
    int my_fc_net_reading = 0;
};

CostReport derivation_cost(const Derivation& d);
nlohmann::json to_json(const CostReport& r);
std::string to_csv(const CostReport& r);

}  // namespace mg
