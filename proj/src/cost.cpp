#include "mg/cost.hpp"

#include <sstream>

namespace mg {

std::string to_string(const RRDelta& d) {
    return "(" + std::to_string(d.db0) + ", " + std::to_string(d.dalpha) + ", " + std::to_string(d.dsigma) + ")";
}

namespace {

Q arg_cost(const MergeArg& a) {
    switch (a.kind) {
        case ArgKind::Whole: return Q(1);
        case ArgKind::Term: return Q(a.tree->leaves, a.host_leaves);
        case ArgKind::Quotient: return Q(a.tree->leaves, a.host_leaves);
        case ArgKind::Unit: return Q(0);
    }
    return Q(0);
}

}  // namespace

Q ms_cost(const MergeStep& s) {
    Q b = (s.first.component == s.second.component) ? Q(1) : Q(2);
    return b - arg_cost(s.first) - arg_cost(s.second);
}

RRDelta rr_between(const Workspace& before, const Workspace& after) {
    RRDelta d;
    d.db0 = after.b0() - before.b0();
    d.dalpha = after.alpha() - before.alpha();
    d.dsigma = after.sigma() - before.sigma();
    d.dsigma_hat = after.sigma_hat() - before.sigma_hat();
    return d;
}

RRDelta rr_delta(const MergeStep& s, Mode mode) {
    if (mode == s.mode) return rr_between(s.input, s.output);
    MergeArg a = s.first, b = s.second;
    if (a.kind == ArgKind::Quotient) a.tree = nullptr;
    if (b.kind == ArgKind::Quotient) b.tree = nullptr;
    MergeStep t = make_step(s.input, a, b, mode);
    return rr_between(t.input, t.output);
}

std::optional<RRDelta> rr_table(Tag tag, Mode mode) {
    bool c = mode == Mode::Contraction;
    switch (tag) {
        case Tag::EM: return RRDelta{-1, 2, 1, 0};
        case Tag::IM:
        case Tag::SM1: return c ? RRDelta{0, 1, 1, 0} : RRDelta{0, 0, 0, 0};
        case Tag::SM2:
        case Tag::SM3: return c ? RRDelta{1, 0, 1, 0} : RRDelta{1, -2, -1, 0};
        case Tag::ID_SM: return std::nullopt;
    }
    return std::nullopt;
}

std::optional<RRDelta> rr_composite_table(Tag sm_tag, Mode mode) {
    bool c = mode == Mode::Contraction;
    switch (sm_tag) {
        case Tag::SM1: return c ? RRDelta{-1, 3, 2, 0} : RRDelta{-1, 2, 1, 0};
        case Tag::SM2:
        case Tag::SM3: return c ? RRDelta{0, 2, 2, 0} : RRDelta{0, 0, 0, 0};
        default: return std::nullopt;
    }
}

int cl_cost(const MergeStep& s) {
    if (s.tag == Tag::EM || s.tag == Tag::IM) return 0;
    int d = 0;
    for (auto* a : {&s.first, &s.second})
        if (a->kind == ArgKind::Term) d += a->tree->leaves;
    return d;
}

CostVector step_cost(const MergeStep& s) {
    CostVector c;
    c.ms = ms_cost(s);
    c.rr_c = rr_delta(s, Mode::Contraction);
    c.rr_d = rr_delta(s, Mode::Deletion);
    c.cl = cl_cost(s);
    return c;
}

const char* hierarchy_name(HierarchyClass c) {
    switch (c) {
        case HierarchyClass::HEAD_TO_HEAD: return "HEAD_TO_HEAD";
        case HierarchyClass::HEAD_TO_PHRASE: return "HEAD_TO_PHRASE";
        case HierarchyClass::PHRASE_TO_HEAD: return "PHRASE_TO_HEAD";
        case HierarchyClass::PHRASE_TO_PHRASE: return "PHRASE_TO_PHRASE";
    }
    return "?";
}

HierarchyResult classify_hierarchy(const MergeStep& sm1, const MergeStep& em) {
    if (sm1.tag != Tag::SM1) throw MergeError("BAD_COMPOSITE", "first step is not SM1");
    if (em.tag != Tag::EM) throw MergeError("BAD_COMPOSITE", "second step is not EM");
    if (!(em.input == sm1.output)) throw MergeError("BAD_COMPOSITE", "steps are not consecutive");
    const MergeArg& tv = sm1.first.kind == ArgKind::Term ? sm1.first : sm1.second;
    const MergeArg& tp = sm1.first.kind == ArgKind::Term ? sm1.second : sm1.first;
    Workspace rem = quotient(Workspace{sm1.input[tv.component]}, {{0, tv.path, tv.tree}}, sm1.mode);
    if (rem.size() != 1) throw MergeError("BAD_COMPOSITE", "remainder T/T_v is empty");
    std::string want_a = sm1.merged->key, want_b = rem[0]->key;
    std::string got_a = em.first.tree->key, got_b = em.second.tree->key;
    if (!((got_a == want_a && got_b == want_b) || (got_a == want_b && got_b == want_a)))
        throw MergeError("BAD_COMPOSITE", "EM does not merge the SM1 result with T/T_v");
    HierarchyResult r;
    r.cl_violation = tv.tree->leaves;
    r.deg_gap = tp.tree->leaves;
    bool head_v = r.cl_violation == 1, head_p = r.deg_gap == 1;
    r.cls = head_v ? (head_p ? HierarchyClass::HEAD_TO_HEAD : HierarchyClass::HEAD_TO_PHRASE)
                   : (head_p ? HierarchyClass::PHRASE_TO_HEAD : HierarchyClass::PHRASE_TO_PHRASE);
    return r;
}

Q quotient_cost(int v_before, int v_after) {
    if (v_before <= 0 || v_after <= 0 || v_after > v_before)
        throw std::invalid_argument("quotient cost needs 0 < after <= before");
    return Q(v_after + 1, v_before + 1);
}

CostReport derivation_cost(const Derivation& d) {
    CostReport r;
    r.name = d.name;
    r.mode = d.config.mode;
    for (auto& s : d.steps) {
        StepReport sr{tag_name(s.tag), s.output.key(), step_cost(s)};
        r.ms_total += sr.cost.ms;
        r.rr_c_total = r.rr_c_total + sr.cost.rr_c;
        r.rr_d_total = r.rr_d_total + sr.cost.rr_d;
        r.cl_total += sr.cost.cl;
        if (s.tag == Tag::EM) ++r.em_count;
        r.steps.push_back(sr);
    }
    r.my_fc_merge_reading = r.rr_d_total.dsigma;
    r.my_fc_net_reading = r.my_fc_merge_reading;
    for (auto& st : d.copies) {
        CopyReport c{st, quotient_cost(st.vertices_before, st.vertices_after),
                     st.leaf_classes_before - st.leaf_classes_after};
        r.ms_total += c.ms;
        r.cl_total += c.cl;
        r.my_fc_net_reading -= st.vertices_before - st.vertices_after;
        r.copies.push_back(c);
    }
    return r;
}

namespace {

nlohmann::json rr_json(const RRDelta& d) {
    return {{"db0", d.db0}, {"dalpha", d.dalpha}, {"dsigma", d.dsigma}, {"dsigma_hat", d.dsigma_hat}};
}

}  // namespace

nlohmann::json to_json(const CostReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["mode"] = mode_name(r.mode);
    auto steps = nlohmann::json::array();
    for (auto& s : r.steps) {
        const RRDelta& m = s.cost.rr(r.mode);
        steps.push_back({{"tag", s.tag},
                         {"output", s.output},
                         {"ms", to_string(s.cost.ms)},
                         {"db0", m.db0},
                         {"dalpha", m.dalpha},
                         {"dsigma", m.dsigma},
                         {"dsigma_hat", m.dsigma_hat},
                         {"cl", s.cost.cl},
                         {"rr_c", rr_json(s.cost.rr_c)},
                         {"rr_d", rr_json(s.cost.rr_d)}});
    }
    j["steps"] = steps;
    auto copies = nlohmann::json::array();
    for (auto& c : r.copies)
        copies.push_back({{"key", c.stage.key},
                          {"vertices_before", c.stage.vertices_before},
                          {"vertices_after", c.stage.vertices_after},
                          {"ms", to_string(c.ms)},
                          {"cl", c.cl}});
    j["copies"] = copies;
    nlohmann::json t{{"ms", to_string(r.ms_total)},
                     {"ms_value", to_double(r.ms_total)},
                     {"rr_c", rr_json(r.rr_c_total)},
                     {"rr_d", rr_json(r.rr_d_total)},
                     {"my_c", r.rr_c_total.dsigma},
                     {"my_d", r.rr_d_total.dsigma},
                     {"cl", r.cl_total},
                     {"em_count", r.em_count}};
    if (!r.copies.empty()) {
        t["my_fc"] = {{"merge_steps", r.my_fc_merge_reading}, {"net_of_quotients", r.my_fc_net_reading},
                      {"flag", "two readings"}};
    }
    j["totals"] = t;
    return j;
}

std::string to_csv(const CostReport& r) {
    std::ostringstream os;
    os << "step,tag,ms,db0,dalpha,dsigma,cl\n";
    int i = 0;
    for (auto& s : r.steps) {
        const RRDelta& m = s.cost.rr(r.mode);
        os << i++ << "," << s.tag << "," << to_string(s.cost.ms) << "," << m.db0 << "," << m.dalpha << ","
           << m.dsigma << "," << s.cost.cl << "\n";
    }
    for (auto& c : r.copies) os << i++ << ",FC," << to_string(c.ms) << ",,,," << c.cl << "\n";
    const RRDelta& t = r.mode == Mode::Contraction ? r.rr_c_total : r.rr_d_total;
    os << "total,," << to_string(r.ms_total) << "," << t.db0 << "," << t.dalpha << "," << t.dsigma << ","
       << r.cl_total << "\n";
    return os.str();
}

}  // namespace mg
