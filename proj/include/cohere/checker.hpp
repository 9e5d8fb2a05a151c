#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cohere/gclts.hpp"

namespace cohere {

// ---------------------------------------------------------------------------
// Simultaneous reachability.
//
// Two states are simultaneously reachable for participant p when two runs
// from the initial state have equal projections onto p's labels. Computed as
// reachability in the product of two copies of the restriction to p: moves in
// which p is inactive advance one side (epsilon), moves in which p is active
// advance both sides on an equal label and extend the witness u by one event.
// ---------------------------------------------------------------------------

struct SimMove {
    enum Kind { EpsLeft, EpsRight, Sync } kind;
    int t_left = -1;  // transition index on the left copy
    int t_right = -1; // transition index on the right copy
};

class SimTable {
  public:
    SimTable() = default;

    SimTable(const Gclts& g, ParticipantId p) : g_(&g), p_(p), states_(g.state_count()) {
        dist_.assign(static_cast<size_t>(states_) * states_, -1);
        parent_.assign(dist_.size(), -1);
        parent_move_.resize(dist_.size());

        // Layered BFS: within a layer close over epsilon moves, then take sync
        // moves into the next layer. First visit wins; nodes are processed in
        // settle order and transitions scanned in declaration order, so the
        // chosen witness is the shortest u with a deterministic tie-break.
        std::vector<int> layer{node(g.initial, g.initial)};
        dist_[layer[0]] = 0;
        int depth = 0;
        while (!layer.empty()) {
            std::vector<int> closed = close_epsilon(layer, depth);
            std::vector<int> next;
            for (int n : closed) {
                StateId a{n / states_}, b{n % states_};
                for (int ta : g.out[a.v]) {
                    const Transition& l = g.transitions[ta];
                    if (!l.event.active(p)) continue;
                    for (int tb : g.out[b.v]) {
                        const Transition& r = g.transitions[tb];
                        if (r.event != l.event) continue;
                        int m = node(l.dst, r.dst);
                        if (dist_[m] >= 0) continue;
                        dist_[m] = depth + 1;
                        parent_[m] = n;
                        parent_move_[m] = {SimMove::Sync, ta, tb};
                        next.push_back(m);
                    }
                }
            }
            layer = std::move(next);
            ++depth;
        }
    }

    bool simultaneous(StateId a, StateId b) const { return dist_[node(a, b)] >= 0; }

    // Reconstructs the two runs (transition index sequences) and the shared
    // p-projection u for a simultaneously reachable pair.
    void witness(StateId a, StateId b, std::vector<int>& run_left, std::vector<int>& run_right,
                 SyncWord& u) const {
        run_left.clear();
        run_right.clear();
        u.clear();
        std::vector<SimMove> moves;
        for (int n = node(a, b); parent_[n] >= 0; n = parent_[n]) moves.push_back(parent_move_[n]);
        std::reverse(moves.begin(), moves.end());
        for (const SimMove& m : moves) {
            switch (m.kind) {
                case SimMove::EpsLeft: run_left.push_back(m.t_left); break;
                case SimMove::EpsRight: run_right.push_back(m.t_right); break;
                case SimMove::Sync:
                    run_left.push_back(m.t_left);
                    run_right.push_back(m.t_right);
                    u.push_back(g_->transitions[m.t_left].event);
                    break;
            }
        }
    }

  private:
    int node(StateId a, StateId b) const { return a.v * states_ + b.v; }

    std::vector<int> close_epsilon(std::vector<int> frontier, int depth) {
        std::vector<int> closed;
        std::deque<int> work(frontier.begin(), frontier.end());
        while (!work.empty()) {
            int n = work.front();
            work.pop_front();
            closed.push_back(n);
            StateId a{n / states_}, b{n % states_};
            for (int ta : g_->out[a.v]) {
                if (g_->transitions[ta].event.active(p_)) continue;
                int m = node(g_->transitions[ta].dst, b);
                if (dist_[m] >= 0) continue;
                dist_[m] = depth;
                parent_[m] = n;
                parent_move_[m] = {SimMove::EpsLeft, ta, -1};
                work.push_back(m);
            }
            for (int tb : g_->out[b.v]) {
                if (g_->transitions[tb].event.active(p_)) continue;
                int m = node(a, g_->transitions[tb].dst);
                if (dist_[m] >= 0) continue;
                dist_[m] = depth;
                parent_[m] = n;
                parent_move_[m] = {SimMove::EpsRight, -1, tb};
                work.push_back(m);
            }
        }
        return closed;
    }

    const Gclts* g_ = nullptr;
    ParticipantId p_;
    int states_ = 0;
    std::vector<int> dist_;
    std::vector<int> parent_;
    std::vector<SimMove> parent_move_;
};

struct SimPair {
    ParticipantId p;
    StateId s1, s2; // s1 <= s2 by state index
    SyncWord witness_u;
    std::vector<int> run1, run2;
};

inline std::vector<SimPair> simultaneous_pairs(const Gclts& g, ParticipantId p) {
    SimTable table(g, p);
    std::vector<SimPair> out;
    for (int a = 0; a < g.state_count(); ++a) {
        for (int b = a; b < g.state_count(); ++b) {
            if (!table.simultaneous({a}, {b})) continue;
            SimPair pair;
            pair.p = p;
            pair.s1 = {a};
            pair.s2 = {b};
            table.witness({a}, {b}, pair.run1, pair.run2, pair.witness_u);
            out.push_back(std::move(pair));
        }
    }
    return out;
}

// States reachable from s using only transitions in which p is not active.
inline std::vector<StateId> eps_reachable(const Gclts& g, ParticipantId p, StateId s) {
    std::vector<bool> seen(g.state_count(), false);
    std::vector<StateId> out;
    std::deque<StateId> work{s};
    seen[s.v] = true;
    while (!work.empty()) {
        StateId cur = work.front();
        work.pop_front();
        out.push_back(cur);
        for (int ti : g.out[cur.v]) {
            const Transition& t = g.transitions[ti];
            if (t.event.active(p)) continue;
            if (!seen[t.dst.v]) {
                seen[t.dst.v] = true;
                work.push_back(t.dst);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// avail: can value m from p become the first pending message to q along some
// continuation from s, given the blocked participants B? Transitions labeled
// p->q:* are never traversed; a blocked sender's step blocks its receiver.
// Decided as reachability over (state, blocked-set) nodes; B only grows along
// a path, so the node space is finite and plain BFS is sound and complete.
// ---------------------------------------------------------------------------

using BlockedSet = uint64_t; // bit i = participant i blocked

inline BlockedSet blocked_of(std::initializer_list<ParticipantId> ps) {
    BlockedSet b = 0;
    for (ParticipantId p : ps) b |= (BlockedSet{1} << p.v);
    return b;
}

struct AvailResult {
    bool available = false;
    std::vector<int> steps; // traversal transitions, in order (empty for direct acceptance)
    int accept = -1;        // the accepting p->q:m transition
};

inline AvailResult avail(const Gclts& g, ParticipantId p, ParticipantId q, ValueId m, StateId s,
                         BlockedSet b0) {
    if (g.alphabet.participant_count() > 64)
        throw Error("Unsupported", "avail supports at most 64 participants");
    const SyncEvent goal{p, q, m};
    struct Node {
        StateId state;
        BlockedSet blocked;
    };
    std::map<std::pair<int, BlockedSet>, std::pair<int, int>> parent; // node -> (parent key idx, transition)
    std::vector<Node> order;
    std::map<std::pair<int, BlockedSet>, int> index;

    auto push = [&](StateId st, BlockedSet bl, int from, int via) {
        auto key = std::make_pair(st.v, bl);
        if (index.count(key)) return;
        index[key] = static_cast<int>(order.size());
        order.push_back({st, bl});
        parent[key] = {from, via};
    };

    push(s, b0, -1, -1);
    for (size_t head = 0; head < order.size(); ++head) {
        Node cur = order[head];
        bool p_blocked = (cur.blocked >> p.v) & 1;
        if (!p_blocked) {
            for (int ti : g.out[cur.state.v]) {
                if (g.transitions[ti].event == goal) {
                    AvailResult res;
                    res.available = true;
                    res.accept = ti;
                    auto key = std::make_pair(cur.state.v, cur.blocked);
                    while (true) {
                        auto [from, via] = parent[key];
                        if (from < 0) break;
                        res.steps.push_back(via);
                        key = std::make_pair(order[from].state.v, order[from].blocked);
                    }
                    std::reverse(res.steps.begin(), res.steps.end());
                    return res;
                }
            }
        }
        for (int ti : g.out[cur.state.v]) {
            const Transition& t = g.transitions[ti];
            if (t.event.sender == p && t.event.receiver == q) continue;
            bool sender_blocked = (cur.blocked >> t.event.sender.v) & 1;
            BlockedSet nb = cur.blocked;
            if (sender_blocked) nb |= (BlockedSet{1} << t.event.receiver.v);
            push(t.dst, nb, static_cast<int>(head), ti);
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Coherence conditions and verdicts.
// ---------------------------------------------------------------------------

enum class ViolationKind { SC, RC, NMC };

inline const char* kind_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::SC: return "SC";
        case ViolationKind::RC: return "RC";
        case ViolationKind::NMC: return "NMC";
    }
    return "?";
}

struct Violation {
    ViolationKind kind;
    ParticipantId participant; // the participant whose local view is confused
    int t1 = -1;               // SC: the unmatched send; RC: the availed send; NMC: the send
    int t2 = -1;               // RC: the competing receive source; NMC: the receive; SC: unused
    StateId s1, s2;            // simultaneously reachable pair (s1 = source of t1)
    SyncWord witness_u;
    std::vector<int> run1, run2;     // runs with equal p-projections reaching s1 / s2
    std::vector<int> avail_detail;   // RC: avail traversal plus accepting transition
    AsyncWord witness_trace;         // v0
};

enum class RcMode { Strict, Generalized };

class CheckContext {
  public:
    explicit CheckContext(const Gclts& g) : g_(g) {}

    const SimTable& sim(ParticipantId p) {
        auto it = tables_.find(p.v);
        if (it == tables_.end()) it = tables_.emplace(p.v, SimTable(g_, p)).first;
        return it->second;
    }

    const AvailResult& avail_memo(ParticipantId p, ParticipantId q, ValueId m, StateId s) {
        auto key = std::make_tuple(p.v, q.v, m.v, s.v);
        auto it = avail_.find(key);
        if (it == avail_.end())
            it = avail_.emplace(key, avail(g_, p, q, m, s, blocked_of({q}))).first;
        return it->second;
    }

  private:
    const Gclts& g_;
    std::unordered_map<int, SimTable> tables_;
    std::map<std::tuple<int, int, int, int>, AvailResult> avail_;
};

// Send Coherence: a send enabled at s1 must stay available (after steps the
// sender cannot observe) from every state the sender cannot distinguish
// from s1.
inline std::vector<Violation> check_send_coherence(const Gclts& g, CheckContext& ctx) {
    std::vector<Violation> out;
    for (int ti = 0; ti < static_cast<int>(g.transitions.size()); ++ti) {
        const Transition& t = g.transitions[ti];
        ParticipantId p = t.event.sender;
        const SimTable& sim = ctx.sim(p);
        for (int s = 0; s < g.state_count(); ++s) {
            if (s == t.src.v) continue;
            if (!sim.simultaneous(t.src, {s})) continue;
            bool matched = false;
            for (StateId e : eps_reachable(g, p, {s})) {
                for (int tj : g.out[e.v]) {
                    if (g.transitions[tj].event == t.event) {
                        matched = true;
                        break;
                    }
                }
                if (matched) break;
            }
            if (matched) continue;
            Violation v;
            v.kind = ViolationKind::SC;
            v.participant = p;
            v.t1 = ti;
            v.s1 = t.src;
            v.s2 = {s};
            sim.witness(t.src, {s}, v.run1, v.run2, v.witness_u);
            out.push_back(std::move(v));
        }
    }
    return out;
}

// Receive Coherence: if q may receive m from p, the same value from a second
// sender r must not be able to arrive first from an indistinguishable state.
// Both orientations of each transition pair are checked; a pair that violates
// both ways is reported once.
inline std::vector<Violation> check_receive_coherence(const Gclts& g, CheckContext& ctx,
                                                      RcMode mode = RcMode::Strict) {
    std::vector<Violation> out;
    std::set<std::pair<int, int>> reported;
    int n = static_cast<int>(g.transitions.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Transition& t1 = g.transitions[i];
            const Transition& t2 = g.transitions[j];
            if (t1.event.receiver != t2.event.receiver) continue;
            ParticipantId q = t1.event.receiver;
            ParticipantId p = t1.event.sender;
            ParticipantId r = t2.event.sender;
            if (p == r) continue;
            if (mode == RcMode::Strict && t1.event.value != t2.event.value) continue;
            if (t1.src == t2.src) continue;
            const SimTable& sim = ctx.sim(q);
            if (!sim.simultaneous(t1.src, t2.src)) continue;
            const AvailResult& res = ctx.avail_memo(p, q, t1.event.value, t2.dst);
            if (!res.available) continue;
            auto key = std::minmax(i, j);
            if (!reported.insert(key).second) continue;
            Violation v;
            v.kind = ViolationKind::RC;
            v.participant = q;
            v.t1 = i;
            v.t2 = j;
            v.s1 = t1.src;
            v.s2 = t2.src;
            sim.witness(t1.src, t2.src, v.run1, v.run2, v.witness_u);
            v.avail_detail = res.steps;
            v.avail_detail.push_back(res.accept);
            out.push_back(std::move(v));
        }
    }
    return out;
}

// No Mixed Choice: a participant may not face a send in one state and a
// receive in another state it cannot distinguish from the first.
inline std::vector<Violation> check_no_mixed_choice(const Gclts& g, CheckContext& ctx) {
    std::vector<Violation> out;
    int n = static_cast<int>(g.transitions.size());
    for (int i = 0; i < n; ++i) {
        const Transition& t1 = g.transitions[i];
        ParticipantId p = t1.event.sender;
        const SimTable& sim = ctx.sim(p);
        for (int j = 0; j < n; ++j) {
            const Transition& t2 = g.transitions[j];
            if (t2.event.receiver != p) continue;
            if (!sim.simultaneous(t1.src, t2.src)) continue;
            Violation v;
            v.kind = ViolationKind::NMC;
            v.participant = p;
            v.t1 = i;
            v.t2 = j;
            v.s1 = t1.src;
            v.s2 = t2.src;
            sim.witness(t1.src, t2.src, v.run1, v.run2, v.witness_u);
            out.push_back(std::move(v));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Witness traces (the v0 constructions). Each witness is a trace of the
// canonical implementation that is not a prefix of the protocol's
// asynchronous language; the semantics module checks both halves.
// ---------------------------------------------------------------------------

inline AsyncWord extract_witness(const Gclts& g, const Violation& v) {
    AsyncWord w = split_word(g.trace_of(v.run2));
    switch (v.kind) {
        case ViolationKind::SC:
            // Reach the non-matching state along the indistinguishable run,
            // then fire the send that cannot be matched there.
            w.push_back(send_event(g.transitions[v.t1].event));
            break;
        case ViolationKind::NMC:
            // Reach the receive's source, make the receive available, then let
            // the confused participant send instead.
            w.push_back(send_event(g.transitions[v.t2].event));
            w.push_back(send_event(g.transitions[v.t1].event));
            break;
        case ViolationKind::RC: {
            // Reach the competing receive's source, send its message, then
            // play the avail path with the events of blocked participants
            // elided, and finally deliver the first sender's message to q.
            const SyncEvent& second = g.transitions[v.t2].event;
            ParticipantId q = v.participant;
            w.push_back(send_event(second));
            BlockedSet blocked = blocked_of({q});
            for (size_t k = 0; k + 1 < v.avail_detail.size(); ++k) {
                const SyncEvent& e = g.transitions[v.avail_detail[k]].event;
                bool sender_blocked = (blocked >> e.sender.v) & 1;
                if (sender_blocked) {
                    blocked |= (BlockedSet{1} << e.receiver.v);
                    continue;
                }
                w.push_back(send_event(e));
                bool receiver_blocked = (blocked >> e.receiver.v) & 1;
                if (!receiver_blocked) w.push_back(receive_event(e));
            }
            const SyncEvent& accept = g.transitions[v.avail_detail.back()].event;
            w.push_back(send_event(accept));
            w.push_back(receive_event(accept)); // q<|p?m
            break;
        }
    }
    return w;
}

struct Verdict {
    bool implementable = true;
    std::vector<Violation> violations;
};

inline Verdict check_implementability(const Gclts& g, RcMode mode = RcMode::Strict) {
    WellFormednessReport wf = validate_gclts(g);
    if (!wf.ok) throw Error("IllFormed", wf.render());
    CheckContext ctx(g);
    Verdict verdict;
    auto take = [&](std::vector<Violation>&& vs) {
        for (Violation& v : vs) verdict.violations.push_back(std::move(v));
    };
    take(check_send_coherence(g, ctx));
    take(check_receive_coherence(g, ctx, mode));
    take(check_no_mixed_choice(g, ctx));
    std::stable_sort(verdict.violations.begin(), verdict.violations.end(),
                     [](const Violation& a, const Violation& b) {
                         if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                         if (a.t1 != b.t1) return a.t1 < b.t1;
                         if (a.t2 != b.t2) return a.t2 < b.t2;
                         return a.s2 < b.s2;
                     });
    for (Violation& v : verdict.violations) v.witness_trace = extract_witness(g, v);
    verdict.implementable = verdict.violations.empty();
    return verdict;
}

inline std::string render_verdict(const Gclts& g, const Verdict& verdict) {
    std::ostringstream os;
    os << "protocol: " << g.name << "\n";
    os << "verdict: " << (verdict.implementable ? "implementable" : "not-implementable") << "\n";
    os << "violations: " << verdict.violations.size() << "\n";
    int idx = 0;
    for (const Violation& v : verdict.violations) {
        os << "violation " << ++idx << "\n";
        os << "  kind: " << kind_name(v.kind) << "\n";
        os << "  participant: " << g.alphabet.name(v.participant) << "\n";
        os << "  transition: " << g.render_transition(v.t1) << "\n";
        if (v.kind == ViolationKind::SC)
            os << "  simultaneous-with: " << g.state_names[v.s2.v] << "\n";
        else
            os << "  transition-2: " << g.render_transition(v.t2) << "\n";
        os << "  witness-u: " << (v.witness_u.empty() ? "-" : render_word(g.alphabet, v.witness_u))
           << "\n";
        if (v.kind == ViolationKind::RC) {
            os << "  avail-path:";
            for (int ti : v.avail_detail) os << " [" << g.render_transition(ti) << "]";
            os << "\n";
        }
        os << "  witness-trace: " << render_word(g.alphabet, v.witness_trace) << "\n";
    }
    return os.str();
}

} // namespace cohere
