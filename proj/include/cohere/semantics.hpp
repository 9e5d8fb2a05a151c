#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cohere/checker.hpp"
#include "cohere/synthesis.hpp"

namespace cohere {

// ---------------------------------------------------------------------------
// CLTS execution over FIFO channels.
// ---------------------------------------------------------------------------

struct Configuration {
    std::vector<int> locals;                    // machine state per participant
    std::vector<std::vector<ValueId>> channels; // indexed sender * P + receiver

    bool operator==(const Configuration&) const = default;

    std::string key() const {
        std::string k;
        for (int s : locals) {
            k += std::to_string(s);
            k += ';';
        }
        k += '|';
        for (const auto& ch : channels) {
            for (ValueId v : ch) {
                k += std::to_string(v.v);
                k += ',';
            }
            k += ';';
        }
        return k;
    }
};

inline Configuration initial_configuration(const Clts& c) {
    Configuration cfg;
    int P = c.alphabet.participant_count();
    cfg.channels.resize(static_cast<size_t>(P) * P);
    for (const LocalMachine& m : c.machines) cfg.locals.push_back(m.initial);
    return cfg;
}

inline bool is_final_configuration(const Clts& c, const Configuration& cfg) {
    for (int p = 0; p < c.alphabet.participant_count(); ++p)
        if (!c.machines[p].finals[cfg.locals[p]]) return false;
    for (const auto& ch : cfg.channels)
        if (!ch.empty()) return false;
    return true;
}

// Send events are always enabled when the local machine has them; a receive
// additionally needs its value at the head of the channel.
inline std::vector<AsyncEvent> enabled_events(const Clts& c, const Configuration& cfg) {
    std::vector<AsyncEvent> out;
    int P = c.alphabet.participant_count();
    for (int p = 0; p < P; ++p) {
        const LocalMachine& m = c.machines[p];
        for (int ti : m.out[cfg.locals[p]]) {
            const AsyncEvent& e = m.transitions[ti].event;
            if (e.kind == Dir::Send) {
                out.push_back(e);
            } else {
                const auto& ch = cfg.channels[static_cast<size_t>(e.peer.v) * P + e.owner.v];
                if (!ch.empty() && ch.front() == e.value) out.push_back(e);
            }
        }
    }
    return out;
}

inline Configuration step(const Clts& c, const Configuration& cfg, const AsyncEvent& e) {
    int P = c.alphabet.participant_count();
    const LocalMachine& m = c.machines[e.owner.v];
    int dst = m.step(cfg.locals[e.owner.v], e);
    if (dst < 0) throw Error("NotEnabled", "no local transition for " + render(c.alphabet, e));
    Configuration next = cfg;
    next.locals[e.owner.v] = dst;
    if (e.kind == Dir::Send) {
        next.channels[static_cast<size_t>(e.owner.v) * P + e.peer.v].push_back(e.value);
    } else {
        auto& ch = next.channels[static_cast<size_t>(e.peer.v) * P + e.owner.v];
        if (ch.empty() || ch.front() != e.value)
            throw Error("NotEnabled", "channel head does not match " + render(c.alphabet, e));
        ch.erase(ch.begin());
    }
    return next;
}

// Runs w from the initial configuration; nullopt when some event is not enabled.
inline std::optional<Configuration> simulate(const Clts& c, const AsyncWord& w) {
    Configuration cfg = initial_configuration(c);
    for (const AsyncEvent& e : w) {
        int P = c.alphabet.participant_count();
        const LocalMachine& m = c.machines[e.owner.v];
        if (m.step(cfg.locals[e.owner.v], e) < 0) return std::nullopt;
        if (e.kind == Dir::Receive) {
            const auto& ch = cfg.channels[static_cast<size_t>(e.peer.v) * P + e.owner.v];
            if (ch.empty() || ch.front() != e.value) return std::nullopt;
        }
        cfg = step(c, cfg, e);
    }
    return cfg;
}

inline bool is_trace(const Clts& c, const AsyncWord& w) { return simulate(c, w).has_value(); }

// ---------------------------------------------------------------------------
// Bounded exploration.
// ---------------------------------------------------------------------------

struct DeadlockInfo {
    Configuration configuration;
    AsyncWord trace;
};

struct ExploreReport {
    std::vector<AsyncWord> traces; // every trace with length <= bound, BFS order
    std::vector<DeadlockInfo> deadlocks;
    std::vector<AsyncWord> maximal_finite_traces;
    bool truncated = false;
};

inline ExploreReport explore(const Clts& c, int bound) {
    ExploreReport report;
    struct Item {
        AsyncWord trace;
        Configuration cfg;
    };
    std::deque<Item> work{{AsyncWord{}, initial_configuration(c)}};
    std::unordered_map<std::string, bool> deadlock_seen;
    while (!work.empty()) {
        Item item = std::move(work.front());
        work.pop_front();
        report.traces.push_back(item.trace);
        std::vector<AsyncEvent> enabled = enabled_events(c, item.cfg);
        bool fin = is_final_configuration(c, item.cfg);
        if (fin) report.maximal_finite_traces.push_back(item.trace);
        if (!fin && enabled.empty()) {
            std::string key = item.cfg.key();
            if (!deadlock_seen[key]) {
                deadlock_seen[key] = true;
                report.deadlocks.push_back({item.cfg, item.trace});
            }
        }
        if (static_cast<int>(item.trace.size()) >= bound) {
            if (!enabled.empty()) report.truncated = true;
            continue;
        }
        for (const AsyncEvent& e : enabled) {
            Item next;
            next.trace = item.trace;
            next.trace.push_back(e);
            next.cfg = step(c, item.cfg, e);
            work.push_back(std::move(next));
        }
    }
    return report;
}

enum class StopReason { MaxSteps, Final, Deadlock };

struct RunResult {
    AsyncWord trace;
    StopReason reason = StopReason::MaxSteps;
};

// Seed-deterministic random scheduling of enabled events.
inline RunResult random_run(const Clts& c, uint64_t seed, int max_steps) {
    std::mt19937_64 rng(seed);
    RunResult result;
    Configuration cfg = initial_configuration(c);
    for (int i = 0; i < max_steps; ++i) {
        std::vector<AsyncEvent> enabled = enabled_events(c, cfg);
        if (enabled.empty()) {
            result.reason = is_final_configuration(c, cfg) ? StopReason::Final : StopReason::Deadlock;
            return result;
        }
        std::uniform_int_distribution<size_t> pick(0, enabled.size() - 1);
        const AsyncEvent e = enabled[pick(rng)];
        cfg = step(c, cfg, e);
        result.trace.push_back(e);
    }
    result.reason = is_final_configuration(c, cfg) ? StopReason::Final : StopReason::MaxSteps;
    return result;
}

// ---------------------------------------------------------------------------
// prefix_member: is w a prefix of the protocol's asynchronous language?
// True iff w is channel-compliant and some run prefix of g covers every
// participant's view of w (deadlock freedom extends any such prefix to a
// maximal run). Searched as BFS over (protocol state, per-participant matched
// position); a transition whose participant has already matched all of its
// view is free, which admits covering runs longer than |w|.
// ---------------------------------------------------------------------------

struct RunSetQuery {
    bool member = false;
    std::vector<int> witness_run; // transition indices of one covering run prefix
};

inline RunSetQuery prefix_member(const Gclts& g, const AsyncWord& w) {
    if (!is_channel_compliant(w)) return {};
    int P = g.alphabet.participant_count();
    std::vector<AsyncWord> proj(P);
    for (const AsyncEvent& e : w) proj[e.owner.v].push_back(e);

    std::vector<int64_t> stride(P);
    int64_t radix = 1;
    for (int p = 0; p < P; ++p) {
        stride[p] = radix;
        radix *= static_cast<int64_t>(proj[p].size()) + 1;
    }
    auto encode = [&](int state, const std::vector<int>& pos) {
        int64_t k = state * radix;
        for (int p = 0; p < P; ++p) k += stride[p] * pos[p];
        return k;
    };

    struct Node {
        int state;
        std::vector<int> pos;
    };
    std::unordered_map<int64_t, std::pair<int64_t, int>> parent; // node -> (parent, transition)
    std::deque<Node> work;

    std::vector<int> zero(P, 0);
    work.push_back({g.initial.v, zero});
    parent[encode(g.initial.v, zero)] = {-1, -1};

    auto done = [&](const std::vector<int>& pos) {
        for (int p = 0; p < P; ++p)
            if (pos[p] != static_cast<int>(proj[p].size())) return false;
        return true;
    };

    while (!work.empty()) {
        Node cur = std::move(work.front());
        work.pop_front();
        if (done(cur.pos)) {
            RunSetQuery q;
            q.member = true;
            int64_t key = encode(cur.state, cur.pos);
            while (true) {
                auto [from, via] = parent[key];
                if (from < 0) break;
                q.witness_run.push_back(via);
                key = from;
            }
            std::reverse(q.witness_run.begin(), q.witness_run.end());
            return q;
        }
        for (int ti : g.out[cur.state]) {
            const Transition& t = g.transitions[ti];
            int a = t.event.sender.v, b = t.event.receiver.v;
            std::vector<int> pos = cur.pos;
            if (pos[a] < static_cast<int>(proj[a].size())) {
                if (proj[a][pos[a]] != send_event(t.event)) continue;
                ++pos[a];
            }
            if (pos[b] < static_cast<int>(proj[b].size())) {
                if (proj[b][pos[b]] != receive_event(t.event)) continue;
                ++pos[b];
            }
            int64_t key = encode(t.dst.v, pos);
            if (parent.count(key)) continue;
            parent[key] = {encode(cur.state, cur.pos), ti};
            work.push_back({t.dst.v, std::move(pos)});
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Bounded fidelity and refutation.
//
// Words are explored up to the bound, deduplicated by their per-participant
// projections: channel-compliant words with equal projections reach the same
// configuration, and both trace membership and prefix membership depend only
// on the projections.
// ---------------------------------------------------------------------------

struct FidelityReport {
    std::vector<AsyncWord> clts_only;    // clause 1: traces of c that are not prefixes of g
    std::vector<AsyncWord> protocol_only; // clause 2: prefixes of g that are not traces of c
    std::vector<DeadlockInfo> deadlocks; // clause 3
    bool truncated = false;

    bool ok() const { return clts_only.empty() && protocol_only.empty() && deadlocks.empty(); }
};

namespace detail {

inline std::string projection_key(const Alphabet& a, const std::vector<AsyncWord>& proj) {
    std::string k;
    int V = a.value_count();
    int P = a.participant_count();
    for (const AsyncWord& stream : proj) {
        for (const AsyncEvent& e : stream) {
            int code = ((e.kind == Dir::Send ? 0 : 1) * P + e.peer.v) * V + e.value.v;
            k += std::to_string(code);
            k += ',';
        }
        k += '|';
    }
    return k;
}

inline std::vector<AsyncEvent> all_events(const Alphabet& a) {
    std::vector<AsyncEvent> out;
    int P = a.participant_count(), V = a.value_count();
    for (int owner = 0; owner < P; ++owner)
        for (int kind = 0; kind < 2; ++kind)
            for (int peer = 0; peer < P; ++peer) {
                if (peer == owner) continue;
                for (int val = 0; val < V; ++val)
                    out.push_back({kind == 0 ? Dir::Send : Dir::Receive,
                                   ParticipantId{owner}, ParticipantId{peer}, ValueId{val}});
            }
    return out;
}

} // namespace detail

inline FidelityReport bounded_fidelity(const Gclts& g, const Clts& c, int bound,
                                       bool stop_at_first = false) {
    FidelityReport report;
    const std::vector<AsyncEvent> alphabet_events = detail::all_events(g.alphabet);
    int P = g.alphabet.participant_count();

    struct Node {
        AsyncWord word;
        Configuration cfg; // meaningful when in_c
        bool in_c;
    };
    std::deque<Node> work{{AsyncWord{}, initial_configuration(c), true}};
    std::unordered_map<std::string, bool> seen;
    {
        std::vector<AsyncWord> proj(P);
        seen[detail::projection_key(g.alphabet, proj)] = true;
    }
    // The empty word is a trace of c and, because g is deadlock-free and has
    // at least the empty run prefix, a member of pref(L(g)).

    auto channel_ok = [&](const Node& n, const AsyncEvent& e) {
        // Same pending-queue check as CLTS receive enabling; for send always true.
        if (e.kind == Dir::Send) return true;
        int from = e.peer.v, to = e.owner.v;
        size_t sent = 0, received = 0;
        ValueId head{-1};
        size_t idx = 0;
        for (const AsyncEvent& x : n.word) {
            (void)idx;
            if (x.kind == Dir::Send && x.owner.v == from && x.peer.v == to) {
                if (sent == received) head = x.value; // head of remaining queue tracked below
                ++sent;
            } else if (x.kind == Dir::Receive && x.owner.v == to && x.peer.v == from) {
                ++received;
            }
        }
        if (received >= sent) return false;
        // find the (received+1)-th send value
        size_t k = 0;
        for (const AsyncEvent& x : n.word) {
            if (x.kind == Dir::Send && x.owner.v == from && x.peer.v == to) {
                if (k == received) return x.value == e.value;
                ++k;
            }
        }
        return false;
    };

    while (!work.empty()) {
        Node cur = std::move(work.front());
        work.pop_front();
        int depth = static_cast<int>(cur.word.size());
        bool at_bound = depth >= bound;

        for (const AsyncEvent& e : alphabet_events) {
            bool c_enabled = false;
            if (cur.in_c) {
                const LocalMachine& m = c.machines[e.owner.v];
                if (m.step(cur.cfg.locals[e.owner.v], e) >= 0) {
                    if (e.kind == Dir::Send) {
                        c_enabled = true;
                    } else {
                        const auto& ch =
                            cur.cfg.channels[static_cast<size_t>(e.peer.v) * P + e.owner.v];
                        c_enabled = !ch.empty() && ch.front() == e.value;
                    }
                }
            }
            bool plausible = c_enabled || channel_ok(cur, e);
            if (!plausible) continue;

            AsyncWord next = cur.word;
            next.push_back(e);
            bool g_member = prefix_member(g, next).member;
            if (!c_enabled && !g_member) continue;

            if (at_bound) {
                report.truncated = true;
                continue;
            }

            std::vector<AsyncWord> proj(P);
            for (const AsyncEvent& x : next) proj[x.owner.v].push_back(x);
            std::string key = detail::projection_key(g.alphabet, proj);
            if (seen.count(key)) continue;
            seen[key] = true;

            if (c_enabled && !g_member) {
                report.clts_only.push_back(next);
                if (stop_at_first) return report;
                continue; // extensions stay outside pref(L(g))
            }
            if (!c_enabled && g_member) {
                report.protocol_only.push_back(next);
                if (stop_at_first) return report;
                continue; // extensions stay outside the trace set of c
            }
            Node child;
            child.word = std::move(next);
            child.cfg = step(c, cur.cfg, e);
            child.in_c = true;
            work.push_back(std::move(child));
        }
    }

    // Clause 3: deadlock search over configurations within the bound.
    {
        std::unordered_map<std::string, bool> visited;
        struct Item {
            Configuration cfg;
            AsyncWord trace;
        };
        std::deque<Item> q{{initial_configuration(c), {}}};
        visited[q.front().cfg.key()] = true;
        while (!q.empty()) {
            Item item = std::move(q.front());
            q.pop_front();
            std::vector<AsyncEvent> enabled = enabled_events(c, item.cfg);
            if (enabled.empty() && !is_final_configuration(c, item.cfg)) {
                report.deadlocks.push_back({item.cfg, item.trace});
                if (stop_at_first) return report;
            }
            if (static_cast<int>(item.trace.size()) >= bound) {
                if (!enabled.empty()) report.truncated = true;
                continue;
            }
            for (const AsyncEvent& e : enabled) {
                Configuration next = step(c, item.cfg, e);
                std::string key = next.key();
                if (visited.count(key)) continue;
                visited[key] = true;
                AsyncWord trace = item.trace;
                trace.push_back(e);
                q.push_back({std::move(next), std::move(trace)});
            }
        }
    }
    return report;
}

// A counterexample from clause 1 or clause 3 refutes implementability
// outright: if the canonical implementation fails, nothing implements g.
struct Refutation {
    enum class Form { NonPrefixTrace, Deadlock } form;
    AsyncWord trace;
};

struct RefuteResult {
    std::optional<Refutation> counterexample;
    bool truncated = false;
};

inline RefuteResult bounded_refute(const Gclts& g, int bound) {
    Clts c = synthesize_canonical(g);
    FidelityReport report = bounded_fidelity(g, c, bound, /*stop_at_first=*/true);
    RefuteResult result;
    result.truncated = report.truncated;
    if (!report.clts_only.empty())
        result.counterexample = Refutation{Refutation::Form::NonPrefixTrace, report.clts_only.front()};
    else if (!report.deadlocks.empty())
        result.counterexample = Refutation{Refutation::Form::Deadlock, report.deadlocks.front().trace};
    return result;
}

} // namespace cohere
