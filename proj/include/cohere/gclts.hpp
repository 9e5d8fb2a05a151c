#pragma once

#include <algorithm>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "cohere/core.hpp"

namespace cohere {

struct Transition {
    StateId src;
    SyncEvent event;
    StateId dst;
    auto operator<=>(const Transition&) const = default;
};

// Explicit finite global protocol: an LTS over synchronous events together
// with initial and final states.
struct Gclts {
    std::string name = "protocol";
    Alphabet alphabet;
    std::vector<std::string> state_names;
    StateId initial{0};
    std::vector<bool> finals;          // indexed by state
    std::vector<Transition> transitions;

    std::vector<std::vector<int>> out; // state -> transition indices, declaration order

    int state_count() const { return static_cast<int>(state_names.size()); }

    StateId state(const std::string& name) const {
        for (int i = 0; i < state_count(); ++i)
            if (state_names[i] == name) return {i};
        throw Error("UnknownSymbol", "undeclared state '" + name + "'");
    }

    void rebuild_index() {
        out.assign(state_names.size(), {});
        for (int i = 0; i < static_cast<int>(transitions.size()); ++i)
            out[transitions[i].src.v].push_back(i);
    }

    bool is_final(StateId s) const { return finals[s.v]; }

    std::vector<bool> reachable_states() const {
        std::vector<bool> seen(state_names.size(), false);
        std::deque<StateId> work{initial};
        seen[initial.v] = true;
        while (!work.empty()) {
            StateId s = work.front();
            work.pop_front();
            for (int ti : out[s.v]) {
                StateId d = transitions[ti].dst;
                if (!seen[d.v]) {
                    seen[d.v] = true;
                    work.push_back(d);
                }
            }
        }
        return seen;
    }

    std::string render_transition(int ti) const {
        const Transition& t = transitions[ti];
        return state_names[t.src.v] + " " + render(alphabet, t.event) + " " + state_names[t.dst.v];
    }

    SyncWord trace_of(const std::vector<int>& run) const {
        SyncWord w;
        w.reserve(run.size());
        for (int ti : run) w.push_back(transitions[ti].event);
        return w;
    }
};

enum class Rule { SinkFinality, SenderDriven, DeadlockFreedom, Determinism };

inline const char* rule_name(Rule r) {
    switch (r) {
        case Rule::SinkFinality: return "SinkFinality";
        case Rule::SenderDriven: return "SenderDriven";
        case Rule::DeadlockFreedom: return "DeadlockFreedom";
        case Rule::Determinism: return "Determinism";
    }
    return "?";
}

struct WellFormednessFailure {
    Rule rule;
    std::string detail;
};

struct WellFormednessReport {
    bool ok = true;
    std::vector<WellFormednessFailure> failures;

    void add(Rule r, std::string detail) {
        ok = false;
        failures.push_back({r, std::move(detail)});
    }

    std::string render() const {
        if (ok) return "ok\n";
        std::ostringstream os;
        for (const auto& f : failures) os << rule_name(f.rule) << ": " << f.detail << "\n";
        return os.str();
    }
};

// Checks the three protocol conditions: sink-finality, sender-driven choice
// (including the equal-labels-imply-equal-targets determinism clause), and
// deadlock freedom over states reachable from the initial state.
inline WellFormednessReport validate_gclts(const Gclts& g) {
    WellFormednessReport report;
    for (int ti = 0; ti < static_cast<int>(g.transitions.size()); ++ti) {
        const Transition& t = g.transitions[ti];
        if (g.is_final(t.src))
            report.add(Rule::SinkFinality, "final state " + g.state_names[t.src.v] +
                                               " has outgoing transition " + g.render_transition(ti));
    }
    for (int s = 0; s < g.state_count(); ++s) {
        const auto& ts = g.out[s];
        for (size_t i = 0; i < ts.size(); ++i) {
            for (size_t j = i + 1; j < ts.size(); ++j) {
                const Transition& a = g.transitions[ts[i]];
                const Transition& b = g.transitions[ts[j]];
                if (a.event.sender != b.event.sender)
                    report.add(Rule::SenderDriven,
                               "state " + g.state_names[s] + " has senders " +
                                   g.alphabet.name(a.event.sender) + " and " +
                                   g.alphabet.name(b.event.sender));
                else if (a.event == b.event && a.dst != b.dst)
                    report.add(Rule::SenderDriven,
                               "state " + g.state_names[s] + " has equal labels " +
                                   render(g.alphabet, a.event) + " with distinct targets " +
                                   g.state_names[a.dst.v] + " and " + g.state_names[b.dst.v]);
            }
        }
    }
    std::vector<bool> reach = g.reachable_states();
    for (int s = 0; s < g.state_count(); ++s)
        if (reach[s] && !g.finals[s] && g.out[s].empty())
            report.add(Rule::DeadlockFreedom,
                       "reachable non-final state " + g.state_names[s] + " has no outgoing transition");
    return report;
}

// The restriction S_p: the same LTS with each transition relabeled epsilon
// when p is not active in it. Kept as a view; transitions are shared with the
// underlying protocol one-to-one.
struct LocalRestriction {
    const Gclts* g;
    ParticipantId p;

    bool is_epsilon(int ti) const { return !g->transitions[ti].event.active(p); }
};

inline LocalRestriction restrict_to_participant(const Gclts& g, ParticipantId p) {
    return {&g, p};
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

inline std::string export_dot(const Gclts& g) {
    std::ostringstream os;
    os << "digraph \"" << dot_escape(g.name) << "\" {\n";
    os << "  rankdir=LR;\n";
    os << "  __start [shape=point];\n";
    for (int s = 0; s < g.state_count(); ++s) {
        os << "  \"" << dot_escape(g.state_names[s]) << "\" [shape="
           << (g.finals[s] ? "doublecircle" : "circle") << "];\n";
    }
    os << "  __start -> \"" << dot_escape(g.state_names[g.initial.v]) << "\";\n";
    for (const Transition& t : g.transitions) {
        os << "  \"" << dot_escape(g.state_names[t.src.v]) << "\" -> \""
           << dot_escape(g.state_names[t.dst.v]) << "\" [label=\""
           << dot_escape(render(g.alphabet, t.event)) << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace cohere
