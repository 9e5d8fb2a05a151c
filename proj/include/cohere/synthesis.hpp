#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cohere/gclts.hpp"

namespace cohere {

struct LmTransition {
    int src;
    AsyncEvent event;
    int dst;
};

// Deterministic local machine for one participant: the subset construction
// over the protocol restricted to that participant, with epsilon closure.
// Macro-states are canonically named by the sorted member state ids.
struct LocalMachine {
    ParticipantId participant;
    std::vector<std::vector<int>> members; // sorted protocol state indices per macro-state
    std::vector<std::string> state_names;
    int initial = 0;
    std::vector<bool> finals;
    std::vector<LmTransition> transitions;
    std::vector<std::vector<int>> out; // macro-state -> transition indices

    int state_count() const { return static_cast<int>(members.size()); }

    // At most one successor per (state, event).
    int step(int state, const AsyncEvent& e) const {
        for (int ti : out[state])
            if (transitions[ti].event == e) return transitions[ti].dst;
        return -1;
    }
};

struct Clts {
    Alphabet alphabet;
    std::string name = "clts";
    std::vector<LocalMachine> machines; // indexed by participant id

    const LocalMachine& machine(ParticipantId p) const { return machines.at(p.v); }
};

namespace detail {

inline std::vector<int> eps_closure_set(const Gclts& g, ParticipantId p, std::vector<int> states) {
    std::vector<bool> in(g.state_count(), false);
    std::deque<int> work;
    for (int s : states)
        if (!in[s]) {
            in[s] = true;
            work.push_back(s);
        }
    while (!work.empty()) {
        int s = work.front();
        work.pop_front();
        for (int ti : g.out[s]) {
            const Transition& t = g.transitions[ti];
            if (t.event.active(p)) continue;
            if (!in[t.dst.v]) {
                in[t.dst.v] = true;
                work.push_back(t.dst.v);
            }
        }
    }
    std::vector<int> out;
    for (int s = 0; s < g.state_count(); ++s)
        if (in[s]) out.push_back(s);
    return out;
}

inline std::string macro_name(const Gclts& g, const std::vector<int>& members) {
    std::vector<std::string> names;
    names.reserve(members.size());
    for (int s : members) names.push_back(g.state_names[s]);
    std::sort(names.begin(), names.end());
    std::string out = "{";
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) out += ",";
        out += names[i];
    }
    out += "}";
    return out;
}

} // namespace detail

inline LocalMachine determinize_local(const Gclts& g, ParticipantId p) {
    LocalMachine m;
    m.participant = p;

    std::map<std::vector<int>, int> index;
    auto add_state = [&](std::vector<int> members) {
        auto it = index.find(members);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(m.members.size());
        index.emplace(members, id);
        bool fin = false;
        for (int s : members) fin = fin || g.finals[s];
        m.members.push_back(std::move(members));
        m.state_names.push_back(detail::macro_name(g, m.members.back()));
        m.finals.push_back(fin);
        m.out.emplace_back();
        return id;
    };

    m.initial = add_state(detail::eps_closure_set(g, p, {g.initial.v}));
    for (int cur = 0; cur < m.state_count(); ++cur) {
        // Collect the p-active labels leaving this macro-state, in declaration order.
        std::vector<AsyncEvent> labels;
        for (int s : m.members[cur]) {
            for (int ti : g.out[s]) {
                const Transition& t = g.transitions[ti];
                if (!t.event.active(p)) continue;
                AsyncEvent e = (t.event.sender == p) ? send_event(t.event) : receive_event(t.event);
                if (std::find(labels.begin(), labels.end(), e) == labels.end()) labels.push_back(e);
            }
        }
        for (const AsyncEvent& e : labels) {
            std::vector<int> succ;
            for (int s : m.members[cur]) {
                for (int ti : g.out[s]) {
                    const Transition& t = g.transitions[ti];
                    if (!t.event.active(p)) continue;
                    AsyncEvent te = (t.event.sender == p) ? send_event(t.event) : receive_event(t.event);
                    if (te == e) succ.push_back(t.dst.v);
                }
            }
            int dst = add_state(detail::eps_closure_set(g, p, std::move(succ)));
            int ti = static_cast<int>(m.transitions.size());
            m.transitions.push_back({cur, e, dst});
            m.out[cur].push_back(ti);
        }
    }
    return m;
}

// The canonical implementation: one determinized machine per participant.
// Emitted even for non-implementable protocols, where it is the refutation
// vehicle for the bounded oracle.
inline Clts synthesize_canonical(const Gclts& g) {
    Clts c;
    c.alphabet = g.alphabet;
    c.name = g.name;
    for (int p = 0; p < g.alphabet.participant_count(); ++p)
        c.machines.push_back(determinize_local(g, {p}));
    return c;
}

inline std::string serialize_lclts(const Clts& c, ParticipantId p) {
    const LocalMachine& m = c.machine(p);
    std::ostringstream os;
    os << "localmachine " << c.name << "\n";
    os << "participant " << c.alphabet.name(p) << "\n";
    os << "initial " << m.state_names[m.initial] << "\n";
    os << "finals";
    for (int s = 0; s < m.state_count(); ++s)
        if (m.finals[s]) os << " " << m.state_names[s];
    os << "\n";
    for (const LmTransition& t : m.transitions)
        os << "trans " << m.state_names[t.src] << " " << render(c.alphabet, t.event) << " "
           << m.state_names[t.dst] << "\n";
    return os.str();
}

inline std::string export_dot(const Clts& c, ParticipantId p) {
    const LocalMachine& m = c.machine(p);
    std::ostringstream os;
    os << "digraph \"" << dot_escape(c.name + "_" + c.alphabet.name(p)) << "\" {\n";
    os << "  rankdir=LR;\n";
    os << "  __start [shape=point];\n";
    for (int s = 0; s < m.state_count(); ++s)
        os << "  \"" << dot_escape(m.state_names[s]) << "\" [shape="
           << (m.finals[s] ? "doublecircle" : "circle") << "];\n";
    os << "  __start -> \"" << dot_escape(m.state_names[m.initial]) << "\";\n";
    for (const LmTransition& t : m.transitions)
        os << "  \"" << dot_escape(m.state_names[t.src]) << "\" -> \"" << dot_escape(m.state_names[t.dst])
           << "\" [label=\"" << dot_escape(render(c.alphabet, t.event)) << "\"];\n";
    os << "}\n";
    return os.str();
}

} // namespace cohere
