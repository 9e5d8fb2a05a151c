#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cohere/error.hpp"
#include "cohere/ids.hpp"

namespace cohere {

// Declared participant and value names of one protocol. Events refer to the
// alphabet by index; all comparisons are index comparisons.
struct Alphabet {
    std::vector<std::string> participants;
    std::vector<std::string> values;

    ParticipantId participant(const std::string& name) const {
        for (int i = 0; i < static_cast<int>(participants.size()); ++i)
            if (participants[i] == name) return {i};
        throw Error("UnknownSymbol", "undeclared participant '" + name + "'");
    }

    ValueId value(const std::string& name) const {
        for (int i = 0; i < static_cast<int>(values.size()); ++i)
            if (values[i] == name) return {i};
        throw Error("UnknownSymbol", "undeclared value '" + name + "'");
    }

    const std::string& name(ParticipantId p) const { return participants.at(p.v); }
    const std::string& name(ValueId m) const { return values.at(m.v); }

    int participant_count() const { return static_cast<int>(participants.size()); }
    int value_count() const { return static_cast<int>(values.size()); }
};

// Synchronous event p->q:m.
struct SyncEvent {
    ParticipantId sender;
    ParticipantId receiver;
    ValueId value;
    auto operator<=>(const SyncEvent&) const = default;

    bool active(ParticipantId p) const { return p == sender || p == receiver; }
};

enum class Dir { Send, Receive };

// Asynchronous event. Send renders as owner|>peer!m, Receive as owner<|peer?m.
struct AsyncEvent {
    Dir kind;
    ParticipantId owner;
    ParticipantId peer;
    ValueId value;
    auto operator<=>(const AsyncEvent&) const = default;
};

using SyncWord = std::vector<SyncEvent>;
using AsyncWord = std::vector<AsyncEvent>;

inline AsyncEvent send_event(const SyncEvent& e) { return {Dir::Send, e.sender, e.receiver, e.value}; }
inline AsyncEvent receive_event(const SyncEvent& e) { return {Dir::Receive, e.receiver, e.sender, e.value}; }

inline std::string render(const Alphabet& a, const SyncEvent& e) {
    return a.name(e.sender) + "->" + a.name(e.receiver) + ":" + a.name(e.value);
}

inline std::string render(const Alphabet& a, const AsyncEvent& e) {
    if (e.kind == Dir::Send) return a.name(e.owner) + "|>" + a.name(e.peer) + "!" + a.name(e.value);
    return a.name(e.owner) + "<|" + a.name(e.peer) + "?" + a.name(e.value);
}

template <typename Word>
std::string render_word(const Alphabet& a, const Word& w, const char* sep = " ") {
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += sep;
        out += render(a, w[i]);
    }
    return out;
}

// split(p->q:m) = p|>q!m . q<|p?m, extended homomorphically.
inline AsyncWord split_word(const SyncWord& w) {
    AsyncWord out;
    out.reserve(2 * w.size());
    for (const SyncEvent& e : w) {
        out.push_back(send_event(e));
        out.push_back(receive_event(e));
    }
    return out;
}

// Inverse of split_word; throws NotInImage unless every send is immediately
// followed by its matching receive.
inline SyncWord unsplit_word(const AsyncWord& w) {
    if (w.size() % 2 != 0) throw Error("NotInImage", "odd-length word");
    SyncWord out;
    out.reserve(w.size() / 2);
    for (size_t i = 0; i < w.size(); i += 2) {
        const AsyncEvent& s = w[i];
        const AsyncEvent& r = w[i + 1];
        if (s.kind != Dir::Send || r.kind != Dir::Receive || r.owner != s.peer ||
            r.peer != s.owner || r.value != s.value)
            throw Error("NotInImage", "send at position " + std::to_string(i) +
                                          " is not followed by its matching receive");
        out.push_back({s.owner, s.peer, s.value});
    }
    return out;
}

inline SyncWord project(const SyncWord& w, ParticipantId p) {
    SyncWord out;
    for (const SyncEvent& e : w)
        if (e.active(p)) out.push_back(e);
    return out;
}

inline AsyncWord project(const AsyncWord& w, ParticipantId p) {
    AsyncWord out;
    for (const AsyncEvent& e : w)
        if (e.owner == p) out.push_back(e);
    return out;
}

// Values of the send events from|>to!* (kind=Send) or the receive events
// to<|from?* (kind=Receive), in order of occurrence.
inline std::vector<ValueId> channel_values(const AsyncWord& w, ParticipantId from, ParticipantId to,
                                           Dir kind) {
    std::vector<ValueId> out;
    for (const AsyncEvent& e : w) {
        if (kind == Dir::Send && e.kind == Dir::Send && e.owner == from && e.peer == to)
            out.push_back(e.value);
        if (kind == Dir::Receive && e.kind == Dir::Receive && e.owner == to && e.peer == from)
            out.push_back(e.value);
    }
    return out;
}

// FIFO discipline: in every prefix, each channel's received value sequence is
// a prefix of its sent value sequence. Checked incrementally; equivalent to
// quantifying over all prefixes because compliance is prefix-closed.
inline bool is_channel_compliant(const AsyncWord& w) {
    std::unordered_map<int64_t, std::pair<std::vector<ValueId>, size_t>> chan; // (sent, received count)
    auto key = [](ParticipantId a, ParticipantId b) {
        return (static_cast<int64_t>(a.v) << 32) | static_cast<uint32_t>(b.v);
    };
    for (const AsyncEvent& e : w) {
        if (e.kind == Dir::Send) {
            chan[key(e.owner, e.peer)].first.push_back(e.value);
        } else {
            auto& c = chan[key(e.peer, e.owner)];
            if (c.second >= c.first.size() || c.first[c.second] != e.value) return false;
            ++c.second;
        }
    }
    return true;
}

} // namespace cohere
