#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace cohere {

struct ParticipantId {
    int v = -1;
    auto operator<=>(const ParticipantId&) const = default;
};

struct ValueId {
    int v = -1;
    auto operator<=>(const ValueId&) const = default;
};

struct StateId {
    int v = -1;
    auto operator<=>(const StateId&) const = default;
};

} // namespace cohere

template <> struct std::hash<cohere::ParticipantId> {
    size_t operator()(cohere::ParticipantId id) const noexcept { return std::hash<int>{}(id.v); }
};
template <> struct std::hash<cohere::ValueId> {
    size_t operator()(cohere::ValueId id) const noexcept { return std::hash<int>{}(id.v); }
};
template <> struct std::hash<cohere::StateId> {
    size_t operator()(cohere::StateId id) const noexcept { return std::hash<int>{}(id.v); }
};
