#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sdlp {

// Ground-truth identity of a vehicle. Never appears on the air interface.
struct VehicleId {
    std::uint32_t value = 0;
    auto operator<=>(const VehicleId&) const = default;
};

// Opaque pseudonym token carried in CAMs.
struct PseudonymId {
    std::uint64_t value = 0;
    auto operator<=>(const PseudonymId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, VehicleId id) { return os << id.value; }
inline std::ostream& operator<<(std::ostream& os, PseudonymId id) { return os << id.value; }

class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

enum class Heading { Forward, Backward };

}  // namespace sdlp

template <>
struct std::hash<sdlp::VehicleId> {
    std::size_t operator()(sdlp::VehicleId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

template <>
struct std::hash<sdlp::PseudonymId> {
    std::size_t operator()(sdlp::PseudonymId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
