#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace edgecsp {

// A tuple over a relation scope, bit i = value of scope position i.
using BitTuple = std::uint32_t;

constexpr int kMaxArity = 24;

inline bool bit(BitTuple t, int pos) { return (t >> pos) & 1u; }
inline BitTuple bitmask(int pos) { return BitTuple{1} << pos; }

// Canonical tuple order is the integer value under this encoding
// (scope position 0 = least significant bit).

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed external input (JSON, CLI arguments, files).
struct ParseError : Error {
    using Error::Error;
};

// Operation called outside its contract (bad arity, unknown variable, ...).
struct PreconditionError : Error {
    using Error::Error;
};

// Input outside the solvable class (e.g. non-even constraint without a cover).
struct RefusalError : Error {
    using Error::Error;
};

// Broken internal invariant. Never expected on any input; fail loud.
struct InternalError : Error {
    using Error::Error;
};

#define ECSP_CHECK(cond, msg)                                                 \
    do {                                                                      \
        if (!(cond))                                                          \
            throw ::edgecsp::InternalError(std::string("invariant failed: ") \
                                           + (msg));                          \
    } while (0)

}  // namespace edgecsp
