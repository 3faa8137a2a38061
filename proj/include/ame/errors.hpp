#pragma once

#include <stdexcept>
#include <string>

namespace ame {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivisionByZero final : Error {
    using Error::Error;
};

// Operands belong to different field specs.
struct MixedField final : Error {
    using Error::Error;
};

// Operation requires a different FieldSpec kind (e.g. trace on a prime field).
struct WrongFieldKind final : Error {
    using Error::Error;
};

struct DimensionMismatch final : Error {
    using Error::Error;
};

struct NonDistinctPrimes final : Error {
    using Error::Error;
};

struct OutOfRange final : Error {
    using Error::Error;
};

// Rank over a composite ring is not defined; split into prime components first.
struct CompositeFieldRank final : Error {
    using Error::Error;
};

struct InvalidMaxSize final : Error {
    using Error::Error;
};

struct NotComposite final : Error {
    using Error::Error;
};

struct DuplicatePrimes final : Error {
    using Error::Error;
};

struct MixedDimensions final : Error {
    using Error::Error;
};

// Rank cache does not match the matrix epoch it claims to describe.
struct StaleCache final : Error {
    using Error::Error;
};

struct InstanceTooLarge final : Error {
    using Error::Error;
};

// Oracle purity disagrees with the rank prediction; indicates a bug, never expected.
struct DualityViolation final : Error {
    using Error::Error;
};

struct InvalidConfig final : Error {
    using Error::Error;
};

struct ParseError final : Error {
    using Error::Error;
};

} // namespace ame
