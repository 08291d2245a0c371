#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace holoflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " (offset " + std::to_string(offset) + ")"), offset(offset) {}
    std::size_t offset;
};

struct UnknownIdentifier : Error {
    UnknownIdentifier(const std::string& name, std::size_t offset)
        : Error("unknown identifier '" + name + "' (offset " + std::to_string(offset) + ")"),
          name(name), offset(offset) {}
    std::string name;
    std::size_t offset;
};

struct DivisionByZero : Error {
    using Error::Error;
};

struct WindingMismatch : Error {
    using Error::Error;
};
struct NonConvergence : Error {
    using Error::Error;
};
struct OrderOverflow : Error {
    using Error::Error;
};
struct NotACenter : Error {
    using Error::Error;
};
struct NotMultiple : Error {
    using Error::Error;
};

struct StartAtEquilibrium : Error {
    using Error::Error;
};
struct NotTransversal : Error {
    using Error::Error;
};

struct PoleProximity : Error {
    using Error::Error;
};
struct OutOfSpan : Error {
    using Error::Error;
};
struct NotEscaping : Error {
    using Error::Error;
};

struct MalformedComponent : Error {
    using Error::Error;
};
struct SectorSeedFailure : Error {
    using Error::Error;
};

}  // namespace holoflow
