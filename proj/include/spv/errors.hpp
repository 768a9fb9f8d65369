// Copyright (c) 2026 The spvkit developers
// Licensed under the Apache License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace spv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WrongLength : Error {
    explicit WrongLength(const std::string& what = "wrong input length") : Error(what) {}
};

struct IndexOutOfRange : Error {
    explicit IndexOutOfRange(const std::string& what = "index out of range") : Error(what) {}
};

struct EmptyLeafSet : Error {
    explicit EmptyLeafSet(const std::string& what = "leaf set must be non-empty") : Error(what) {}
};

struct ZeroTarget : Error {
    explicit ZeroTarget(const std::string& what = "target must be positive") : Error(what) {}
};

struct Overflow : Error {
    explicit Overflow(const std::string& what = "value exceeds 256-bit range") : Error(what) {}
};

struct NoConsistentCandidate : Error {
    explicit NoConsistentCandidate(const std::string& what = "no consistent candidate chain")
        : Error(what) {}
};

struct InvalidGenesis : Error {
    explicit InvalidGenesis(const std::string& what = "genesis header failed validation")
        : Error(what) {}
};

struct DivergentSeries : Error {
    explicit DivergentSeries(const std::string& what = "series diverges for alpha >= 0.5")
        : Error(what) {}
};

struct NonPositiveCost : Error {
    explicit NonPositiveCost(const std::string& what = "cost parameters must be positive")
        : Error(what) {}
};

struct ZeroBits : Error {
    explicit ZeroBits(const std::string& what = "filter size must be positive") : Error(what) {}
};

struct UnsatisfiableParams : Error {
    explicit UnsatisfiableParams(const std::string& what = "topology parameters unsatisfiable")
        : Error(what) {}
};

struct MiningLimitExceeded : Error {
    explicit MiningLimitExceeded(const std::string& what = "nonce search exceeded iteration cap")
        : Error(what) {}
};

struct MalformedInput : Error {
    explicit MalformedInput(const std::string& what = "malformed input") : Error(what) {}
};

}  // namespace spv
