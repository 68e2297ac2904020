#pragma once

#include <stdexcept>
#include <string>

namespace psdm {

/// Base class for all library errors. `code()` is a stable machine-readable
/// tag (also used by the CLI to map failures to exit codes).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

    /// True for failures of the numerics (degenerate mass, indefinite
    /// coefficients, ...) as opposed to malformed input or misuse.
    virtual bool numerical() const noexcept { return false; }

private:
    std::string code_;
};

namespace detail {
template <bool Numerical>
class TaggedError : public Error {
public:
    using Error::Error;
    bool numerical() const noexcept override { return Numerical; }
};
} // namespace detail

struct DimensionMismatch : detail::TaggedError<false> {
    explicit DimensionMismatch(const std::string& m) : TaggedError("DimensionMismatch", m) {}
};
struct UnknownBlock : detail::TaggedError<false> {
    explicit UnknownBlock(const std::string& m) : TaggedError("UnknownBlock", m) {}
};
struct InvalidArgument : detail::TaggedError<false> {
    explicit InvalidArgument(const std::string& m) : TaggedError("InvalidArgument", m) {}
};
struct SchemaError : detail::TaggedError<false> {
    explicit SchemaError(const std::string& m) : TaggedError("SchemaError", m) {}
};

struct NotPsd : detail::TaggedError<true> {
    explicit NotPsd(const std::string& m) : TaggedError("NotPsd", m) {}
};
struct ZeroMass : detail::TaggedError<true> {
    explicit ZeroMass(const std::string& m) : TaggedError("ZeroMass", m) {}
};
struct ZeroConditional : detail::TaggedError<true> {
    explicit ZeroConditional(const std::string& m) : TaggedError("ZeroConditional", m) {}
};
struct ZeroEvidence : detail::TaggedError<true> {
    explicit ZeroEvidence(const std::string& m) : TaggedError("ZeroEvidence", m) {}
};
struct PatternMismatch : detail::TaggedError<true> {
    explicit PatternMismatch(const std::string& m) : TaggedError("PatternMismatch", m) {}
};
struct CapExceeded : detail::TaggedError<true> {
    explicit CapExceeded(const std::string& m) : TaggedError("CapExceeded", m) {}
};
struct SingularGram : detail::TaggedError<true> {
    explicit SingularGram(const std::string& m) : TaggedError("SingularGram", m) {}
};
struct StepTooLarge : detail::TaggedError<true> {
    explicit StepTooLarge(const std::string& m) : TaggedError("StepTooLarge", m) {}
};
struct EnvelopeFailure : detail::TaggedError<true> {
    explicit EnvelopeFailure(const std::string& m) : TaggedError("EnvelopeFailure", m) {}
};

} // namespace psdm
