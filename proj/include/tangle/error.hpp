#pragma once

#include <stdexcept>
#include <string>

namespace tangle {

// Base for every error raised by the library. `kind()` is a stable short
// name used in diagnostics and ingestion statistics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what)
        , kind_(std::move(kind))
    {
    }

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define TANGLE_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& what) : Error(#Name, what) \
        {                                                           \
        }                                                           \
    }

// taxonomy
TANGLE_DEFINE_ERROR(ExcludedType);
TANGLE_DEFINE_ERROR(UnknownLabel);

// diffmodel
TANGLE_DEFINE_ERROR(MalformedHunkHeader);
TANGLE_DEFINE_ERROR(BodyOutsideHunk);
TANGLE_DEFINE_ERROR(VocabFileInvalid);

// corpus
TANGLE_DEFINE_ERROR(FileUnreadable);
TANGLE_DEFINE_ERROR(SchemaViolation);
TANGLE_DEFINE_ERROR(InsufficientCandidates);
TANGLE_DEFINE_ERROR(QuotaNotDivisible);

// tangler
TANGLE_DEFINE_ERROR(DuplicateLabels);
TANGLE_DEFINE_ERROR(QuotaUnreachable);

// analytics
TANGLE_DEFINE_ERROR(AllDifferencesZero);
TANGLE_DEFINE_ERROR(DegenerateVariance);

// runner / config
TANGLE_DEFINE_ERROR(ConfigError);
TANGLE_DEFINE_ERROR(ManifestMismatch);

#undef TANGLE_DEFINE_ERROR

} // namespace tangle
