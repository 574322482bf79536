#ifndef GAUDIN_LAB_ERRORS_HPP
#define GAUDIN_LAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gaudin_lab
{

enum class ErrorKind {
    invalid_dimension,
    dimension_mismatch,
    not_traceless,
    non_finite,
    pole,
    resonance,
    invalid_argument,
    config,
};

inline const char *to_string(ErrorKind k)
{
    switch (k) {
        case ErrorKind::invalid_dimension:
            return "invalid dimension";
        case ErrorKind::dimension_mismatch:
            return "dimension mismatch";
        case ErrorKind::not_traceless:
            return "not traceless";
        case ErrorKind::non_finite:
            return "non-finite value";
        case ErrorKind::pole:
            return "pole";
        case ErrorKind::resonance:
            return "resonance";
        case ErrorKind::invalid_argument:
            return "invalid argument";
        case ErrorKind::config:
            return "config error";
    }
    return "unknown";
}

// Single exception type for the library; callers switch on kind() when they
// need to tell a pole collision apart from a malformed input.
class LabError : public std::runtime_error
{
public:
    LabError(ErrorKind kind, const std::string &what) : std::runtime_error(what), m_kind(kind) {}

    ErrorKind kind() const noexcept
    {
        return m_kind;
    }

private:
    ErrorKind m_kind;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what)
{
    throw LabError(kind, std::string(to_string(kind)) + ": " + what);
}

} // namespace gaudin_lab

#endif
