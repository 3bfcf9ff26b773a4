#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace warptree {

enum class ErrorCode {
    level_underflow,
    improper_tree,
    domain,
    invalid_argument,
    empty_sample,
    quadrature,
    missing_coefficient,
    sample_too_small,
    catalog,
    io,
    parse,
    interrupted,
};

/// Stable lowercase identifier used in `ERROR:<code>:` CLI lines.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace warptree
