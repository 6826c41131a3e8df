#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace design_lab {

enum class ErrorKind {
    invalid_argument,
    resource_limit,
    out_of_theorem_domain,
    rank_deficiency,
    invalid_curve,
    io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can report it as JSON.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message) : std::runtime_error(message), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &message) { throw Error(kind, message); }

inline void require(bool condition, ErrorKind kind, const std::string &message) {
    if(!condition) fail(kind, message);
}

} // namespace design_lab
